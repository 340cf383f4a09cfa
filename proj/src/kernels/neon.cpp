// AArch64 only; NEON is part of the base ISA there.
#include <arm_neon.h>

#include <cmath>

#include "lhom/kernels.hpp"

namespace lhom::kernels {
namespace {

void trig_accumulate_neon(double* row, double a, const double* c, double b, const double* s,
                          std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t r = vld1q_f64(row + i);
    r = vfmaq_f64(r, va, vld1q_f64(c + i));
    r = vfmsq_f64(r, vb, vld1q_f64(s + i));
    vst1q_f64(row + i, r);
  }
  for (; i < n; ++i) row[i] = std::fma(-b, s[i], std::fma(a, c[i], row[i]));
}

void min_max_neon(const double* x, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double mn = x[0];
  double mx = x[0];
  if (n >= 2) {
    float64x2_t vmn = vld1q_f64(x);
    float64x2_t vmx = vmn;
    for (i = 2; i + 2 <= n; i += 2) {
      const float64x2_t v = vld1q_f64(x + i);
      vmn = vminq_f64(vmn, v);
      vmx = vmaxq_f64(vmx, v);
    }
    mn = vminvq_f64(vmn);
    mx = vmaxvq_f64(vmx);
  }
  for (; i < n; ++i) {
    mn = x[i] < mn ? x[i] : mn;
    mx = x[i] > mx ? x[i] : mx;
  }
  *lo = mn;
  *hi = mx;
}

double max_abs_neon(const double* x, std::size_t n) {
  float64x2_t vm = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vabsq_f64(vld1q_f64(x + i)));
  double m = vmaxvq_f64(vm);
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = v > m ? v : m;
  }
  return m;
}

constexpr KernelTable kNeon{Backend::Neon, "neon", trig_accumulate_neon, min_max_neon,
                            max_abs_neon};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace lhom::kernels
