// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "lhom/kernels.hpp"

namespace lhom::kernels {
namespace {

void trig_accumulate_avx2(double* row, double a, const double* c, double b, const double* s,
                          std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_loadu_pd(row + i);
    r = _mm256_fmadd_pd(va, _mm256_loadu_pd(c + i), r);
    r = _mm256_fnmadd_pd(vb, _mm256_loadu_pd(s + i), r);
    _mm256_storeu_pd(row + i, r);
  }
  for (; i < n; ++i) row[i] = std::fma(-b, s[i], std::fma(a, c[i], row[i]));
}

void min_max_avx2(const double* x, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double mn = x[0];
  double mx = x[0];
  if (n >= 4) {
    __m256d vmn = _mm256_loadu_pd(x);
    __m256d vmx = vmn;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(x + i);
      vmn = _mm256_min_pd(vmn, v);
      vmx = _mm256_max_pd(vmx, v);
    }
    alignas(32) double bmn[4];
    alignas(32) double bmx[4];
    _mm256_store_pd(bmn, vmn);
    _mm256_store_pd(bmx, vmx);
    mn = bmn[0];
    mx = bmx[0];
    for (int j = 1; j < 4; ++j) {
      mn = bmn[j] < mn ? bmn[j] : mn;
      mx = bmx[j] > mx ? bmx[j] : mx;
    }
  }
  for (; i < n; ++i) {
    mn = x[i] < mn ? x[i] : mn;
    mx = x[i] > mx ? x[i] : mx;
  }
  *lo = mn;
  *hi = mx;
}

double max_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d vm = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  alignas(32) double buf[4];
  _mm256_store_pd(buf, vm);
  double m = buf[0];
  for (int j = 1; j < 4; ++j) m = buf[j] > m ? buf[j] : m;
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = v > m ? v : m;
  }
  return m;
}

constexpr KernelTable kAvx2{Backend::Avx2, "avx2", trig_accumulate_avx2, min_max_avx2,
                            max_abs_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace lhom::kernels
