#include "lhom/kernels.hpp"

#include <cmath>

namespace lhom::kernels {
namespace {

void trig_accumulate_scalar(double* row, double a, const double* c, double b, const double* s,
                            std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) row[i] += a * c[i] - b * s[i];
}

void min_max_scalar(const double* x, std::size_t n, double* lo, double* hi) {
  double mn = x[0];
  double mx = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    mn = x[i] < mn ? x[i] : mn;
    mx = x[i] > mx ? x[i] : mx;
  }
  *lo = mn;
  *hi = mx;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = v > m ? v : m;
  }
  return m;
}

constexpr KernelTable kScalar{Backend::Scalar, "scalar", trig_accumulate_scalar, min_max_scalar,
                              max_abs_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace lhom::kernels
