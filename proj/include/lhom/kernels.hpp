#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation; vector variants (AVX2+FMA on x86-64, NEON on AArch64) are
// compiled into separate translation units and picked once at runtime from
// the CPU feature flags. The scalar table is always available and is what
// the equivalence tests compare against.

#include <cstddef>
#include <span>
#include <string_view>

namespace lhom::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;
  // row[i] += a * c[i] - b * s[i]
  void (*trig_accumulate)(double* row, double a, const double* c, double b,
                          const double* s, std::size_t n);
  // n >= 1
  void (*min_max)(const double* x, std::size_t n, double* lo, double* hi);
  // max_i |x[i]|, 0 for n == 0
  double (*max_abs)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the backend was not compiled in or the CPU lacks the features.
const KernelTable* table_for(Backend backend);

// Best supported table, chosen on first use.
const KernelTable& active();

// Pin the active table (tests and benchmarks). Throws InvalidArgument if the
// backend is unavailable on this machine.
void force_backend(Backend backend);
void reset_backend();

std::string_view backend_name(Backend backend);

inline void trig_accumulate(std::span<double> row, double a, std::span<const double> c,
                            double b, std::span<const double> s) {
  active().trig_accumulate(row.data(), a, c.data(), b, s.data(), row.size());
}

inline void min_max(std::span<const double> x, double& lo, double& hi) {
  active().min_max(x.data(), x.size(), &lo, &hi);
}

inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace lhom::kernels
