#pragma once

// Galerkin truncation of the fiber operators A(xi; alpha, mu) on the Fourier
// basis exp(2 pi i <n, x>), |n|_inf <= N, of the unit torus.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lhom/coefficient.hpp"

namespace lhom {

class ModeSet {
 public:
  ModeSet(int dimension, int truncation);

  int dimension() const { return dimension_; }
  int truncation() const { return truncation_; }
  std::size_t size() const { return modes_.size(); }
  const LatticeVec& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<LatticeVec>& modes() const { return modes_; }

  std::optional<std::size_t> index_of(const LatticeVec& n) const;
  std::size_t zero_index() const { return zero_index_; }

 private:
  int dimension_;
  int truncation_;
  int side_;
  std::vector<LatticeVec> modes_;  // lexicographic
  std::size_t zero_index_;
};

// Default truncation: 32 / 8 / 4 for d = 1 / 2 / 3.
int default_truncation(int dimension);

struct FiberMatrix {
  RealVec xi{};
  double alpha = 0.0;
  double c0 = 0.0;
  Eigen::MatrixXcd entries;
};

struct EffectiveFiberMatrix {
  RealVec xi{};
  Eigen::VectorXd diagonal;
};

// Throws InvalidArgument unless every component of xi lies in [-pi, pi].
void check_quasimomentum(const RealVec& xi, int dimension);

// Entry (m, n):
//   (c0/2) sum_{k+l=m-n} mu_hat[k,l] (|2pi(l-m)-xi|^a + |2pi(l+n)+xi|^a - |2pi l|^a - |2pi k|^a).
// Throws TruncationTooSmall when N < max |k+l|_inf over the support.
FiberMatrix assemble_fiber_matrix(const PeriodicCoefficient& coeff, const ModelParams& params,
                                  double c0, const ModeSet& modes, const RealVec& xi);

// mu0 c0 |2 pi n + xi|^alpha
EffectiveFiberMatrix assemble_effective_fiber(const ModelParams& params, double c0, double mu_eff,
                                              const ModeSet& modes, const RealVec& xi);

// Diagonal of A_0(xi): c0 |2 pi n + xi|^alpha.
Eigen::VectorXd free_symbol(const ModelParams& params, double c0, const ModeSet& modes,
                            const RealVec& xi);

struct RhoValues {
  double rho = 0.0;
  double rho_star = 0.0;
};

// rho(xi) = a(xi)[1, 1] evaluated from the mode sum, and rho_* = rho - mu0 V_alpha(xi).
RhoValues rho_and_rho_star(const PeriodicCoefficient& coeff, const ModelParams& params, double c0,
                           const RealVec& xi);

// Structural diagnostics used by the property suites.
double hermitian_defect(const Eigen::MatrixXcd& m);  // max |M - M^*|
double min_eigenvalue(const Eigen::MatrixXcd& hermitian);
double spectral_norm_hermitian(const Eigen::MatrixXcd& hermitian);  // max |eigenvalue|

struct SandwichMargins {
  double lower = 0.0;  // min eig(A - mu_- A_0)
  double upper = 0.0;  // min eig(mu_+ A_0 - A)
};
SandwichMargins sandwich_margins(const FiberMatrix& fiber, const PeriodicCoefficient& coeff,
                                 const ModelParams& params, const ModeSet& modes);

// max_{m,n} |A(-xi)[m,n] - conj(A(xi)[-m,-n])|
double conjugation_defect(const FiberMatrix& plus, const FiberMatrix& minus, const ModeSet& modes);

// CSV dump, row-major, each entry written as "re,im".
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXcd& m);

struct FormDifferenceEntry {
  RealVec xi{};
  double xi_norm = 0.0;
  double value = 0.0;  // ||A(xi)-A(0)|| (alpha < 1) or r(xi) (alpha >= 1)
  double bound = 0.0;  // mu_+ c1 |xi|^alpha (alpha < 1) or Theta(xi) (alpha >= 1)
  double ratio = 0.0;  // value / bound
};

struct FormDifferenceReport {
  bool operator_bound = false;  // true for alpha < 1
  double c1 = 0.0;              // quadrature value, alpha < 1 only
  std::vector<FormDifferenceEntry> entries;
  double ratio_spread = 0.0;  // max/min of ratio over nonzero xi (alpha >= 1)
  bool passed = false;
};

// alpha < 1: checks ||A(xi) - A(0)||_2 <= mu_+ c1 |xi|^alpha for every xi.
// alpha >= 1: r(xi) = max over `trials` seeded random u of
//   |<(A(xi)-A(0))u,u>| / (<A(0)u,u> + mu_+ |u|^2),
// and requires max/min of r/Theta across the list to be <= 10.
// Throws BoundViolated on failure.
FormDifferenceReport form_difference_checks(const PeriodicCoefficient& coeff,
                                            const ModelParams& params, const ModeSet& modes,
                                            std::span<const RealVec> xi_list, int trials,
                                            std::uint64_t seed);

}  // namespace lhom
