#pragma once

// Band-limited periodic jump coefficient mu(x, y) on the torus, stored as a
// finite Fourier series
//
//   mu(x, y) = sum_{k,l} mu_hat[k,l] exp(2 pi i (<k,x> + <l,y>)),
//
// together with the scalar constants derived from it (c0, mu0, d0, delta0).

#include <array>
#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace lhom {

inline constexpr int kMaxDim = 3;

// Lattice vector in Z^d padded with zeros up to kMaxDim.
using LatticeVec = std::array<int, kMaxDim>;
// Point of R^d (quasimomentum, spatial point) padded with zeros.
using RealVec = std::array<double, kMaxDim>;

using cplx = std::complex<double>;

struct ModelParams {
  int dimension = 1;
  double alpha = 1.0;

  // Throws InvalidArgument unless 1 <= dimension <= 3 and 0 < alpha < 2.
  static ModelParams make(int dimension, double alpha);
  void validate() const;
  double gamma() const { return alpha / 2.0; }
};

struct ModeKey {
  LatticeVec k{};
  LatticeVec l{};
  auto operator<=>(const ModeKey&) const = default;
};

double euclidean_norm(const RealVec& v, int dimension);
int sup_norm(const LatticeVec& v, int dimension);
int l1_norm(const LatticeVec& v, int dimension);

struct CoefficientBounds {
  double mu_minus = 0.0;
  double mu_plus = 0.0;
};

class PeriodicCoefficient {
 public:
  using ModeMap = std::map<ModeKey, cplx>;

  PeriodicCoefficient(int dimension, ModeMap modes);

  int dimension() const { return dimension_; }
  const ModeMap& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }

  // Zero for pairs outside the support.
  cplx amplitude(const LatticeVec& k, const LatticeVec& l) const;

  // Direct evaluation of the trigonometric polynomial (real part).
  double evaluate(std::span<const double> x, std::span<const double> y) const;

  // sum 2 pi (|k|_1 + |l|_1) |mu_hat|, a Lipschitz constant w.r.t. the
  // Euclidean norm on R^{2d}.
  double lipschitz_constant() const;
  // max_{(k,l) in support} |k + l|_inf
  int coupling_extent() const;
  double abs_sum() const;

  bool certified() const { return bounds_.has_value(); }
  // Throws InvalidArgument if the coefficient has not been certified.
  const CoefficientBounds& bounds() const;
  double mu_minus() const { return bounds().mu_minus; }
  double mu_plus() const { return bounds().mu_plus; }

  // Copy carrying certified bounds (set by validate_coefficient).
  PeriodicCoefficient with_bounds(CoefficientBounds b) const;

 private:
  int dimension_;
  ModeMap modes_;
  std::optional<CoefficientBounds> bounds_;
};

struct CertificationReport {
  int grid_points_per_dim = 0;
  std::uint64_t samples = 0;
  double grid_min = 0.0;
  double grid_max = 0.0;
  double lipschitz = 0.0;
  double spacing = 0.0;
  double margin = 0.0;
  double mu_minus = 0.0;  // certified
  double mu_plus = 0.0;   // certified
};

// Checks conjugate and exchange symmetry exactly on the mode map, evaluates
// mu on a uniform grid of the 2d-torus and certifies global bounds with a
// Lipschitz margin. Throws SymmetryViolation or PositivityUncertified.
CertificationReport validate_coefficient(const PeriodicCoefficient& coeff,
                                         int grid_points_per_dim);

// validate_coefficient + attach the certified bounds.
PeriodicCoefficient certify(const PeriodicCoefficient& coeff, int grid_points_per_dim);

// 256 / 64 / 24 points per coordinate for d = 1 / 2 / 3.
int default_positivity_grid(int dimension);

// pi^{d/2} |Gamma(-alpha/2)| / (2^alpha Gamma((d + alpha)/2))
double compute_c0(const ModelParams& params);

// c0 |xi|^alpha
double v_alpha(const ModelParams& params, double c0, const RealVec& xi);

// Threshold modulus: |xi|^alpha (alpha < 1), |xi| (1 + |ln|xi||) (alpha = 1),
// |xi| (alpha > 1). Takes the Euclidean norm of xi.
double theta(double alpha, double xi_norm);
bool is_alpha_one(double alpha);

// Real part of mu_hat[0,0]; throws SymmetryViolation if the imaginary part
// exceeds 1e-12.
double effective_mu(const PeriodicCoefficient& coeff);

// m -> mu_hat[m,-m] for m != 0 in the support (cosine coefficients of mu_*).
std::map<LatticeVec, double> mu_star_coefficients(const PeriodicCoefficient& coeff);

struct GapConstants {
  double delta0 = 0.0;
  double d0 = 0.0;
};

// delta0 = pi (mu_-/(3 mu_+))^{1/alpha}, d0 = mu_- c0 pi^alpha, from the
// certified bounds.
GapConstants delta0_and_d0(const ModelParams& params, double c0, const PeriodicCoefficient& coeff);

struct TheoryConstants {
  double alpha = 0.0;
  double c0 = 0.0;
  double mu_eff = 0.0;
  double d0 = 0.0;
  double delta0 = 0.0;
  double theta(double xi_norm) const { return lhom::theta(alpha, xi_norm); }
};

TheoryConstants theory_constants(const ModelParams& params, const PeriodicCoefficient& coeff);

// Reference coefficients used throughout the tests and example configs.
namespace reference {
// mu == value
PeriodicCoefficient constant(int dimension, double value = 1.0);
// 1 + amp cos(2 pi (x_1 - y_1))
PeriodicCoefficient cosine_difference(int dimension, double amp = 0.5);
// 1 + amp cos(2 pi x_1) cos(2 pi y_1)
PeriodicCoefficient cosine_product(int dimension, double amp = 0.5);
// Random symmetric band-limited coefficient with mean one, modes in
// [-extent, extent]^d and off-constant amplitude mass `budget` < 1, which
// guarantees mu >= 1 - budget > 0.
PeriodicCoefficient random_band_limited(int dimension, std::uint64_t seed, int extent = 1,
                                        int orbits = 3, double budget = 0.6);
}  // namespace reference

}  // namespace lhom
