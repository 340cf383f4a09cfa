#pragma once

// Operator-norm resolvent discrepancy between the periodic operator and its
// effective constant-coefficient limit, measured fiberwise:
//
//   ||(A_eps + I)^{-1} - (A^0 + I)^{-1}|| = eps^alpha sup_xi ||(A(xi) + eps^alpha)^{-1} - (A^0(xi) + eps^alpha)^{-1}||
//
// with the sup over the Brillouin cell replaced by a max over an XiGrid.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lhom/coefficient.hpp"
#include "lhom/fiber.hpp"

namespace lhom {

struct XiGridSpec {
  int points_per_dim = 64;
  double radial_min_exp = -4.0;  // radii 10^min .. 10^max
  double radial_max_exp = -0.5;
  int radial_per_decade = 8;
  bool boundary_refinement = true;  // radii mirrored towards the cell faces

  bool operator==(const XiGridSpec&) const = default;
};

struct XiGrid {
  int dimension = 1;
  std::vector<RealVec> points;  // inside [-pi, pi)^d, contains 0, deterministic order
};

// Uniform points along each axis plus a logarithmic radial refinement around
// xi = 0 along the coordinate axes and the diagonals (both orientations).
XiGrid build_xi_grid(int dimension, const XiGridSpec& spec);
// 64 / 12 / 4 uniform points per axis for d = 1 / 2 / 3.
XiGridSpec default_xi_grid(int dimension);
// Twice the uniform density and twice the radial density.
XiGridSpec doubled(const XiGridSpec& spec);
// Points with |xi| <= radius: zero, log radii from 10^min_exp to radius along
// axes and diagonals, and the radius itself.
XiGrid ball_grid(int dimension, double radius, double min_exp, int per_decade);

// Predicted rate: eps^alpha (alpha < 1), eps (1 + |ln eps|)^2 (alpha = 1),
// eps^{2-alpha} (alpha > 1).
double rate_function(double alpha, double eps);

// True when alpha is within the windows where the theory's constants blow up:
// (0.95, 1.05) or (1.90, 2.00).
bool near_singular_alpha(double alpha);

// Eigendecomposition of A(xi) and the diagonal of A^0(xi) at one
// quasimomentum, reusable for any spectral parameter s = eps^alpha.
class ResolventProbe {
 public:
  ResolventProbe(const PeriodicCoefficient& coeff, const ModelParams& params, double c0,
                 double mu_eff, const ModeSet& modes, const RealVec& xi);

  // ||(A + s)^{-1} - (A^0 + s)^{-1}||_2
  double fiber_difference(double s) const;
  // ||(A + s)^{-1} - (mu0 V_alpha(xi) + s)^{-1} P||_2
  double threshold_difference(double s) const;

  bool diagonal() const { return diagonal_; }

 private:
  bool diagonal_ = false;
  Eigen::VectorXd eigenvalues_;    // of A (diagonal entries when diagonal_)
  Eigen::MatrixXcd eigenvectors_;  // unused when diagonal_
  Eigen::VectorXd effective_;
  double effective_threshold_ = 0.0;  // mu0 V_alpha(xi)
  Eigen::Index zero_index_ = 0;
};

double fiber_resolvent_diff(const PeriodicCoefficient& coeff, const ModelParams& params,
                            const ModeSet& modes, const RealVec& xi, double epsilon);

// Requires a certified coefficient and |xi| <= delta0.
double threshold_resolvent_diff(const PeriodicCoefficient& coeff, const ModelParams& params,
                                const ModeSet& modes, const RealVec& xi, double epsilon);

struct GridSup {
  std::vector<double> values;           // sup over the grid, per spectral parameter
  std::vector<std::size_t> argmax;      // grid index of the (first) maximizer
};

// sup_xi ||(A(xi)+s)^{-1} - (A^0(xi)+s)^{-1}|| for every s, parallel over xi.
GridSup fiber_sup(const PeriodicCoefficient& coeff, const ModelParams& params, const ModeSet& modes,
                  const XiGrid& grid, std::span<const double> spectral_params, int workers);
// Same with the rank-one threshold comparator.
GridSup threshold_sup(const PeriodicCoefficient& coeff, const ModelParams& params,
                      const ModeSet& modes, const XiGrid& grid,
                      std::span<const double> spectral_params, int workers);

// s * sup_xi ||(A(xi)+s)^{-1} - (A^0(xi)+s)^{-1}||, the rescaled discrepancy
// driven directly by the spectral parameter.
double discrepancy_at_spectral_parameter(const PeriodicCoefficient& coeff,
                                         const ModelParams& params, const ModeSet& modes,
                                         const XiGrid& grid, double s, int workers);

struct RateFit {
  double slope = 0.0;
  double r_squared = 0.0;
  std::optional<double> log_corrected_slope;  // alpha = 1: against log(eps (1 + |ln eps|)^2)
  std::optional<double> log_corrected_r_squared;
};

// Ordinary least squares on (log eps, log value). Throws DegenerateFit for
// fewer than 8 positive points or constant values.
RateFit fit_rate(std::span<const std::pair<double, double>> points, double alpha);

// Least-squares slope of log(value) against log(abscissa), points with value
// <= 0 dropped. Throws DegenerateFit for fewer than 2 usable points.
RateFit fit_loglog(std::span<const double> abscissa, std::span<const double> values);

struct StudyOptions {
  int workers = 1;
  bool truncation_check = true;
  bool grid_check = false;  // rerun on doubled(grid spec); needs grid_spec
  std::optional<XiGridSpec> grid_spec;
  double slope_margin = 0.1;
  bool strict = true;  // throw TruncationUnstable
};

struct RateStudyResult {
  double alpha = 0.0;
  int truncation = 0;
  std::vector<double> epsilons;  // descending
  std::vector<double> discrepancies;
  std::vector<RealVec> argmax_xi;
  std::vector<double> argmax_xi_norm;
  std::vector<double> rate_bound;
  std::vector<double> bound_ratio;

  bool exact = false;  // every discrepancy is exactly zero
  std::optional<RateFit> fit;
  double expected_exponent = 0.0;
  double slope_threshold = 0.0;
  double ratio_spread = 0.0;  // max/min bound_ratio
  std::optional<double> truncation_stability;
  std::vector<double> refined_discrepancies;  // at 2N
  std::optional<double> grid_stability;
  std::string warning;

  bool slope_ok = true;
  bool ratio_ok = true;
  bool bounded_ok = true;  // all <= 2
  bool decay_ok = true;    // smallest-eps value <= 0.2 x largest-eps value
  bool truncation_ok = true;
  bool grid_ok = true;

  double fitted_slope() const;  // log-corrected for alpha = 1
  bool passed() const {
    return slope_ok && ratio_ok && bounded_ok && decay_ok && truncation_ok && grid_ok;
  }
};

// epsilons: >= 8 points spanning >= 1.5 decades (any order; stored descending).
RateStudyResult discrepancy_study(const PeriodicCoefficient& coeff, const ModelParams& params,
                                  const ModeSet& modes, const XiGrid& grid,
                                  std::span<const double> epsilons, const StudyOptions& options);

std::vector<double> log_spaced(double lo, double hi, int count);

void write_rate_csv(std::ostream& os, const RateStudyResult& result, const std::string& digest);

}  // namespace lhom
