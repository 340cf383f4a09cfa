#pragma once

// Threshold spectral analysis of a fiber matrix: eigendecomposition, the
// rank-one spectral projector F(xi) of the bottom eigenvalue computed both
// from eigenvectors and from a Riesz contour integral, and the threshold
// approximation norms ||F - P||, ||A F - rho P|| and ||A F - mu0 V_alpha P||.

#include <vector>

#include <Eigen/Dense>

#include "lhom/coefficient.hpp"
#include "lhom/fiber.hpp"

namespace lhom {

struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors;  // orthonormal columns aligned with eigenvalues
};

// Throws ConvergenceFailure if the Hermitian solver does not converge.
SpectralData eig_hermitian(const FiberMatrix& matrix);
SpectralData eig_hermitian(const Eigen::MatrixXcd& hermitian);

// v1 v1^* for the single eigenvalue <= cutoff. Throws GapViolation when the
// count of eigenvalues under the cutoff is not one, or when lambda_2 -
// lambda_1 < 1e-8.
Eigen::MatrixXcd projector_by_eig(const SpectralData& spectral, double cutoff);

// Closed curve at distance `radius` around the real segment [0, segment_end]:
// two semicircles joined by horizontal segments, traversed counterclockwise.
// Each of the four smooth pieces carries a Gauss-Legendre rule; nodes are
// shared among pieces in proportion to arclength.
struct StadiumContour {
  double segment_end = 0.0;
  double radius = 0.0;
  std::vector<cplx> nodes;
  std::vector<cplx> weights;  // dz weights (tangent times arclength weight)

  double arclength() const;          // quadrature of |dz|
  double nominal_arclength() const;  // 2 pi r + 2 segment_end
  double rightmost() const { return segment_end + radius; }
  // Distance from a real point to the curve.
  double distance(double x) const;
};

StadiumContour make_stadium(double segment_end, double radius, int nodes);
// The threshold contour: segment [0, d0/3] at distance d0/3.
StadiumContour threshold_contour(double d0, int nodes);

struct RieszResult {
  Eigen::MatrixXcd projector;  // F
  Eigen::MatrixXcd a_times_f;  // A F
  int nodes = 0;
  double refinement_change = 0.0;  // ||F_n - F_{n/2}||
};

struct RieszOptions {
  double tolerance = 1e-9;  // node doubling stops when F changes by less
  int max_nodes = 8192;
  double min_distance_fraction = 0.1;  // of the contour radius
};

// F = -(1/2 pi i) oint (A - zeta)^{-1} dzeta and A F = -(1/2 pi i) oint
// (A - zeta)^{-1} zeta dzeta. Starts from `nodes` (>= 128) and doubles until
// the projector changes by less than the tolerance. Throws ContourTooClose if
// an eigenvalue sits within radius/10 of the contour and
// QuadratureNotConverged if doubling does not settle.
RieszResult projector_by_riesz(const FiberMatrix& matrix, double segment_end, double radius,
                               int nodes, const RieszOptions& options = {});

// P = e_0 e_0^* onto the constant function.
Eigen::MatrixXcd zero_mode_projector(const ModeSet& modes);

struct ThresholdReport {
  RealVec xi{};
  double xi_norm = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double f_minus_p_norm = 0.0;
  double phi_norm = 0.0;
  double af_minus_effective_norm = 0.0;
  double rho = 0.0;
  double rho_star = 0.0;
  bool inside_ball = true;   // |xi| <= delta0
  double cutoff = 0.0;       // spectral window [0, cutoff] used for F
  double riesz_agreement = 0.0;  // ||F_riesz - F_eig||
  int riesz_nodes = 0;
};

struct ThresholdOptions {
  int riesz_nodes = 256;
  bool cross_check = true;
  double projector_tolerance = 1e-8;
};

// Requires a certified coefficient. Inside the delta0-ball the projector
// window is [0, d0/3]. Outside the ball the report is still produced when
// the bottom eigenvalue stays simple and lambda_2 >= d0; the window is then
// centered on the gap (lambda_1, lambda_2) and inside_ball is false.
// Throws GapViolation otherwise and BoundViolated when the two projector
// routes disagree by more than projector_tolerance.
ThresholdReport threshold_report(const PeriodicCoefficient& coeff, const ModelParams& params,
                                 const ModeSet& modes, const RealVec& xi,
                                 const ThresholdOptions& options = {});

}  // namespace lhom
