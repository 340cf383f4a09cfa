#include "lhom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "lhom/errors.hpp"

namespace lhom {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

double operator_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace

SpectralData eig_hermitian(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("Hermitian eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

SpectralData eig_hermitian(const FiberMatrix& matrix) { return eig_hermitian(matrix.entries); }

Eigen::MatrixXcd projector_by_eig(const SpectralData& spectral, double cutoff) {
  const Eigen::VectorXd& ev = spectral.eigenvalues;
  const auto below = std::count_if(ev.begin(), ev.end(), [cutoff](double v) { return v <= cutoff; });
  if (below != 1) {
    std::ostringstream os;
    os << below << " eigenvalues lie below the cutoff " << cutoff << " (expected exactly one)";
    throw GapViolation(os.str());
  }
  if (ev.size() > 1 && ev[1] - ev[0] < 1e-8)
    throw GapViolation("bottom eigenvalue is not simple (lambda_2 - lambda_1 < 1e-8)");
  const Eigen::VectorXcd v = spectral.eigenvectors.col(0);
  return v * v.adjoint();
}

double StadiumContour::arclength() const {
  double s = 0.0;
  for (const cplx& w : weights) s += std::abs(w);
  return s;
}

double StadiumContour::nominal_arclength() const { return 2.0 * kPi * radius + 2.0 * segment_end; }

double StadiumContour::distance(double x) const {
  const double to_segment = x < 0.0 ? -x : (x > segment_end ? x - segment_end : 0.0);
  return std::fabs(radius - to_segment);
}

StadiumContour make_stadium(double segment_end, double radius, int nodes) {
  if (!(radius > 0.0) || segment_end < 0.0) throw InvalidArgument("invalid stadium geometry");
  if (nodes < 16) throw InvalidArgument("stadium contour needs at least 16 nodes");
  StadiumContour c;
  c.segment_end = segment_end;
  c.radius = radius;
  const double total = c.nominal_arclength();
  int arc_nodes = std::max(4, static_cast<int>(std::lround(nodes * kPi * radius / total)));
  int seg_nodes = segment_end > 0.0 ? (nodes - 2 * arc_nodes) / 2 : 0;
  if (segment_end > 0.0 && seg_nodes < 2) {
    seg_nodes = 2;
    arc_nodes = (nodes - 2 * seg_nodes) / 2;
  }
  c.nodes.reserve(nodes);
  c.weights.reserve(nodes);
  std::vector<double> x, w;
  const cplx I{0.0, 1.0};

  auto add_segment = [&](double from, double to, double height) {
    if (seg_nodes == 0) return;
    gauss_legendre(seg_nodes, x, w);
    const double half = 0.5 * (to - from);
    for (int i = 0; i < seg_nodes; ++i) {
      c.nodes.push_back(cplx{from + half * (x[i] + 1.0), height});
      c.weights.push_back(cplx{half * w[i], 0.0});
    }
  };
  auto add_arc = [&](double center, double theta_from) {
    gauss_legendre(arc_nodes, x, w);
    const double half = 0.5 * kPi;
    for (int i = 0; i < arc_nodes; ++i) {
      const double th = theta_from + half * (x[i] + 1.0);
      const cplx e = std::polar(1.0, th);
      c.nodes.push_back(center + radius * e);
      c.weights.push_back(I * radius * e * (half * w[i]));
    }
  };

  add_segment(0.0, segment_end, -radius);
  add_arc(segment_end, -0.5 * kPi);
  add_segment(segment_end, 0.0, radius);
  add_arc(0.0, 0.5 * kPi);
  return c;
}

StadiumContour threshold_contour(double d0, int nodes) { return make_stadium(d0 / 3.0, d0 / 3.0, nodes); }

namespace {

void riesz_sums(const Eigen::MatrixXcd& a, const StadiumContour& contour, Eigen::MatrixXcd& f,
                Eigen::MatrixXcd& af) {
  const auto n = a.rows();
  f = Eigen::MatrixXcd::Zero(n, n);
  af = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t k = 0; k < contour.nodes.size(); ++k) {
    const cplx z = contour.nodes[k];
    const Eigen::MatrixXcd r = (a - z * id).partialPivLu().inverse();
    f += contour.weights[k] * r;
    af += (contour.weights[k] * z) * r;
  }
  // -(1/(2 pi i))
  const cplx scale = cplx{0.0, 1.0} / (2.0 * kPi);
  f *= scale;
  af *= scale;
}

}  // namespace

RieszResult projector_by_riesz(const FiberMatrix& matrix, double segment_end, double radius,
                               int nodes, const RieszOptions& options) {
  if (nodes < 128) throw InvalidArgument("Riesz quadrature needs at least 128 nodes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix.entries, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
  const StadiumContour probe = make_stadium(segment_end, radius, 16);
  for (double ev : es.eigenvalues()) {
    if (probe.distance(ev) < options.min_distance_fraction * radius) {
      std::ostringstream os;
      os << "eigenvalue " << ev << " lies within " << probe.distance(ev) << " of the contour";
      throw ContourTooClose(os.str());
    }
  }

  RieszResult result;
  Eigen::MatrixXcd f_prev, af_prev;
  riesz_sums(matrix.entries, make_stadium(segment_end, radius, nodes), f_prev, af_prev);
  for (int n = 2 * nodes; n <= options.max_nodes; n *= 2) {
    Eigen::MatrixXcd f, af;
    riesz_sums(matrix.entries, make_stadium(segment_end, radius, n), f, af);
    const double change = operator_norm(f - f_prev);
    result.projector = std::move(f);
    result.a_times_f = std::move(af);
    result.nodes = n;
    result.refinement_change = change;
    if (change < options.tolerance) return result;
    f_prev = result.projector;
  }
  std::ostringstream os;
  os << "Riesz projector still changed by " << result.refinement_change << " at " << result.nodes
     << " nodes";
  throw QuadratureNotConverged(os.str());
}

Eigen::MatrixXcd zero_mode_projector(const ModeSet& modes) {
  const auto n = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  const auto z = static_cast<Eigen::Index>(modes.zero_index());
  p(z, z) = 1.0;
  return p;
}

ThresholdReport threshold_report(const PeriodicCoefficient& coeff, const ModelParams& params,
                                 const ModeSet& modes, const RealVec& xi,
                                 const ThresholdOptions& options) {
  const double c0 = compute_c0(params);
  const double mu0 = effective_mu(coeff);
  const GapConstants gap = delta0_and_d0(params, c0, coeff);

  const FiberMatrix a = assemble_fiber_matrix(coeff, params, c0, modes, xi);
  const SpectralData spectral = eig_hermitian(a);

  ThresholdReport r;
  r.xi = xi;
  r.xi_norm = euclidean_norm(xi, params.dimension);
  r.lambda1 = spectral.eigenvalues[0];
  r.lambda2 = spectral.eigenvalues.size() > 1 ? spectral.eigenvalues[1]
                                              : std::numeric_limits<double>::infinity();
  r.inside_ball = r.xi_norm <= gap.delta0;

  double segment_end = gap.d0 / 3.0;
  double radius = gap.d0 / 3.0;
  if (!r.inside_ball) {
    const double g = r.lambda2 - r.lambda1;
    if (!(r.lambda2 >= gap.d0) || g < 1e-8) {
      std::ostringstream os;
      os << "|xi| = " << r.xi_norm << " is outside the delta0-ball (" << gap.delta0
         << ") and the bottom eigenvalue is not separated (lambda1 = " << r.lambda1
         << ", lambda2 = " << r.lambda2 << ", d0 = " << gap.d0 << ")";
      throw GapViolation(os.str());
    }
    segment_end = r.lambda1 + g / 3.0;
    radius = g / 3.0;
  }
  r.cutoff = segment_end;

  const Eigen::MatrixXcd f = projector_by_eig(spectral, segment_end);
  const Eigen::MatrixXcd af = r.lambda1 * f;
  if (options.cross_check) {
    const RieszResult riesz = projector_by_riesz(a, segment_end, radius, options.riesz_nodes / 2);
    r.riesz_agreement = operator_norm(riesz.projector - f);
    r.riesz_nodes = riesz.nodes;
    if (r.riesz_agreement > options.projector_tolerance) {
      std::ostringstream os;
      os << "Riesz and eigenvector projectors differ by " << r.riesz_agreement;
      throw BoundViolated(os.str());
    }
  }

  const Eigen::MatrixXcd p = zero_mode_projector(modes);
  const RhoValues rho = rho_and_rho_star(coeff, params, c0, xi);
  r.rho = rho.rho;
  r.rho_star = rho.rho_star;
  r.f_minus_p_norm = spectral_norm_hermitian(f - p);
  r.phi_norm = spectral_norm_hermitian(af - rho.rho * p);
  r.af_minus_effective_norm = spectral_norm_hermitian(af - (mu0 * v_alpha(params, c0, xi)) * p);
  return r;
}

}  // namespace lhom
