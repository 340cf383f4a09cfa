#include "lhom/fiber.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lhom/errors.hpp"
#include "lhom/oracle.hpp"

namespace lhom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |2 pi j + sign * xi|^alpha
double shifted_power(const LatticeVec& j, const RealVec& xi, double sign, double alpha, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double v = kTwoPi * j[i] + sign * xi[i];
    s += v * v;
  }
  return s == 0.0 ? 0.0 : std::pow(std::sqrt(s), alpha);
}

LatticeVec sub(const LatticeVec& a, const LatticeVec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

ModeSet::ModeSet(int dimension, int truncation)
    : dimension_(dimension), truncation_(truncation), side_(2 * truncation + 1) {
  if (dimension < 1 || dimension > kMaxDim) throw InvalidArgument("ModeSet dimension must be 1..3");
  if (truncation < 1) throw InvalidArgument("truncation N must be positive");
  std::size_t count = 1;
  for (int i = 0; i < dimension; ++i) count *= static_cast<std::size_t>(side_);
  modes_.reserve(count);
  LatticeVec n{};
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    for (int i = dimension - 1; i >= 0; --i) {
      n[i] = static_cast<int>(rem % side_) - truncation;
      rem /= side_;
    }
    modes_.push_back(n);
  }
  zero_index_ = *index_of(LatticeVec{});
}

std::optional<std::size_t> ModeSet::index_of(const LatticeVec& n) const {
  std::size_t idx = 0;
  for (int i = 0; i < dimension_; ++i) {
    if (std::abs(n[i]) > truncation_) return std::nullopt;
    idx = idx * side_ + static_cast<std::size_t>(n[i] + truncation_);
  }
  for (int i = dimension_; i < kMaxDim; ++i)
    if (n[i] != 0) return std::nullopt;
  return idx;
}

int default_truncation(int dimension) {
  switch (dimension) {
    case 1:
      return 32;
    case 2:
      return 8;
    default:
      return 4;
  }
}

void check_quasimomentum(const RealVec& xi, int dimension) {
  for (int i = 0; i < dimension; ++i)
    if (!(std::fabs(xi[i]) <= std::numbers::pi))
      throw InvalidArgument("quasimomentum component outside [-pi, pi]");
  for (int i = dimension; i < kMaxDim; ++i)
    if (xi[i] != 0.0) throw InvalidArgument("quasimomentum has components beyond the dimension");
}

FiberMatrix assemble_fiber_matrix(const PeriodicCoefficient& coeff, const ModelParams& params,
                                  double c0, const ModeSet& modes, const RealVec& xi) {
  const int d = params.dimension;
  if (coeff.dimension() != d || modes.dimension() != d)
    throw InvalidArgument("dimension mismatch between coefficient, modes and parameters");
  check_quasimomentum(xi, d);
  if (modes.truncation() < coeff.coupling_extent())
    throw TruncationTooSmall("truncation N=" + std::to_string(modes.truncation()) +
                             " is below the coupling extent " +
                             std::to_string(coeff.coupling_extent()) + " of the coefficient");

  const double a = params.alpha;
  const std::size_t size = modes.size();
  FiberMatrix f;
  f.xi = xi;
  f.alpha = a;
  f.c0 = c0;
  f.entries = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(size),
                                     static_cast<Eigen::Index>(size));

  for (const auto& [key, mu_hat] : coeff.modes()) {
    const LatticeVec shift{key.k[0] + key.l[0], key.k[1] + key.l[1], key.k[2] + key.l[2]};
    const cplx w = mu_hat * (0.5 * c0);
    const double p_l = shifted_power(key.l, xi, 0.0, a, d);
    const double p_k = shifted_power(key.k, xi, 0.0, a, d);
    const double cst = p_l + p_k;
    for (std::size_t row = 0; row < size; ++row) {
      const LatticeVec& m = modes[row];
      const auto col = modes.index_of(sub(m, shift));
      if (!col) continue;
      // n = m - (k+l): l + n = m - k.
      const double p1 = shifted_power(sub(key.l, m), xi, -1.0, a, d);
      const double p2 = shifted_power(sub(m, key.k), xi, 1.0, a, d);
      f.entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(*col)) +=
          w * ((p1 + p2) - cst);
    }
  }
  return f;
}

Eigen::VectorXd free_symbol(const ModelParams& params, double c0, const ModeSet& modes,
                            const RealVec& xi) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        c0 * shifted_power(modes[i], xi, 1.0, params.alpha, params.dimension);
  return v;
}

EffectiveFiberMatrix assemble_effective_fiber(const ModelParams& params, double c0, double mu_eff,
                                              const ModeSet& modes, const RealVec& xi) {
  check_quasimomentum(xi, params.dimension);
  EffectiveFiberMatrix e;
  e.xi = xi;
  e.diagonal.resize(static_cast<Eigen::Index>(modes.size()));
  const double scale = c0 * mu_eff;
  for (std::size_t i = 0; i < modes.size(); ++i)
    e.diagonal[static_cast<Eigen::Index>(i)] =
        scale * shifted_power(modes[i], xi, 1.0, params.alpha, params.dimension);
  return e;
}

RhoValues rho_and_rho_star(const PeriodicCoefficient& coeff, const ModelParams& params, double c0,
                           const RealVec& xi) {
  const int d = params.dimension;
  const double a = params.alpha;
  double rho = 0.0;
  for (const auto& [key, mu_hat] : coeff.modes()) {
    bool antidiagonal = true;
    for (int i = 0; i < d; ++i) antidiagonal = antidiagonal && key.k[i] == -key.l[i];
    if (!antidiagonal) continue;
    const double two_l = 2.0 * shifted_power(key.l, xi, 0.0, a, d);
    rho += mu_hat.real() * (shifted_power(key.l, xi, -1.0, a, d) +
                            shifted_power(key.l, xi, 1.0, a, d) - two_l);
  }
  rho *= 0.5 * c0;
  RhoValues r;
  r.rho = rho;
  r.rho_star = rho - effective_mu(coeff) * v_alpha(params, c0, xi);
  return r;
}

double hermitian_defect(const Eigen::MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
  return es.eigenvalues().minCoeff();
}

double spectral_norm_hermitian(const Eigen::MatrixXcd& hermitian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("Hermitian eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SandwichMargins sandwich_margins(const FiberMatrix& fiber, const PeriodicCoefficient& coeff,
                                 const ModelParams& params, const ModeSet& modes) {
  const Eigen::VectorXd a0 = free_symbol(params, fiber.c0, modes, fiber.xi);
  Eigen::MatrixXcd lower = fiber.entries;
  Eigen::MatrixXcd upper = -fiber.entries;
  lower.diagonal() -= (coeff.mu_minus() * a0).cast<cplx>();
  upper.diagonal() += (coeff.mu_plus() * a0).cast<cplx>();
  return {min_eigenvalue(lower), min_eigenvalue(upper)};
}

double conjugation_defect(const FiberMatrix& plus, const FiberMatrix& minus, const ModeSet& modes) {
  double worst = 0.0;
  const std::size_t size = modes.size();
  for (std::size_t i = 0; i < size; ++i) {
    const LatticeVec& m = modes[i];
    const std::size_t mi = *modes.index_of({-m[0], -m[1], -m[2]});
    for (std::size_t j = 0; j < size; ++j) {
      const LatticeVec& n = modes[j];
      const std::size_t nj = *modes.index_of({-n[0], -n[1], -n[2]});
      const cplx diff = minus.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                        std::conj(plus.entries(static_cast<Eigen::Index>(mi),
                                               static_cast<Eigen::Index>(nj)));
      worst = std::max(worst, std::abs(diff));
    }
  }
  return worst;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXcd& m) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(i, j).real(), m(i, j).imag());
      if (j) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

FormDifferenceReport form_difference_checks(const PeriodicCoefficient& coeff,
                                            const ModelParams& params, const ModeSet& modes,
                                            std::span<const RealVec> xi_list, int trials,
                                            std::uint64_t seed) {
  const double c0 = compute_c0(params);
  const double mu_plus = coeff.mu_plus();
  const FiberMatrix a0 = assemble_fiber_matrix(coeff, params, c0, modes, RealVec{});

  FormDifferenceReport report;
  report.operator_bound = params.alpha < 1.0;
  if (report.operator_bound) report.c1 = c1_quadrature(params).value;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(modes.size());
  std::vector<Eigen::VectorXcd> probes;
  if (!report.operator_bound) {
    if (trials < 1) throw InvalidArgument("form difference check needs at least one trial vector");
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXcd u(n);
      for (Eigen::Index i = 0; i < n; ++i) u[i] = cplx{normal(rng), normal(rng)};
      probes.push_back(std::move(u));
    }
  }

  for (const RealVec& xi : xi_list) {
    const FiberMatrix a = assemble_fiber_matrix(coeff, params, c0, modes, xi);
    const Eigen::MatrixXcd diff = a.entries - a0.entries;
    FormDifferenceEntry e;
    e.xi = xi;
    e.xi_norm = euclidean_norm(xi, params.dimension);
    if (report.operator_bound) {
      e.value = spectral_norm_hermitian(diff);
      e.bound = mu_plus * report.c1 * std::pow(e.xi_norm, params.alpha);
      e.ratio = e.bound > 0.0 ? e.value / e.bound : 0.0;
      if (e.value > e.bound * (1.0 + 1e-12) + 1e-13) {
        std::ostringstream os;
        os << "||A(xi)-A(0)|| = " << e.value << " exceeds mu_+ c1 |xi|^alpha = " << e.bound
           << " at |xi| = " << e.xi_norm;
        throw BoundViolated(os.str());
      }
    } else {
      double r = 0.0;
      for (const auto& u : probes) {
        const double num = std::abs(u.dot(diff * u));
        const double den = u.dot(a0.entries * u).real() + mu_plus * u.squaredNorm();
        r = std::max(r, num / den);
      }
      e.value = r;
      e.bound = theta(params.alpha, e.xi_norm);
      e.ratio = e.bound > 0.0 ? r / e.bound : 0.0;
    }
    report.entries.push_back(e);
  }

  if (report.operator_bound) {
    report.passed = true;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& e : report.entries) {
      if (e.xi_norm == 0.0) continue;
      lo = std::min(lo, e.ratio);
      hi = std::max(hi, e.ratio);
    }
    report.ratio_spread = (hi > 0.0 && lo > 0.0) ? hi / lo : 0.0;
    report.passed = hi > 0.0 && report.ratio_spread <= 10.0;
    if (!report.passed) {
      std::ostringstream os;
      os << "r(xi)/Theta(xi) spread " << report.ratio_spread << " exceeds 10";
      throw BoundViolated(os.str());
    }
  }
  return report;
}

}  // namespace lhom
