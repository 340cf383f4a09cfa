#include "lhom/homogenization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/Eigenvalues>

#include "lhom/errors.hpp"
#include "lhom/kernels.hpp"
#include "lhom/parallel.hpp"
#include "lhom/spectral.hpp"

namespace lhom {

namespace {

constexpr double kPi = std::numbers::pi;

// Unit directions: +-e_i, then every sign pattern of (1,..,1)/sqrt(d) for d >= 2.
std::vector<RealVec> refinement_directions(int d) {
  std::vector<RealVec> dirs;
  for (int i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      RealVec v{};
      v[i] = sgn;
      dirs.push_back(v);
    }
  }
  if (d >= 2) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int mask = 0; mask < (1 << d); ++mask) {
      RealVec v{};
      for (int i = 0; i < d; ++i) v[i] = ((mask >> i) & 1) ? -scale : scale;
      dirs.push_back(v);
    }
  }
  return dirs;
}

std::vector<double> radii(double min_exp, double max_exp, int per_decade) {
  const int steps = std::max(1, static_cast<int>(std::ceil((max_exp - min_exp) * per_decade)));
  std::vector<double> r;
  for (int i = 0; i <= steps; ++i)
    r.push_back(std::pow(10.0, min_exp + (max_exp - min_exp) * i / steps));
  return r;
}

class GridBuilder {
 public:
  explicit GridBuilder(int d) { grid_.dimension = d; }
  void add(RealVec p) {
    for (int i = 0; i < grid_.dimension; ++i) {
      if (p[i] == 0.0) p[i] = 0.0;  // drop negative zero
      if (p[i] < -kPi || p[i] >= kPi) return;
    }
    if (seen_.insert(p).second) grid_.points.push_back(p);
  }
  XiGrid take() { return std::move(grid_); }

 private:
  XiGrid grid_;
  std::set<RealVec> seen_;
};

void validate_epsilons(std::span<const double> eps) {
  if (eps.size() < 8) throw InvalidArgument("a rate study needs at least 8 epsilon values");
  for (double e : eps)
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgument("epsilon values must be positive");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (std::log10(*hi / *lo) < 1.5 - 1e-12)
    throw InvalidArgument("epsilon values must span at least 1.5 decades");
  std::vector<double> sorted(eps.begin(), eps.end());
  std::sort(sorted.begin(), sorted.end());
  const double step = std::log(sorted.back() / sorted.front()) / (sorted.size() - 1);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double gap = std::log(sorted[i] / sorted[i - 1]);
    if (std::abs(gap - step) > 1e-6 * std::max(1.0, step))
      throw InvalidArgument("epsilon values must be log-spaced");
  }
}

template <class Probe>
GridSup reduce_sup(const XiGrid& grid, std::span<const double> s, int workers, Probe&& probe) {
  const auto per_xi = parallel_map(grid.points.size(), workers, probe);
  GridSup out;
  out.values.assign(s.size(), 0.0);
  out.argmax.assign(s.size(), 0);
  for (std::size_t j = 0; j < s.size(); ++j) {
    double best = -1.0;
    for (std::size_t i = 0; i < per_xi.size(); ++i) {
      if (per_xi[i][j] > best) {
        best = per_xi[i][j];
        out.argmax[j] = i;
      }
    }
    out.values[j] = best;
  }
  return out;
}

double relative_change(std::span<const double> base, std::span<const double> other) {
  double worst = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double diff = std::abs(other[i] - base[i]);
    if (diff == 0.0) continue;
    worst = std::max(worst, base[i] > 0.0 ? diff / base[i] : std::numeric_limits<double>::infinity());
  }
  return worst;
}

}  // namespace

XiGridSpec default_xi_grid(int dimension) {
  XiGridSpec spec;
  spec.points_per_dim = dimension == 1 ? 64 : dimension == 2 ? 12 : 4;
  return spec;
}

XiGridSpec doubled(const XiGridSpec& spec) {
  XiGridSpec out = spec;
  out.points_per_dim *= 2;
  out.radial_per_decade *= 2;
  return out;
}

XiGrid build_xi_grid(int dimension, const XiGridSpec& spec) {
  if (dimension < 1 || dimension > kMaxDim) throw InvalidArgument("dimension must be 1..3");
  if (spec.points_per_dim < 1) throw InvalidArgument("points_per_dim must be positive");
  if (spec.radial_per_decade < 0) throw InvalidArgument("radial_per_decade must be >= 0");
  if (!(spec.radial_min_exp < spec.radial_max_exp) || spec.radial_max_exp >= std::log10(kPi))
    throw InvalidArgument("radial exponents must satisfy min < max < log10(pi)");

  GridBuilder b(dimension);
  b.add(RealVec{});

  const int P = spec.points_per_dim;
  std::size_t total = 1;
  for (int i = 0; i < dimension; ++i) total *= static_cast<std::size_t>(P);
  for (std::size_t idx = 0; idx < total; ++idx) {
    RealVec p{};
    std::size_t rem = idx;
    for (int i = dimension - 1; i >= 0; --i) {
      p[i] = -kPi + 2.0 * kPi * static_cast<double>(rem % P) / P;
      rem /= P;
    }
    b.add(p);
  }

  if (spec.radial_per_decade > 0) {
    const auto rs = radii(spec.radial_min_exp, spec.radial_max_exp, spec.radial_per_decade);
    const auto dirs = refinement_directions(dimension);
    for (double r : rs)
      for (const auto& u : dirs) b.add({r * u[0], r * u[1], r * u[2]});
    if (spec.boundary_refinement) {
      for (double r : rs) {
        for (int i = 0; i < dimension; ++i) {
          for (double sgn : {1.0, -1.0}) {
            RealVec p{};
            p[i] = sgn * (kPi - r);
            b.add(p);
          }
        }
      }
    }
  }
  return b.take();
}

XiGrid ball_grid(int dimension, double radius, double min_exp, int per_decade) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
  GridBuilder b(dimension);
  b.add(RealVec{});
  const auto dirs = refinement_directions(dimension);
  std::vector<double> rs;
  if (std::log10(radius) > min_exp) rs = radii(min_exp, std::log10(radius), std::max(1, per_decade));
  rs.push_back(radius);
  for (double r : rs)
    for (const auto& u : dirs) b.add({r * u[0], r * u[1], r * u[2]});
  return b.take();
}

bool near_singular_alpha(double alpha) {
  return (alpha > 0.95 && alpha < 1.05) || (alpha > 1.90 && alpha < 2.00);
}

double rate_function(double alpha, double eps) {
  if (is_alpha_one(alpha)) {
    const double t = 1.0 + std::abs(std::log(eps));
    return eps * t * t;
  }
  return alpha < 1.0 ? std::pow(eps, alpha) : std::pow(eps, 2.0 - alpha);
}

ResolventProbe::ResolventProbe(const PeriodicCoefficient& coeff, const ModelParams& params,
                               double c0, double mu_eff, const ModeSet& modes, const RealVec& xi) {
  const FiberMatrix a = assemble_fiber_matrix(coeff, params, c0, modes, xi);
  effective_ = assemble_effective_fiber(params, c0, mu_eff, modes, xi).diagonal;
  effective_threshold_ = mu_eff * v_alpha(params, c0, xi);
  zero_index_ = static_cast<Eigen::Index>(modes.zero_index());

  const Eigen::MatrixXcd& m = a.entries;
  diagonal_ = true;
  for (Eigen::Index j = 0; j < m.cols() && diagonal_; ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != cplx{}) {
        diagonal_ = false;
        break;
      }
  if (diagonal_) {
    eigenvalues_ = m.diagonal().real();
  } else {
    SpectralData sd = eig_hermitian(m);
    eigenvalues_ = std::move(sd.eigenvalues);
    eigenvectors_ = std::move(sd.eigenvectors);
  }
}

double ResolventProbe::fiber_difference(double s) const {
  if (!(s > 0.0)) throw InvalidArgument("spectral parameter must be positive");
  const Eigen::Index n = eigenvalues_.size();
  if (diagonal_) {
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = 1.0 / (eigenvalues_[i] + s) - 1.0 / (effective_[i] + s);
    return kernels::max_abs({d.data(), static_cast<std::size_t>(n)});
  }
  const Eigen::VectorXd inv = (eigenvalues_.array() + s).inverse();
  Eigen::MatrixXcd diff = eigenvectors_ * inv.asDiagonal() * eigenvectors_.adjoint();
  diff.diagonal().array() -= (effective_.array() + s).inverse().cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("resolvent difference eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return kernels::max_abs({ev.data(), static_cast<std::size_t>(ev.size())});
}

double ResolventProbe::threshold_difference(double s) const {
  if (!(s > 0.0)) throw InvalidArgument("spectral parameter must be positive");
  const Eigen::Index n = eigenvalues_.size();
  const double rank_one = 1.0 / (effective_threshold_ + s);
  if (diagonal_) {
    Eigen::VectorXd d = (eigenvalues_.array() + s).inverse();
    d[zero_index_] -= rank_one;
    return kernels::max_abs({d.data(), static_cast<std::size_t>(n)});
  }
  const Eigen::VectorXd inv = (eigenvalues_.array() + s).inverse();
  Eigen::MatrixXcd diff = eigenvectors_ * inv.asDiagonal() * eigenvectors_.adjoint();
  diff(zero_index_, zero_index_) -= rank_one;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("resolvent difference eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return kernels::max_abs({ev.data(), static_cast<std::size_t>(ev.size())});
}

double fiber_resolvent_diff(const PeriodicCoefficient& coeff, const ModelParams& params,
                            const ModeSet& modes, const RealVec& xi, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const double c0 = compute_c0(params);
  const ResolventProbe probe(coeff, params, c0, effective_mu(coeff), modes, xi);
  return probe.fiber_difference(std::pow(epsilon, params.alpha));
}

double threshold_resolvent_diff(const PeriodicCoefficient& coeff, const ModelParams& params,
                                const ModeSet& modes, const RealVec& xi, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  const TheoryConstants tc = theory_constants(params, coeff);
  if (euclidean_norm(xi, params.dimension) > tc.delta0 * (1.0 + 1e-12))
    throw InvalidArgument("threshold comparison requires |xi| <= delta0");
  const ResolventProbe probe(coeff, params, tc.c0, tc.mu_eff, modes, xi);
  return probe.threshold_difference(std::pow(epsilon, params.alpha));
}

GridSup fiber_sup(const PeriodicCoefficient& coeff, const ModelParams& params, const ModeSet& modes,
                  const XiGrid& grid, std::span<const double> spectral_params, int workers) {
  const double c0 = compute_c0(params);
  const double mu_eff = effective_mu(coeff);
  return reduce_sup(grid, spectral_params, workers, [&](std::size_t i) {
    const ResolventProbe probe(coeff, params, c0, mu_eff, modes, grid.points[i]);
    std::vector<double> v(spectral_params.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = probe.fiber_difference(spectral_params[j]);
    return v;
  });
}

GridSup threshold_sup(const PeriodicCoefficient& coeff, const ModelParams& params,
                      const ModeSet& modes, const XiGrid& grid,
                      std::span<const double> spectral_params, int workers) {
  const double c0 = compute_c0(params);
  const double mu_eff = effective_mu(coeff);
  return reduce_sup(grid, spectral_params, workers, [&](std::size_t i) {
    const ResolventProbe probe(coeff, params, c0, mu_eff, modes, grid.points[i]);
    std::vector<double> v(spectral_params.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = probe.threshold_difference(spectral_params[j]);
    return v;
  });
}

double discrepancy_at_spectral_parameter(const PeriodicCoefficient& coeff,
                                         const ModelParams& params, const ModeSet& modes,
                                         const XiGrid& grid, double s, int workers) {
  const double one[] = {s};
  return s * fiber_sup(coeff, params, modes, grid, one, workers).values[0];
}

RateFit fit_loglog(std::span<const double> abscissa, std::span<const double> values) {
  if (abscissa.size() != values.size()) throw InvalidArgument("fit inputs differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0 && abscissa[i] > 0.0) {
      x.push_back(std::log(abscissa[i]));
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() < 2) throw DegenerateFit("fewer than two positive points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DegenerateFit("abscissae are all equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  const double ss_res = syy - fit.slope * sxy;
  fit.r_squared = syy > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
  return fit;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points, double alpha) {
  std::vector<double> eps, val;
  for (const auto& [e, v] : points) {
    if (v > 0.0) {
      eps.push_back(e);
      val.push_back(v);
    }
  }
  if (eps.size() < 8) throw DegenerateFit("fewer than 8 positive points");
  if (std::all_of(val.begin(), val.end(), [&](double v) { return v == val.front(); }))
    throw DegenerateFit("all values are equal");
  RateFit fit = fit_loglog(eps, val);
  if (is_alpha_one(alpha)) {
    std::vector<double> corrected(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) corrected[i] = rate_function(1.0, eps[i]);
    const RateFit lc = fit_loglog(corrected, val);
    fit.log_corrected_slope = lc.slope;
    fit.log_corrected_r_squared = lc.r_squared;
  }
  return fit;
}

double RateStudyResult::fitted_slope() const {
  if (!fit) return std::numeric_limits<double>::quiet_NaN();
  return fit->log_corrected_slope ? *fit->log_corrected_slope : fit->slope;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw InvalidArgument("invalid log-spaced range");
  std::vector<double> v(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) v[i] = std::exp(a + (b - a) * i / (count - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

RateStudyResult discrepancy_study(const PeriodicCoefficient& coeff, const ModelParams& params,
                                  const ModeSet& modes, const XiGrid& grid,
                                  std::span<const double> epsilons, const StudyOptions& options) {
  params.validate();
  validate_epsilons(epsilons);
  if (grid.points.empty()) throw InvalidArgument("empty quasimomentum grid");

  RateStudyResult r;
  r.alpha = params.alpha;
  r.truncation = modes.truncation();
  r.epsilons.assign(epsilons.begin(), epsilons.end());
  std::sort(r.epsilons.begin(), r.epsilons.end(), std::greater<>());

  std::vector<double> s(r.epsilons.size());
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::pow(r.epsilons[j], params.alpha);

  const GridSup sup = fiber_sup(coeff, params, modes, grid, s, options.workers);
  const std::size_t n = s.size();
  r.discrepancies.resize(n);
  r.argmax_xi.resize(n);
  r.argmax_xi_norm.resize(n);
  r.rate_bound.resize(n);
  r.bound_ratio.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.discrepancies[j] = s[j] * sup.values[j];
    r.argmax_xi[j] = grid.points[sup.argmax[j]];
    r.argmax_xi_norm[j] = euclidean_norm(r.argmax_xi[j], params.dimension);
    r.rate_bound[j] = rate_function(params.alpha, r.epsilons[j]);
    r.bound_ratio[j] = r.discrepancies[j] / r.rate_bound[j];
  }

  r.exact = std::all_of(r.discrepancies.begin(), r.discrepancies.end(),
                        [](double v) { return v == 0.0; });
  r.expected_exponent = is_alpha_one(params.alpha) ? 1.0
                        : params.alpha < 1.0       ? params.alpha
                                                   : 2.0 - params.alpha;
  double margin = options.slope_margin;
  if (near_singular_alpha(params.alpha)) {
    margin += 0.05;
    r.warning = "alpha is close to a value where the rate constants blow up; slope tolerance widened by 0.05";
  }
  r.slope_threshold = r.expected_exponent - margin;

  r.bounded_ok = std::all_of(r.discrepancies.begin(), r.discrepancies.end(),
                             [](double v) { return v >= 0.0 && v <= 2.0; });
  r.decay_ok = r.discrepancies.back() <= 0.2 * r.discrepancies.front();

  if (!r.exact) {
    std::vector<std::pair<double, double>> pts(n);
    for (std::size_t j = 0; j < n; ++j) pts[j] = {r.epsilons[j], r.discrepancies[j]};
    r.fit = fit_rate(pts, params.alpha);
    r.slope_ok = r.fitted_slope() >= r.slope_threshold;
    const auto [lo, hi] = std::minmax_element(r.bound_ratio.begin(), r.bound_ratio.end());
    r.ratio_spread = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    r.ratio_ok = r.ratio_spread <= 10.0;
  } else {
    r.ratio_spread = 1.0;
  }

  if (options.truncation_check) {
    const ModeSet refined(modes.dimension(), 2 * modes.truncation());
    const GridSup sup2 = fiber_sup(coeff, params, refined, grid, s, options.workers);
    r.refined_discrepancies.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.refined_discrepancies[j] = s[j] * sup2.values[j];
    r.truncation_stability = relative_change(r.discrepancies, r.refined_discrepancies);
    r.truncation_ok = *r.truncation_stability <= 0.05;
  }

  if (options.grid_check) {
    if (!options.grid_spec) throw InvalidArgument("grid check needs the grid specification");
    const XiGrid fine = build_xi_grid(params.dimension, doubled(*options.grid_spec));
    const GridSup sup2 = fiber_sup(coeff, params, modes, fine, s, options.workers);
    std::vector<double> d2(n);
    for (std::size_t j = 0; j < n; ++j) d2[j] = s[j] * sup2.values[j];
    r.grid_stability = relative_change(r.discrepancies, d2);
    r.grid_ok = *r.grid_stability < 0.02;
  }

  if (options.strict && !r.truncation_ok) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "discrepancy changes by %.3g under N -> 2N (limit 0.05)",
                  *r.truncation_stability);
    throw TruncationUnstable(buf);
  }
  return r;
}

void write_rate_csv(std::ostream& os, const RateStudyResult& r, const std::string& digest) {
  char buf[512];
  os << "# config_digest=" << digest << "\n";
  os << "epsilon,discrepancy,rate_bound,bound_ratio,argmax_xi_norm\n";
  for (std::size_t j = 0; j < r.epsilons.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epsilons[j],
                  r.discrepancies[j], r.rate_bound[j], r.bound_ratio[j], r.argmax_xi_norm[j]);
    os << buf;
  }
  auto row = [&](const char* name, std::optional<double> v, const char* missing) {
    if (v) {
      std::snprintf(buf, sizeof buf, "%s,%.17g\n", name, *v);
      os << buf;
    } else {
      os << name << "," << missing << "\n";
    }
  };
  if (r.exact) {
    row("fitted_slope", std::nullopt, "exact");
    row("r_squared", std::nullopt, "exact");
  } else {
    row("fitted_slope", r.fit ? std::optional(r.fit->slope) : std::nullopt, "none");
    row("r_squared", r.fit ? std::optional(r.fit->r_squared) : std::nullopt, "none");
    if (r.fit && r.fit->log_corrected_slope) {
      row("log_corrected_slope", r.fit->log_corrected_slope, "none");
      row("log_corrected_r_squared", r.fit->log_corrected_r_squared, "none");
    }
  }
  row("truncation_stability", r.truncation_stability, "skipped");
}

}  // namespace lhom
