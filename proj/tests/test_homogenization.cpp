#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "doctest.h"
#include "lhom/errors.hpp"
#include "lhom/homogenization.hpp"

using namespace lhom;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense route: explicit inverses and the largest singular value.
double dense_resolvent_gap(const PeriodicCoefficient& coeff, const ModelParams& params, const ModeSet& modes,
                           const RealVec& xi, double eps) {
  const double c0 = compute_c0(params);
  const double s = std::pow(eps, params.alpha);
  const auto a = assemble_fiber_matrix(coeff, params, c0, modes, xi).entries;
  const auto n = a.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd a0 = Eigen::MatrixXcd::Zero(n, n);
  const double mu0 = coeff.amplitude({}, {}).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    double q = 0.0;
    for (int k = 0; k < params.dimension; ++k) q += std::pow(2 * kPi * modes[i][k] + xi[k], 2);
    a0(i, i) = mu0 * c0 * std::pow(q, params.alpha / 2);
  }
  const Eigen::MatrixXcd diff = (a + s * id).inverse() - (a0 + s * id).inverse();
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(diff).singularValues()[0];
}

std::vector<double> study_eps() { return log_spaced(1e-3, 1e-1, 12); }

}  // namespace

TEST_CASE("xi grid invariants") {
  for (int d : {1, 2, 3}) {
    const auto spec = default_xi_grid(d);
    const XiGrid g = build_xi_grid(d, spec);
    CHECK(g.dimension == d);
    CHECK(g.points.front() == RealVec{});
    std::set<RealVec> unique(g.points.begin(), g.points.end());
    CHECK(unique.size() == g.points.size());
    for (const auto& p : g.points)
      for (int i = 0; i < d; ++i) {
        CHECK(p[i] >= -kPi);
        CHECK(p[i] < kPi);
      }
    CHECK(build_xi_grid(d, spec).points == g.points);
    // radial refinement reaches 1e-4 along the first axis
    CHECK(unique.count(RealVec{1e-4, 0.0, 0.0}) == 1);
  }
  const auto g1 = build_xi_grid(1, default_xi_grid(1));
  CHECK(g1.points.size() > 64);
  CHECK(build_xi_grid(1, doubled(default_xi_grid(1))).points.size() > g1.points.size());
  CHECK_THROWS_AS(build_xi_grid(1, XiGridSpec{.radial_max_exp = 1.0}), InvalidArgument);
}

TEST_CASE("ball grid stays inside the radius") {
  const auto g = ball_grid(2, 0.03, -4.0, 6);
  CHECK(g.points.front() == RealVec{});
  double largest = 0.0;
  for (const auto& p : g.points) largest = std::max(largest, euclidean_norm(p, 2));
  CHECK(largest == doctest::Approx(0.03));
}

TEST_CASE("rate functions") {
  CHECK(rate_function(0.5, 0.01) == doctest::Approx(0.1));
  CHECK(rate_function(1.5, 0.01) == doctest::Approx(0.1));
  CHECK(rate_function(1.0, std::exp(-3.0)) == doctest::Approx(std::exp(-3.0) * 16.0));
  CHECK(near_singular_alpha(1.0));
  CHECK(near_singular_alpha(1.95));
  CHECK_FALSE(near_singular_alpha(1.5));
  CHECK_FALSE(near_singular_alpha(0.95));
}

TEST_CASE("fit_rate on synthetic data") {
  const auto eps = study_eps();
  std::vector<std::pair<double, double>> pts;
  for (double e : eps) pts.push_back({e, std::sqrt(e)});
  auto fit = fit_rate(pts, 0.5);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(fit.log_corrected_slope.has_value());

  pts.clear();
  for (double e : eps) pts.push_back({e, 3.0 * e * std::pow(1.0 + std::abs(std::log(e)), 2)});
  fit = fit_rate(pts, 1.0);
  REQUIRE(fit.log_corrected_slope.has_value());
  CHECK(std::abs(*fit.log_corrected_slope - 1.0) <= 1e-6);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  pts.clear();
  for (double e : eps) pts.push_back({e, std::sqrt(e) * (1.0 + 0.01 * noise(rng))});
  fit = fit_rate(pts, 0.5);
  CHECK(fit.slope >= 0.48);
  CHECK(fit.slope <= 0.52);
}

TEST_CASE("fit_rate degeneracies") {
  const auto eps = study_eps();
  std::vector<std::pair<double, double>> flat;
  for (double e : eps) flat.push_back({e, 0.25});
  CHECK_THROWS_AS(fit_rate(flat, 0.5), DegenerateFit);
  std::vector<std::pair<double, double>> sparse;
  for (std::size_t i = 0; i < eps.size(); ++i) sparse.push_back({eps[i], i < 5 ? 0.0 : eps[i]});
  CHECK_THROWS_AS(fit_rate(sparse, 0.5), DegenerateFit);
}

TEST_CASE("fiber resolvent difference against dense inverses") {
  const auto t2 = reference::cosine_product(1);
  const auto t1 = reference::cosine_difference(1);
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto params = ModelParams::make(1, alpha);
    const ModeSet modes(1, 12);
    for (double x : {0.0, 0.003, 0.2, -1.7}) {
      for (double eps : {1e-3, 1e-2, 0.3}) {
        for (const auto* c : {&t1, &t2}) {
          const double fast = fiber_resolvent_diff(*c, params, modes, {x, 0, 0}, eps);
          const double dense = dense_resolvent_gap(*c, params, modes, {x, 0, 0}, eps);
          CAPTURE(alpha);
          CAPTURE(x);
          CAPTURE(eps);
          // Both routes carry an absolute error near ||A|| * 1e-16 / (lambda_1 + s)^2 in the
          // resolvent entries, up to 1e-6 relative here when s = eps^alpha is tiny.
          CHECK(fast == doctest::Approx(dense).epsilon(1e-5));
          CHECK(std::pow(eps, alpha) * fast <= 2.0);
        }
      }
    }
  }
}

TEST_CASE("fiber resolvent difference examples") {
  const auto params = ModelParams::make(1, 0.5);
  const ModeSet modes(1, 32);
  for (double x : {0.0, 0.4, -3.0})
    for (double eps : {1e-3, 0.1}) CHECK(fiber_resolvent_diff(reference::constant(1), params, modes, {x, 0, 0}, eps) == 0.0);

  const auto t2 = certify(reference::cosine_product(1), 256);
  const double bound = 2.0 / (t2.mu_minus() * compute_c0(params) * std::pow(kPi, 0.5));
  for (double eps : {1e-3, 1e-2, 1e-1}) CHECK(fiber_resolvent_diff(t2, params, modes, {}, eps) <= bound);

  const double first = fiber_resolvent_diff(t2, params, modes, {0.05, 0, 0}, 1e-2);
  const double second = fiber_resolvent_diff(t2, params, modes, {0.05, 0, 0}, 1e-2);
  CHECK(first == second);
  CHECK_THROWS_AS(fiber_resolvent_diff(t2, params, modes, {}, 0.0), InvalidArgument);
}

TEST_CASE("threshold resolvent difference for constant mu") {
  const auto params = ModelParams::make(1, 0.5);
  const auto t0 = certify(reference::constant(1, 1.3), 256);
  const ModeSet modes(1, 16);
  const double c0 = compute_c0(params);
  const double delta0 = theory_constants(params, t0).delta0;
  for (double x : {0.0, 0.5 * delta0, delta0}) {
    for (double eps : {1e-3, 1e-1, 10.0}) {
      const double s = std::sqrt(eps);
      double expected = 0.0;
      for (std::size_t i = 0; i < modes.size(); ++i) {
        if (i == modes.zero_index()) continue;
        expected = std::max(expected, 1.0 / (1.3 * c0 * std::sqrt(std::abs(2 * kPi * modes[i][0] + x)) + s));
      }
      const double got = threshold_resolvent_diff(t0, params, modes, {x, 0, 0}, eps);
      CHECK(got == doctest::Approx(expected).epsilon(1e-13));
      CHECK(got <= 1.0 / (1.3 * c0 * std::sqrt(kPi)));
      CHECK(got <= 2.0 / s);
    }
  }
  CHECK_THROWS_AS(threshold_resolvent_diff(t0, params, modes, {1.1 * delta0, 0, 0}, 0.1), InvalidArgument);
}

TEST_CASE("threshold resolvent difference bounded by twice the resolvent norm") {
  const auto params = ModelParams::make(1, 0.5);
  const auto t2 = certify(reference::cosine_product(1), 256);
  const ModeSet modes(1, 32);
  const double delta0 = theory_constants(params, t2).delta0;
  for (double x : {0.0, 0.3 * delta0, delta0})
    for (double eps : {1e-3, 1e-2, 1e-1}) {
      const double v = threshold_resolvent_diff(t2, params, modes, {x, 0, 0}, eps);
      CHECK(v >= 0.0);
      CHECK(v <= 2.0 / std::sqrt(eps));
    }
}

TEST_CASE("constant coefficient study is exact") {
  const auto params = ModelParams::make(1, 0.5);
  const auto grid = build_xi_grid(1, default_xi_grid(1));
  const auto eps = study_eps();
  const auto r = discrepancy_study(reference::constant(1), params, ModeSet(1, 16), grid, eps, {});
  CHECK(r.exact);
  CHECK_FALSE(r.fit.has_value());
  CHECK(r.passed());
  for (double d : r.discrepancies) CHECK(d == 0.0);
  std::ostringstream os;
  write_rate_csv(os, r, "abc");
  CHECK(os.str().rfind("# config_digest=abc\nepsilon,discrepancy,rate_bound,bound_ratio,argmax_xi_norm\n", 0) == 0);
  CHECK(os.str().find("fitted_slope,exact\n") != std::string::npos);
  CHECK(os.str().find("truncation_stability,0\n") != std::string::npos);
}

TEST_CASE("study input validation") {
  const auto params = ModelParams::make(1, 0.5);
  const auto grid = build_xi_grid(1, default_xi_grid(1));
  const auto c = reference::constant(1);
  const ModeSet modes(1, 4);
  CHECK_THROWS_AS(discrepancy_study(c, params, modes, grid, log_spaced(1e-3, 1e-1, 7), {}), InvalidArgument);
  CHECK_THROWS_AS(discrepancy_study(c, params, modes, grid, log_spaced(1e-2, 1e-1, 12), {}), InvalidArgument);
  std::vector<double> uneven = study_eps();
  uneven[3] *= 1.1;
  CHECK_THROWS_AS(discrepancy_study(c, params, modes, grid, uneven, {}), InvalidArgument);
}

TEST_CASE("study scaling identity, determinism and ordering") {
  const auto params = ModelParams::make(1, 0.5);
  const auto t2 = certify(reference::cosine_product(1), 256);
  XiGridSpec spec = default_xi_grid(1);
  spec.points_per_dim = 16;
  spec.radial_per_decade = 3;
  const auto grid = build_xi_grid(1, spec);
  const ModeSet modes(1, 16);
  auto eps = study_eps();
  std::reverse(eps.begin(), eps.end());

  StudyOptions one;
  one.workers = 1;
  one.truncation_check = false;
  StudyOptions many = one;
  many.workers = 4;
  const auto a = discrepancy_study(t2, params, modes, grid, eps, one);
  const auto b = discrepancy_study(t2, params, modes, grid, eps, many);
  CHECK(a.discrepancies == b.discrepancies);
  CHECK(a.argmax_xi == b.argmax_xi);
  CHECK(std::is_sorted(a.epsilons.begin(), a.epsilons.end(), std::greater<>()));
  CHECK_FALSE(a.truncation_stability.has_value());

  for (std::size_t j = 0; j < a.epsilons.size(); ++j) {
    const double s = std::pow(a.epsilons[j], params.alpha);
    CHECK(a.discrepancies[j] == discrepancy_at_spectral_parameter(t2, params, modes, grid, s, 2));
    CHECK(a.bound_ratio[j] == doctest::Approx(a.discrepancies[j] / rate_function(0.5, a.epsilons[j])));
  }
  CHECK(a.discrepancies.back() <= 0.2 * a.discrepancies.front());
}

TEST_CASE("near-singular alpha widens the slope margin") {
  const auto t2 = certify(reference::cosine_product(1), 256);
  XiGridSpec spec = default_xi_grid(1);
  spec.points_per_dim = 8;
  spec.radial_per_decade = 2;
  const auto grid = build_xi_grid(1, spec);
  StudyOptions opt;
  opt.truncation_check = false;
  const auto r = discrepancy_study(t2, ModelParams::make(1, 1.0), ModeSet(1, 8), grid, study_eps(), opt);
  CHECK_FALSE(r.warning.empty());
  CHECK(r.slope_threshold == doctest::Approx(1.0 - 0.15));
  REQUIRE(r.fit.has_value());
  CHECK(r.fit->log_corrected_slope.has_value());
  CHECK(r.fitted_slope() == *r.fit->log_corrected_slope);
}

TEST_CASE("coarse truncation is flagged as unstable") {
  // High lattice modes with N at the bare coupling extent.
  const auto c = certify(reference::random_band_limited(1, 3, 4, 3, 0.6), 256);
  REQUIRE(c.coupling_extent() == 2);
  XiGridSpec spec = default_xi_grid(1);
  spec.points_per_dim = 8;
  spec.radial_per_decade = 2;
  const auto grid = build_xi_grid(1, spec);
  const auto params = ModelParams::make(1, 0.5);
  const ModeSet modes(1, c.coupling_extent());
  StudyOptions opt;
  opt.strict = false;
  const auto r = discrepancy_study(c, params, modes, grid, study_eps(), opt);
  REQUIRE(r.truncation_stability.has_value());
  CHECK(*r.truncation_stability > 0.05);
  CHECK_FALSE(r.truncation_ok);
  CHECK_FALSE(r.passed());
  CHECK(r.refined_discrepancies.size() == r.discrepancies.size());
  opt.strict = true;
  CHECK_THROWS_AS(discrepancy_study(c, params, modes, grid, study_eps(), opt), TruncationUnstable);
}
