#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lhom/coefficient.hpp"
#include "lhom/errors.hpp"

using namespace lhom;

namespace {
constexpr double kPi = std::numbers::pi;

PeriodicCoefficient make(int d, std::initializer_list<std::pair<ModeKey, cplx>> modes) {
  PeriodicCoefficient::ModeMap m;
  for (const auto& [k, v] : modes) m[k] = v;
  return PeriodicCoefficient(d, m);
}
}  // namespace

TEST_CASE("model parameters are range checked") {
  CHECK_NOTHROW(ModelParams::make(1, 0.5));
  CHECK_NOTHROW(ModelParams::make(3, 1.99));
  CHECK_THROWS_AS(ModelParams::make(0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(ModelParams::make(4, 1.0), InvalidArgument);
  CHECK_THROWS_AS(ModelParams::make(1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ModelParams::make(1, 2.0), InvalidArgument);
  CHECK(ModelParams::make(2, 1.5).gamma() == doctest::Approx(0.75));
}

TEST_CASE("c0 closed form at alpha = 1") {
  CHECK(compute_c0(ModelParams::make(1, 1.0)) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(compute_c0(ModelParams::make(2, 1.0)) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  // d = 3: pi^{3/2} * 2 sqrt(pi) / (2 * Gamma(2)) = pi^2
  CHECK(compute_c0(ModelParams::make(3, 1.0)) == doctest::Approx(kPi * kPi).epsilon(1e-14));
}

TEST_CASE("c0 at alpha = 0.5, d = 1 against the series value") {
  // pi^{1/2} Gamma(1/4)... written through |Gamma(-1/4)| = 4 Gamma(3/4)
  const double expected = std::sqrt(kPi) * 4.0 * std::tgamma(0.75) / (std::sqrt(2.0) * std::tgamma(0.75));
  CHECK(compute_c0(ModelParams::make(1, 0.5)) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("theta modulus") {
  CHECK(theta(0.5, 0.04) == doctest::Approx(0.2));
  CHECK(theta(1.0, std::exp(-2.0)) == doctest::Approx(std::exp(-2.0) * 3.0));
  CHECK(theta(1.5, 0.3) == doctest::Approx(0.3));
  CHECK(is_alpha_one(1.0));
  CHECK_FALSE(is_alpha_one(1.0 + 1e-9));
}

TEST_CASE("constant coefficient certifies exactly") {
  const auto rep = validate_coefficient(reference::constant(1, 1.0), 256);
  CHECK(rep.mu_minus == 1.0);
  CHECK(rep.mu_plus == 1.0);
  CHECK(rep.margin == 0.0);
  const auto c = certify(reference::constant(2, 2.5), 64);
  CHECK(c.mu_minus() == 2.5);
  CHECK(effective_mu(c) == 2.5);
}

TEST_CASE("cosine product bounds bracket [0.5, 1.5]") {
  const auto rep = validate_coefficient(reference::cosine_product(1), 256);
  CHECK(rep.grid_min == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.grid_max == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rep.mu_minus <= 0.5);
  CHECK(rep.mu_plus >= 1.5);
  CHECK(rep.mu_minus > 0.45);
  // L = 2 pi * 2 * 4 * 0.125, h = 1/256, margin = L h sqrt(2)/2
  CHECK(rep.lipschitz == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(rep.margin == doctest::Approx(2.0 * kPi / 256.0 * std::sqrt(2.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("grid must have at least 16 points") {
  CHECK_THROWS_AS(validate_coefficient(reference::constant(1), 15), InvalidArgument);
}

TEST_CASE("symmetry violations are detected") {
  const auto not_real = make(1, {{{{0}, {0}}, 1.0}, {{{1}, {0}}, 0.2}});
  CHECK_THROWS_AS(validate_coefficient(not_real, 64), SymmetryViolation);
  const auto not_exchange = make(1, {{{{0}, {0}}, 1.0}, {{{1}, {-2}}, 0.1}, {{{-1}, {2}}, 0.1}});
  CHECK_THROWS_AS(validate_coefficient(not_exchange, 64), SymmetryViolation);
  const auto complex_mean = make(1, {{{{0}, {0}}, cplx{1.0, 0.1}}});
  CHECK_THROWS_AS(validate_coefficient(complex_mean, 64), SymmetryViolation);
}

TEST_CASE("non-positive coefficient is rejected with its certified lower bound") {
  const auto c = reference::cosine_difference(1, 1.5);
  try {
    validate_coefficient(c, 64);
    FAIL("expected PositivityUncertified");
  } catch (const PositivityUncertified& e) {
    CHECK(e.certified_lower() < -0.4);
  }
}

TEST_CASE("evaluation matches the trigonometric formula") {
  const auto t2 = reference::cosine_product(1);
  const auto t1 = reference::cosine_difference(1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng), y = u(rng);
    const double xs[] = {x}, ys[] = {y};
    CHECK(t2.evaluate(xs, ys) ==
          doctest::Approx(1.0 + 0.5 * std::cos(2 * kPi * x) * std::cos(2 * kPi * y)).epsilon(1e-13));
    CHECK(t1.evaluate(xs, ys) == doctest::Approx(1.0 + 0.5 * std::cos(2 * kPi * (x - y))).epsilon(1e-13));
  }
}

TEST_CASE("random band-limited coefficients are symmetric, positive and certified") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto c = reference::random_band_limited(d, seed, 1 + static_cast<int>(seed % 3 == 0));
    const auto cert = certify(c, default_positivity_grid(d));
    CHECK(cert.mu_minus() > 0.0);
    CHECK(effective_mu(cert) == doctest::Approx(1.0));
    CHECK(c.abs_sum() == doctest::Approx(1.6));
    for (int s = 0; s < 20; ++s) {
      double x[3], y[3];
      for (int i = 0; i < d; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
      }
      const double v = c.evaluate({x, static_cast<std::size_t>(d)}, {y, static_cast<std::size_t>(d)});
      CHECK(v >= cert.mu_minus());
      CHECK(v <= cert.mu_plus());
      // exchange symmetry mu(x, y) = mu(y, x)
      CHECK(v == doctest::Approx(c.evaluate({y, static_cast<std::size_t>(d)}, {x, static_cast<std::size_t>(d)})));
    }
  }
}

TEST_CASE("mu_star coefficients and coupling extent") {
  const auto t1 = reference::cosine_difference(1);
  const auto m1 = mu_star_coefficients(t1);
  REQUIRE(m1.size() == 2);
  CHECK(m1.at({1, 0, 0}) == doctest::Approx(0.25));
  CHECK(m1.at({-1, 0, 0}) == doctest::Approx(0.25));
  CHECK(t1.coupling_extent() == 0);
  const auto t2 = reference::cosine_product(1);
  CHECK(mu_star_coefficients(t2).at({1, 0, 0}) == doctest::Approx(0.125));
  CHECK(t2.coupling_extent() == 2);
  CHECK(t2.amplitude({1, 0, 0}, {-1, 0, 0}) == cplx{0.125, 0.0});
  CHECK(t2.amplitude({2, 0, 0}, {0, 0, 0}) == cplx{});
}

TEST_CASE("gap constants follow their defining formulas") {
  const auto params = ModelParams::make(1, 0.5);
  const auto c = certify(reference::cosine_product(1), 256);
  const double c0 = compute_c0(params);
  const auto g = delta0_and_d0(params, c0, c);
  const double ratio = c.mu_minus() / (3.0 * c.mu_plus());
  CHECK(g.delta0 == doctest::Approx(kPi * ratio * ratio));
  CHECK(g.d0 == doctest::Approx(c.mu_minus() * c0 * std::sqrt(kPi)));
  CHECK_THROWS_AS(delta0_and_d0(params, c0, reference::cosine_product(1)), InvalidArgument);
  const auto tc = theory_constants(params, c);
  CHECK(tc.delta0 == g.delta0);
  CHECK(tc.theta(0.01) == doctest::Approx(0.1));
}

TEST_CASE("v_alpha uses the Euclidean norm") {
  const auto p = ModelParams::make(2, 1.0);
  CHECK(v_alpha(p, 2.0, {0.3, 0.4, 0.0}) == doctest::Approx(1.0));
  CHECK(euclidean_norm({3.0, 4.0, 12.0}, 2) == doctest::Approx(5.0));
  CHECK(sup_norm({1, -3, 7}, 2) == 3);
  CHECK(l1_norm({1, -3, 7}, 3) == 11);
}
