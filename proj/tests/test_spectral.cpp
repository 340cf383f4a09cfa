#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lhom/errors.hpp"
#include "lhom/spectral.hpp"

using namespace lhom;

namespace {

constexpr double kPi = std::numbers::pi;

// U diag(ev) U^* with a seeded random unitary U.
Eigen::MatrixXcd with_spectrum(const Eigen::VectorXd& ev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const auto n = ev.size();
  Eigen::MatrixXcd z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = cplx{g(rng), g(rng)};
  const Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
  return u * ev.cast<cplx>().asDiagonal() * u.adjoint();
}

FiberMatrix wrap(const Eigen::MatrixXcd& m) {
  FiberMatrix f;
  f.entries = m;
  return f;
}

}  // namespace

TEST_CASE("Hermitian eigendecomposition reconstructs the matrix") {
  Eigen::VectorXd ev(5);
  ev << 0.1, 0.5, 2.0, 3.0, 7.0;
  const auto m = with_spectrum(ev, 1);
  const auto s = eig_hermitian(m);
  CHECK((s.eigenvalues - ev).cwiseAbs().maxCoeff() <= 1e-13);
  const Eigen::MatrixXcd back = s.eigenvectors * s.eigenvalues.cast<cplx>().asDiagonal() * s.eigenvectors.adjoint();
  CHECK((back - m).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("eigenvector projector needs exactly one eigenvalue under the cutoff") {
  Eigen::VectorXd ev(4);
  ev << 0.2, 0.3, 5.0, 6.0;
  const auto s = eig_hermitian(with_spectrum(ev, 2));
  CHECK_THROWS_AS(projector_by_eig(s, 1.0), GapViolation);
  CHECK_THROWS_AS(projector_by_eig(s, 0.1), GapViolation);
  const auto p = projector_by_eig(s, 0.25);
  CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(p.trace().real() == doctest::Approx(1.0));

  Eigen::VectorXd tie(3);
  tie << 0.1, 0.1 + 1e-10, 4.0;
  CHECK_THROWS_AS(projector_by_eig(eig_hermitian(Eigen::MatrixXcd(tie.cast<cplx>().asDiagonal())), 0.1 + 5e-11),
                  GapViolation);
}

TEST_CASE("stadium geometry") {
  const double d0 = 4.2;
  for (int n : {128, 256, 1024}) {
    const auto c = threshold_contour(d0, n);
    CHECK(c.nodes.size() == static_cast<std::size_t>(n));
    CHECK(c.nominal_arclength() == doctest::Approx(d0 * (2 * kPi + 2) / 3).epsilon(1e-14));
    CHECK(c.arclength() == doctest::Approx(d0 * (2 * kPi + 2) / 3).epsilon(1e-10));
    CHECK(c.rightmost() == doctest::Approx(2 * d0 / 3));
    for (const cplx& z : c.nodes) {
      // distance from the segment [0, d0/3] equals the radius
      const double x = std::clamp(z.real(), 0.0, d0 / 3);
      CHECK(std::abs(z - cplx{x, 0.0}) == doctest::Approx(d0 / 3).epsilon(1e-12));
    }
    CHECK(c.distance(d0 / 6) == doctest::Approx(d0 / 3));
    CHECK(c.distance(d0) == doctest::Approx(d0 / 3));
  }
  // sum of dz over a closed curve vanishes; sum of dz / z gives 2 pi i around 0
  const auto c = threshold_contour(3.0, 256);
  cplx total{}, winding{};
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    total += c.weights[i];
    winding += c.weights[i] / (c.nodes[i] - cplx{0.5, 0.0});
  }
  CHECK(std::abs(total) <= 1e-12);
  CHECK(std::abs(winding - cplx{0.0, 2 * kPi}) <= 1e-10);
}

TEST_CASE("Riesz projector matches the eigenvector projector") {
  Eigen::VectorXd ev(6);
  ev << 0.05, 3.0, 4.0, 9.0, 12.0, 40.0;
  const auto m = with_spectrum(ev, 3);
  const auto r = projector_by_riesz(wrap(m), 1.0, 1.0, 128);
  const auto p = projector_by_eig(eig_hermitian(m), 1.0);
  CHECK((r.projector - p).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((r.a_times_f - 0.05 * p).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(r.nodes >= 256);
}

TEST_CASE("Riesz projector refuses eigenvalues on the contour") {
  Eigen::VectorXd ev(3);
  ev << 0.05, 2.0, 9.0;  // contour around [0,1] at radius 1 passes through 2
  CHECK_THROWS_AS(projector_by_riesz(wrap(with_spectrum(ev, 4)), 1.0, 1.0, 128), ContourTooClose);
}

TEST_CASE("threshold report on the constant coefficient is exact") {
  const auto params = ModelParams::make(1, 0.5);
  const auto t0 = certify(reference::constant(1), 256);
  const ModeSet modes(1, 16);
  for (double x : {0.0, 1e-3, 0.1}) {
    const auto r = threshold_report(t0, params, modes, {x, 0, 0});
    CHECK(r.f_minus_p_norm <= 1e-13);
    CHECK(r.phi_norm <= 1e-12);
    CHECK(r.af_minus_effective_norm <= 1e-12);
    CHECK(std::abs(r.rho_star) <= 1e-14);
    CHECK(r.riesz_agreement <= 1e-8);
    CHECK(r.riesz_nodes >= 256);
  }
}

TEST_CASE("threshold report near zero for the cosine product") {
  const auto params = ModelParams::make(1, 0.5);
  const auto t2 = certify(reference::cosine_product(1), 256);
  const ModeSet modes(1, 32);
  const auto tc = theory_constants(params, t2);

  const auto z = threshold_report(t2, params, modes, {0.0, 0, 0});
  CHECK(std::abs(z.lambda1) <= 1e-12);
  CHECK(z.f_minus_p_norm <= 1e-12);
  CHECK(z.inside_ball);

  const auto small = threshold_report(t2, params, modes, {0.01, 0, 0});
  CHECK(small.inside_ball);
  CHECK(small.lambda2 >= tc.d0);
  CHECK(small.f_minus_p_norm > 0.0);
  CHECK(small.f_minus_p_norm < 0.1);
  CHECK(small.riesz_agreement <= 1e-8);

  // Outside the ball the window follows the gap.
  const auto outside = threshold_report(t2, params, modes, {0.1, 0, 0});
  CHECK_FALSE(outside.inside_ball);
  CHECK(outside.cutoff > outside.lambda1);
  CHECK(outside.cutoff < outside.lambda2);
}

TEST_CASE("threshold report needs certified bounds") {
  CHECK_THROWS_AS(threshold_report(reference::cosine_product(1), ModelParams::make(1, 0.5), ModeSet(1, 4), {}),
                  InvalidArgument);
}

TEST_CASE("zero-mode projector") {
  const ModeSet modes(2, 1);
  const auto p = zero_mode_projector(modes);
  CHECK(p.trace() == cplx{1.0, 0.0});
  CHECK(p(4, 4) == cplx{1.0, 0.0});
}
