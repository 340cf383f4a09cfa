#pragma once

// Independent quadrature routes for the closed-form quantities: c0(d, alpha)
// by direct integration of (1 - cos z_1)/|z|^{d+alpha}, the Schur-test
// constant c1(d, alpha), and single fiber-matrix elements by integrating the
// form integrand over the jump length z in one dimension. None of these use
// the Gamma-function formula or the c0 |c|^alpha identity.

#include "lhom/coefficient.hpp"

namespace lhom {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimate
};

struct ComplexQuadratureResult {
  cplx value{};
  double error = 0.0;
};

struct OracleQuadConfig {
  // Length of the innermost segment [0, inner] handled by tanh-sinh (absorbs
  // the |z|^{1-alpha} behavior at the origin).
  double inner = 1.0;
  // Outer cutoff Z; 0 selects it from the smallest nonzero frequency.
  double outer = 0.0;
  // Successive refinements (Z versus 2Z) must agree to this relative level.
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
};

QuadratureResult c0_quadrature(const ModelParams& params);

// c1(d, alpha) = int 2|sin(z_1/2)| / |z|^{d+alpha} dz, alpha < 1 only.
QuadratureResult c1_quadrature(const ModelParams& params);

// int_{R^{d-1}} (1 + |t|^2)^{-(d+alpha)/2} dt, reducing a d-dimensional radial
// integrand that depends on z_1 only to a one-dimensional one (1 for d = 1).
QuadratureResult transverse_factor(const ModelParams& params);

// Element (m, n) of A(xi) in one dimension:
//   (1/2) sum_{k+l=m-n} mu_hat[k,l] int_R e^{2pi i l z}(1-e^{i(2pi n+xi)z})(1-e^{-i(2pi m+xi)z})|z|^{-1-alpha} dz.
// Throws InvalidArgument for d != 1 and QuadratureNotConverged when the Z and
// 2Z evaluations disagree beyond the configured tolerance.
ComplexQuadratureResult oracle_form_element(const PeriodicCoefficient& coeff,
                                            const ModelParams& params, int m, int n, double xi,
                                            const OracleQuadConfig& config = {});

}  // namespace lhom
