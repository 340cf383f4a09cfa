#include "lhom/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lhom/errors.hpp"

namespace lhom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double sinc(double x) { return std::fabs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

template <class F>
QuadratureResult endpoint_segment(F f, double a, double b) {
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  QuadratureResult r;
  r.value = ts.integrate(f, a, b, 1e-13, &r.error);
  return r;
}

template <class F>
QuadratureResult smooth_segment(F f, double a, double b) {
  QuadratureResult r;
  r.value = GK::integrate(f, a, b, 0, 0.0, &r.error);
  return r;
}

// int_Z^inf cos(c z) z^{-s} dz for c != 0 from the asymptotic integration by
// parts series, summed until the terms stop decreasing; `error` receives the
// magnitude of the first omitted term.
double cosine_tail(double c, double s, double z, double* error) {
  c = std::fabs(c);
  const double sn = std::sin(c * z);
  const double cs = std::cos(c * z);
  // -sin Z^{-s}/c + s cos Z^{-s-1}/c^2 + s(s+1) sin Z^{-s-2}/c^3 - ...
  const double trig[4] = {-sn, cs, sn, -cs};
  double mag = std::pow(z, -s) / c;  // s(s+1)..(s+j-1) Z^{-s-j} / c^{j+1}
  double total = 0.0;
  for (int j = 0; j < 64; ++j) {
    total += mag * trig[j % 4];
    const double next = mag * (s + j) / (c * z);
    if (next >= mag || next <= 1e-18 * std::fabs(total)) {
      if (error) *error = next;
      return total;
    }
    mag = next;
  }
  if (error) *error = mag;
  return total;
}

// 2 sin^2(z/2) z^{-1-alpha}, written to stay finite as z -> 0.
double one_minus_cos_kernel(double z, double alpha) {
  const double h = sinc(0.5 * z);
  return 0.5 * std::pow(z, 1.0 - alpha) * h * h;
}

}  // namespace

QuadratureResult transverse_factor(const ModelParams& params) {
  params.validate();
  const double a = params.alpha;
  switch (params.dimension) {
    case 1:
      return {1.0, 0.0};
    case 2: {
      // t = tan(theta): int_R (1+t^2)^{-(2+a)/2} dt = 2 int_0^{pi/2} cos^a
      auto r = endpoint_segment([a](double th) { return std::pow(std::cos(th), a); }, 0.0, kPi / 2);
      return {2.0 * r.value, 2.0 * r.error};
    }
    default: {
      // polar in the transverse plane, r = tan(theta): 2 pi int_0^{pi/2} sin cos^a
      auto r = endpoint_segment(
          [a](double th) { return std::sin(th) * std::pow(std::cos(th), a); }, 0.0, kPi / 2);
      return {kTwoPi * r.value, kTwoPi * r.error};
    }
  }
}

QuadratureResult c0_quadrature(const ModelParams& params) {
  params.validate();
  const double a = params.alpha;
  const double s = 1.0 + a;
  auto f = [a](double z) { return one_minus_cos_kernel(z, a); };

  constexpr int kPeriods = 400;
  QuadratureResult half = endpoint_segment(f, 0.0, kTwoPi);
  for (int j = 1; j < kPeriods; ++j) {
    const QuadratureResult seg = smooth_segment(f, kTwoPi * j, kTwoPi * (j + 1));
    half.value += seg.value;
    half.error += seg.error;
  }
  const double z = kTwoPi * kPeriods;
  double tail_err = 0.0;
  half.value += std::pow(z, -a) / a - cosine_tail(1.0, s, z, &tail_err);
  half.error += tail_err;

  const QuadratureResult t = transverse_factor(params);
  return {2.0 * half.value * t.value, 2.0 * (half.error * t.value + half.value * t.error)};
}

QuadratureResult c1_quadrature(const ModelParams& params) {
  params.validate();
  const double a = params.alpha;
  if (!(a < 1.0)) throw InvalidArgument("c1(d, alpha) is finite only for alpha < 1");
  const double s = 1.0 + a;
  // 2|sin(z/2)| z^{-1-a}; sign of sin(z/2) is constant on each period [2 pi j, 2 pi (j+1)].
  auto f = [a](double z) { return std::pow(z, -a) * std::fabs(sinc(0.5 * z)); };

  constexpr int kPeriods = 2000;
  QuadratureResult half = endpoint_segment(f, 0.0, kTwoPi);
  for (int j = 1; j < kPeriods; ++j) {
    const QuadratureResult seg = smooth_segment(f, kTwoPi * j, kTwoPi * (j + 1));
    half.value += seg.value;
    half.error += seg.error;
  }
  // |sin(z/2)| = 2/pi - (4/pi) sum_j cos(j z)/(4 j^2 - 1)
  const double z = kTwoPi * kPeriods;
  double tail = (2.0 / kPi) * std::pow(z, -a) / a;
  double tail_err = 0.0;
  for (int j = 1; j <= 4000; ++j) {
    double e = 0.0;
    tail -= (4.0 / kPi) * cosine_tail(j, s, z, &e) / (4.0 * j * j - 1.0);
    tail_err += (4.0 / kPi) * e / (4.0 * j * j - 1.0);
  }
  tail_err += (4.0 / kPi) * std::pow(z, -s) / (4.0 * 4000.0 * 4000.0);
  half.value += 2.0 * tail;
  half.error += 2.0 * tail_err;

  const QuadratureResult t = transverse_factor(params);
  return {2.0 * half.value * t.value, 2.0 * (half.error * t.value + half.value * t.error)};
}

namespace {

// J(l) = int_R e^{2pi i l z}(1-e^{iaz})(1-e^{-ibz})|z|^{-1-alpha} dz, a real
// number: the integrand at -z is the conjugate of the one at z.
QuadratureResult jump_integral(int l, double a, double b, double alpha, double inner,
                               double outer) {
  const double shift = kTwoPi * l + 0.5 * (a - b);
  // (1 - e^{iaz})(1 - e^{-ibz}) = 4 sin(az/2) sin(bz/2) e^{i(a-b)z/2}
  auto integrand = [=](double z) {
    const double prod = a * b * sinc(0.5 * a * z) * sinc(0.5 * b * z);
    return 2.0 * prod * std::cos(shift * z) * std::pow(z, 1.0 - alpha);
  };

  const double freqs[4] = {kTwoPi * l, kTwoPi * l + a, kTwoPi * l - b, kTwoPi * l + a - b};
  const double signs[4] = {1.0, -1.0, -1.0, 1.0};
  double w_max = 0.0;
  for (double c : freqs) w_max = std::max(w_max, std::fabs(c));

  QuadratureResult r = endpoint_segment(integrand, 0.0, inner);
  const double step = w_max > 0.0 ? std::min(kPi / w_max, 1.0) : 1.0;
  const auto pieces = static_cast<long>(std::ceil((outer - inner) / step));
  const double h = (outer - inner) / static_cast<double>(pieces);
  for (long j = 0; j < pieces; ++j) {
    const QuadratureResult seg = smooth_segment(integrand, inner + h * j, inner + h * (j + 1));
    r.value += seg.value;
    r.error += seg.error;
  }

  // Tail: 2 Re of the four exponentials, integrated term by term.
  const double s = 1.0 + alpha;
  for (int j = 0; j < 4; ++j) {
    if (std::fabs(freqs[j]) < 1e-14) {
      r.value += 2.0 * signs[j] * std::pow(outer, -alpha) / alpha;
    } else {
      double e = 0.0;
      r.value += 2.0 * signs[j] * cosine_tail(freqs[j], s, outer, &e);
      r.error += 2.0 * e;
    }
  }
  return r;
}

}  // namespace

ComplexQuadratureResult oracle_form_element(const PeriodicCoefficient& coeff,
                                            const ModelParams& params, int m, int n, double xi,
                                            const OracleQuadConfig& config) {
  params.validate();
  if (params.dimension != 1 || coeff.dimension() != 1)
    throw InvalidArgument("the form-element oracle is one-dimensional");
  const double alpha = params.alpha;
  const double a = kTwoPi * n + xi;
  const double b = kTwoPi * m + xi;

  // J depends on l only.
  std::map<int, cplx> weight_by_l;
  for (const auto& [key, mu_hat] : coeff.modes())
    if (key.k[0] + key.l[0] == m - n) weight_by_l[key.l[0]] += mu_hat;

  ComplexQuadratureResult out;
  if (weight_by_l.empty()) return out;

  for (const auto& [l, weight] : weight_by_l) {
    double outer = config.outer;
    if (outer <= 0.0) {
      double c_min = std::numeric_limits<double>::infinity();
      for (double c : {kTwoPi * l, kTwoPi * l + a, kTwoPi * l - b, kTwoPi * l + a - b})
        if (std::fabs(c) > 1e-14) c_min = std::min(c_min, std::fabs(c));
      outer = std::max(64.0, 40.0 / c_min);
    }
    const QuadratureResult coarse = jump_integral(l, a, b, alpha, config.inner, outer);
    const QuadratureResult fine = jump_integral(l, a, b, alpha, config.inner, 2.0 * outer);
    const double diff = std::fabs(fine.value - coarse.value);
    if (diff > config.rel_tol * std::fabs(fine.value) + config.abs_tol) {
      std::ostringstream os;
      os << "oracle element (m=" << m << ", n=" << n << ", l=" << l
         << ") changed by " << diff << " between Z=" << outer << " and 2Z";
      throw QuadratureNotConverged(os.str());
    }
    out.value += 0.5 * weight * fine.value;
    out.error += 0.5 * std::abs(weight) * (diff + fine.error);
  }
  return out;
}

}  // namespace lhom
