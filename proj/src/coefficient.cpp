#include "lhom/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "lhom/errors.hpp"
#include "lhom/kernels.hpp"

namespace lhom {

namespace {

constexpr double kPi = std::numbers::pi;

std::string format_pair(const ModeKey& key, int d) {
  std::ostringstream os;
  os << "(k=[";
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << key.k[i];
  os << "], l=[";
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << key.l[i];
  os << "])";
  return os.str();
}

LatticeVec negate(const LatticeVec& v) { return {-v[0], -v[1], -v[2]}; }

int positive_mod(long long v, int g) {
  long long r = v % g;
  return static_cast<int>(r < 0 ? r + g : r);
}

}  // namespace

ModelParams ModelParams::make(int dimension, double alpha) {
  ModelParams p{dimension, alpha};
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (dimension < 1 || dimension > kMaxDim)
    throw InvalidArgument("dimension must be 1, 2 or 3 (got " + std::to_string(dimension) + ")");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw InvalidArgument("alpha must lie in (0, 2) (got " + std::to_string(alpha) + ")");
}

double euclidean_norm(const RealVec& v, int dimension) {
  double s = 0.0;
  for (int i = 0; i < dimension; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

int sup_norm(const LatticeVec& v, int dimension) {
  int m = 0;
  for (int i = 0; i < dimension; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

int l1_norm(const LatticeVec& v, int dimension) {
  int s = 0;
  for (int i = 0; i < dimension; ++i) s += std::abs(v[i]);
  return s;
}

PeriodicCoefficient::PeriodicCoefficient(int dimension, ModeMap modes)
    : dimension_(dimension), modes_(std::move(modes)) {
  if (dimension_ < 1 || dimension_ > kMaxDim)
    throw InvalidArgument("coefficient dimension must be 1, 2 or 3");
  if (modes_.empty()) throw InvalidArgument("coefficient has no modes");
  for (const auto& [key, value] : modes_) {
    for (int i = dimension_; i < kMaxDim; ++i)
      if (key.k[i] != 0 || key.l[i] != 0)
        throw InvalidArgument("mode index has components beyond the dimension");
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw InvalidArgument("non-finite amplitude at " + format_pair(key, dimension_));
  }
}

cplx PeriodicCoefficient::amplitude(const LatticeVec& k, const LatticeVec& l) const {
  auto it = modes_.find(ModeKey{k, l});
  return it == modes_.end() ? cplx{} : it->second;
}

double PeriodicCoefficient::evaluate(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (const auto& [key, value] : modes_) {
    double phase = 0.0;
    for (int i = 0; i < dimension_; ++i) phase += key.k[i] * x[i] + key.l[i] * y[i];
    phase *= 2.0 * kPi;
    s += value.real() * std::cos(phase) - value.imag() * std::sin(phase);
  }
  return s;
}

double PeriodicCoefficient::lipschitz_constant() const {
  double s = 0.0;
  for (const auto& [key, value] : modes_)
    s += 2.0 * kPi * (l1_norm(key.k, dimension_) + l1_norm(key.l, dimension_)) * std::abs(value);
  return s;
}

int PeriodicCoefficient::coupling_extent() const {
  int m = 0;
  for (const auto& [key, value] : modes_) {
    LatticeVec s{key.k[0] + key.l[0], key.k[1] + key.l[1], key.k[2] + key.l[2]};
    m = std::max(m, sup_norm(s, dimension_));
  }
  return m;
}

double PeriodicCoefficient::abs_sum() const {
  double s = 0.0;
  for (const auto& [key, value] : modes_) s += std::abs(value);
  return s;
}

const CoefficientBounds& PeriodicCoefficient::bounds() const {
  if (!bounds_) throw InvalidArgument("coefficient has not been certified");
  return *bounds_;
}

PeriodicCoefficient PeriodicCoefficient::with_bounds(CoefficientBounds b) const {
  PeriodicCoefficient c = *this;
  c.bounds_ = b;
  return c;
}

int default_positivity_grid(int dimension) {
  switch (dimension) {
    case 1:
      return 256;
    case 2:
      return 64;
    default:
      return 24;
  }
}

CertificationReport validate_coefficient(const PeriodicCoefficient& coeff,
                                         int grid_points_per_dim) {
  const int d = coeff.dimension();
  if (grid_points_per_dim < 16)
    throw InvalidArgument("positivity grid needs at least 16 points per coordinate");

  for (const auto& [key, value] : coeff.modes()) {
    auto conj_it = coeff.modes().find(ModeKey{negate(key.k), negate(key.l)});
    if (conj_it == coeff.modes().end() || conj_it->second != std::conj(value))
      throw SymmetryViolation("real-valuedness broken: mu_hat" + format_pair(key, d) +
                              " is not the conjugate of its (-k,-l) partner");
    auto swap_it = coeff.modes().find(ModeKey{key.l, key.k});
    if (swap_it == coeff.modes().end() || swap_it->second != value)
      throw SymmetryViolation("exchange symmetry broken: mu_hat" + format_pair(key, d) +
                              " differs from its (l,k) partner");
  }

  // Grid over the 2d-torus: coordinates (x_1..x_d, y_1..y_d), spacing 1/G.
  // The innermost coordinate is swept as a row with the vector kernel.
  const int g = grid_points_per_dim;
  const int dims = 2 * d;
  std::vector<double> cos_tab(g), sin_tab(g);
  for (int p = 0; p < g; ++p) {
    cos_tab[p] = std::cos(2.0 * kPi * p / g);
    sin_tab[p] = std::sin(2.0 * kPi * p / g);
  }

  struct Term {
    std::array<int, 2 * kMaxDim> q{};
    double re, im;
    int row_table;
  };
  std::vector<Term> terms;
  std::map<int, int> row_index;
  std::vector<std::vector<double>> row_cos, row_sin;
  for (const auto& [key, value] : coeff.modes()) {
    Term t{};
    for (int i = 0; i < d; ++i) {
      t.q[i] = key.k[i];
      t.q[d + i] = key.l[i];
    }
    t.re = value.real();
    t.im = value.imag();
    const int q_last = t.q[dims - 1];
    auto [it, inserted] = row_index.try_emplace(q_last, static_cast<int>(row_cos.size()));
    if (inserted) {
      std::vector<double> c(g), s(g);
      for (int i = 0; i < g; ++i) {
        const int p = positive_mod(static_cast<long long>(q_last) * i, g);
        c[i] = cos_tab[p];
        s[i] = sin_tab[p];
      }
      row_cos.push_back(std::move(c));
      row_sin.push_back(std::move(s));
    }
    t.row_table = it->second;
    terms.push_back(t);
  }

  std::uint64_t outer = 1;
  for (int i = 0; i < dims - 1; ++i) outer *= static_cast<std::uint64_t>(g);

  std::vector<double> row(g);
  std::array<int, 2 * kMaxDim> idx{};
  double grid_min = std::numeric_limits<double>::infinity();
  double grid_max = -std::numeric_limits<double>::infinity();
  for (std::uint64_t o = 0; o < outer; ++o) {
    std::fill(row.begin(), row.end(), 0.0);
    for (const Term& t : terms) {
      long long phase = 0;
      for (int i = 0; i < dims - 1; ++i) phase += static_cast<long long>(t.q[i]) * idx[i];
      const int p = positive_mod(phase, g);
      const double zr = t.re * cos_tab[p] - t.im * sin_tab[p];
      const double zi = t.re * sin_tab[p] + t.im * cos_tab[p];
      kernels::trig_accumulate(row, zr, row_cos[t.row_table], zi, row_sin[t.row_table]);
    }
    double lo, hi;
    kernels::min_max(row, lo, hi);
    grid_min = std::min(grid_min, lo);
    grid_max = std::max(grid_max, hi);
    for (int i = 0; i < dims - 1; ++i) {
      if (++idx[i] < g) break;
      idx[i] = 0;
    }
  }

  CertificationReport r;
  r.grid_points_per_dim = g;
  r.samples = outer * static_cast<std::uint64_t>(g);
  r.grid_min = grid_min;
  r.grid_max = grid_max;
  r.lipschitz = coeff.lipschitz_constant();
  r.spacing = 1.0 / g;
  r.margin = r.lipschitz * r.spacing * std::sqrt(static_cast<double>(dims)) / 2.0;
  r.mu_minus = grid_min - r.margin;
  r.mu_plus = grid_max + r.margin;
  if (!(r.mu_minus > 0.0)) {
    std::ostringstream os;
    os << "positivity not certified: certified lower bound " << r.mu_minus
       << " (grid min " << grid_min << ", Lipschitz margin " << r.margin << ")";
    throw PositivityUncertified(os.str(), r.mu_minus);
  }
  return r;
}

PeriodicCoefficient certify(const PeriodicCoefficient& coeff, int grid_points_per_dim) {
  const CertificationReport r = validate_coefficient(coeff, grid_points_per_dim);
  return coeff.with_bounds({r.mu_minus, r.mu_plus});
}

double compute_c0(const ModelParams& params) {
  params.validate();
  const double d = params.dimension;
  const double a = params.alpha;
  return std::pow(kPi, d / 2.0) * std::fabs(std::tgamma(-a / 2.0)) /
         (std::pow(2.0, a) * std::tgamma((d + a) / 2.0));
}

double v_alpha(const ModelParams& params, double c0, const RealVec& xi) {
  const double r = euclidean_norm(xi, params.dimension);
  return r == 0.0 ? 0.0 : c0 * std::pow(r, params.alpha);
}

bool is_alpha_one(double alpha) { return std::fabs(alpha - 1.0) < 1e-12; }

double theta(double alpha, double xi_norm) {
  if (xi_norm == 0.0) return 0.0;
  if (is_alpha_one(alpha)) return xi_norm * (1.0 + std::fabs(std::log(xi_norm)));
  if (alpha < 1.0) return std::pow(xi_norm, alpha);
  return xi_norm;
}

double effective_mu(const PeriodicCoefficient& coeff) {
  const cplx m = coeff.amplitude({}, {});
  if (std::fabs(m.imag()) > 1e-12)
    throw SymmetryViolation("mu_hat[0,0] has imaginary part " + std::to_string(m.imag()));
  return m.real();
}

std::map<LatticeVec, double> mu_star_coefficients(const PeriodicCoefficient& coeff) {
  std::map<LatticeVec, double> out;
  const int d = coeff.dimension();
  for (const auto& [key, value] : coeff.modes()) {
    if (key.l != negate(key.k) || sup_norm(key.k, d) == 0) continue;
    out.emplace(key.k, value.real());
  }
  return out;
}

GapConstants delta0_and_d0(const ModelParams& params, double c0, const PeriodicCoefficient& coeff) {
  const double mm = coeff.mu_minus();
  const double mp = coeff.mu_plus();
  if (!(mm > 0.0)) throw PositivityUncertified("mu_minus must be positive", mm);
  GapConstants g;
  g.delta0 = kPi * std::pow(mm / (3.0 * mp), 1.0 / params.alpha);
  g.d0 = mm * c0 * std::pow(kPi, params.alpha);
  if (!(g.delta0 < kPi)) throw InvalidArgument("delta0 must be below pi");
  return g;
}

TheoryConstants theory_constants(const ModelParams& params, const PeriodicCoefficient& coeff) {
  TheoryConstants t;
  t.alpha = params.alpha;
  t.c0 = compute_c0(params);
  t.mu_eff = effective_mu(coeff);
  const GapConstants g = delta0_and_d0(params, t.c0, coeff);
  t.d0 = g.d0;
  t.delta0 = g.delta0;
  return t;
}

namespace reference {

PeriodicCoefficient constant(int dimension, double value) {
  return PeriodicCoefficient(dimension, {{ModeKey{}, cplx{value, 0.0}}});
}

PeriodicCoefficient cosine_difference(int dimension, double amp) {
  PeriodicCoefficient::ModeMap m;
  m[ModeKey{}] = 1.0;
  LatticeVec e{};
  e[0] = 1;
  m[ModeKey{e, negate(e)}] = amp / 2.0;
  m[ModeKey{negate(e), e}] = amp / 2.0;
  return PeriodicCoefficient(dimension, std::move(m));
}

PeriodicCoefficient cosine_product(int dimension, double amp) {
  PeriodicCoefficient::ModeMap m;
  m[ModeKey{}] = 1.0;
  for (int sk : {-1, 1})
    for (int sl : {-1, 1}) {
      LatticeVec k{}, l{};
      k[0] = sk;
      l[0] = sl;
      m[ModeKey{k, l}] = amp / 4.0;
    }
  return PeriodicCoefficient(dimension, std::move(m));
}

PeriodicCoefficient random_band_limited(int dimension, std::uint64_t seed, int extent, int orbits,
                                        double budget) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> index(-extent, extent);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::map<ModeKey, cplx> raw;
  int placed = 0;
  int attempts = 0;
  while (placed < orbits && attempts < 1000) {
    ++attempts;
    ModeKey key;
    for (int i = 0; i < dimension; ++i) {
      key.k[i] = index(rng);
      key.l[i] = index(rng);
    }
    if (sup_norm(key.k, dimension) == 0 && sup_norm(key.l, dimension) == 0) continue;
    if (raw.count(key)) continue;
    cplx c{unit(rng), unit(rng)};
    // (l,k) == (-k,-l) forces a real amplitude.
    if (key.l == negate(key.k)) c = {c.real(), 0.0};
    const ModeKey orbit[4] = {key, {key.l, key.k}, {negate(key.k), negate(key.l)},
                              {negate(key.l), negate(key.k)}};
    const cplx vals[4] = {c, c, std::conj(c), std::conj(c)};
    for (int j = 0; j < 4; ++j) raw[orbit[j]] = vals[j];
    ++placed;
  }
  double mass = 0.0;
  for (const auto& [key, value] : raw) mass += std::abs(value);
  PeriodicCoefficient::ModeMap modes;
  modes[ModeKey{}] = 1.0;
  for (const auto& [key, value] : raw) modes[key] = value * (budget / mass);
  return PeriodicCoefficient(dimension, std::move(modes));
}

}  // namespace reference

}  // namespace lhom
