#include "lhom/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lhom/config.hpp"
#include "lhom/errors.hpp"
#include "lhom/fiber.hpp"
#include "lhom/homogenization.hpp"
#include "lhom/oracle.hpp"
#include "lhom/parallel.hpp"
#include "lhom/spectral.hpp"

namespace lhom {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Pass:
      return "pass";
    case VerdictStatus::Fail:
      return "fail";
    default:
      return "skip";
  }
}

bool quiet() {
  const char* v = std::getenv("LHOM_LOG");
  return v && std::string(v) == "quiet";
}

// Error raised by a command body to abort with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  const CommandOptions& options;
  std::ostream& log;
  StudyConfig config;
  std::string digest;
  fs::path out_dir;
  int workers = 1;
  RunReport& report;

  void verdict(std::string check, bool ok, std::optional<double> value = {},
               std::optional<double> limit = {}, std::string detail = {}) {
    report.verdicts.push_back({std::move(check), ok ? VerdictStatus::Pass : VerdictStatus::Fail, value,
                               limit, std::move(detail)});
  }
  void skip(std::string check, std::string detail) {
    report.verdicts.push_back({std::move(check), VerdictStatus::Skip, {}, {}, std::move(detail)});
  }
  void info(const std::string& line) {
    if (!quiet()) log << line << "\n";
  }
  fs::path artifact(const std::string& name) {
    const fs::path p = out_dir / name;
    report.artifacts.push_back(p.string());
    return p;
  }
};

std::ofstream open_csv(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + p.string());
  return out;
}

PeriodicCoefficient certified_coefficient(Context& ctx) {
  const PeriodicCoefficient raw = ctx.config.coefficient_model();
  return certify(raw, ctx.config.positivity_grid_or_default());
}

// ---------------------------------------------------------------- validate

void cmd_validate(Context& ctx) {
  const PeriodicCoefficient raw = ctx.config.coefficient_model();
  const int grid = ctx.config.positivity_grid_or_default();
  CertificationReport cert;
  try {
    cert = validate_coefficient(raw, grid);
  } catch (const SymmetryViolation& e) {
    ctx.verdict("symmetry", false, {}, {}, e.what());
    ctx.skip("positivity", "symmetry failed");
    throw;
  } catch (const PositivityUncertified& e) {
    ctx.verdict("symmetry", true);
    ctx.verdict("positivity", false, e.certified_lower(), 0.0, e.what());
    throw;
  }
  ctx.verdict("symmetry", true);
  ctx.verdict("positivity", true, cert.mu_minus, 0.0, "certified lower bound > 0");

  const ModelParams params = ctx.config.params();
  const PeriodicCoefficient coeff = raw.with_bounds({cert.mu_minus, cert.mu_plus});
  const TheoryConstants tc = theory_constants(params, coeff);
  ctx.info("grid points per coordinate: " + std::to_string(cert.grid_points_per_dim));
  ctx.info("grid min/max: " + num(cert.grid_min) + " " + num(cert.grid_max));
  ctx.info("lipschitz margin: " + num(cert.margin));
  ctx.info("mu_minus: " + num(cert.mu_minus));
  ctx.info("mu_plus: " + num(cert.mu_plus));
  ctx.info("mu0: " + num(tc.mu_eff));
  ctx.info("c0: " + num(tc.c0));
  ctx.info("d0: " + num(tc.d0));
  ctx.info("delta0: " + num(tc.delta0));
}

// --------------------------------------------------------------- constants

void cmd_constants(Context& ctx) {
  const ModelParams params = ctx.config.params();
  const double c0 = compute_c0(params);
  const QuadratureResult q = c0_quadrature(params);
  const double rel = std::abs(q.value - c0) / c0;
  ctx.verdict("c0_quadrature", rel <= ctx.config.tolerances_or_default().oracle_rel, rel,
              ctx.config.tolerances_or_default().oracle_rel);
  ctx.info("c0 (gamma formula): " + num(c0));
  ctx.info("c0 (quadrature): " + num(q.value) + " +- " + num(q.error));

  const PeriodicCoefficient coeff = certified_coefficient(ctx);
  const TheoryConstants tc = theory_constants(params, coeff);
  ctx.info("mu0: " + num(tc.mu_eff));
  ctx.info("mu_minus: " + num(coeff.mu_minus()));
  ctx.info("mu_plus: " + num(coeff.mu_plus()));
  ctx.info("d0: " + num(tc.d0));
  ctx.info("delta0: " + num(tc.delta0));
  for (const auto& [m, v] : mu_star_coefficients(coeff)) {
    std::string key;
    for (int i = 0; i < params.dimension; ++i) key += (i ? "," : "") + std::to_string(m[i]);
    ctx.info("mu_star[" + key + "]: " + num(v));
  }
  ctx.verdict("certified", true, coeff.mu_minus(), 0.0);
}

// ------------------------------------------------------------------- fiber

void cmd_fiber(Context& ctx) {
  if (ctx.options.xi_list.empty()) throw UsageError("fiber requires --xi");
  const auto xs = parse_xi_list(ctx.options.xi_list, ctx.config.dimension);
  const ModelParams params = ctx.config.params();
  const PeriodicCoefficient coeff = certified_coefficient(ctx);
  const ModeSet modes(params.dimension, ctx.config.truncation_or_default());
  const double c0 = compute_c0(params);

  double worst_herm = 0.0, worst_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const FiberMatrix a = assemble_fiber_matrix(coeff, params, c0, modes, xs[i]);
    worst_herm = std::max(worst_herm, hermitian_defect(a.entries));
    worst_min = std::min(worst_min, min_eigenvalue(a.entries));
    auto out = open_csv(ctx.artifact("fiber_" + std::to_string(i) + ".csv"));
    out << "# config_digest=" << ctx.digest << " xi=";
    for (int k = 0; k < params.dimension; ++k) out << (k ? ";" : "") << num(xs[i][k]);
    out << " truncation=" << modes.truncation() << "\n";
    for (std::size_t c = 0; c < modes.size(); ++c)
      out << (c ? "," : "") << "re_" << c << ",im_" << c;
    out << "\n";
    write_matrix_csv(out, a.entries);
  }
  ctx.verdict("hermitian", worst_herm <= 1e-12, worst_herm, 1e-12);
  ctx.verdict("positive_semidefinite", worst_min >= -1e-10, worst_min, -1e-10);
}

// -------------------------------------------------------------- thresholds

struct SlopeSpec {
  const char* name;
  double power;                         // nominal exponent
  std::function<double(double)> bound;  // bound function of |xi|
  double extra_margin;
};

std::vector<SlopeSpec> threshold_slope_specs(double alpha) {
  const bool one = is_alpha_one(alpha);
  auto th = [alpha](double r) { return theta(alpha, r); };
  if (one) {
    return {{"f_minus_p", 1.0, th, 0.0},
            {"phi_norm", 2.0, [th](double r) { return th(r) * th(r); }, 0.05},
            {"rho_star", 2.0, [](double r) { return r * r * (1.0 + std::abs(std::log(r))); }, 0.0}};
  }
  if (alpha < 1.0) {
    return {{"f_minus_p", alpha, th, 0.0},
            {"phi_norm", 2.0 * alpha, [th](double r) { return th(r) * th(r); }, 0.05},
            {"rho_star", 1.0 + alpha, [alpha](double r) { return std::pow(r, 1.0 + alpha); }, 0.0}};
  }
  return {{"f_minus_p", 1.0, th, 0.0},
          {"phi_norm", 2.0, [th](double r) { return th(r) * th(r); }, 0.05},
          {"rho_star", 2.0, [](double r) { return r * r; }, 0.0}};
}

void cmd_thresholds(Context& ctx) {
  const ModelParams params = ctx.config.params();
  const PeriodicCoefficient coeff = certified_coefficient(ctx);
  const TheoryConstants tc = theory_constants(params, coeff);
  const ModeSet modes(params.dimension, ctx.config.truncation_or_default());
  const ThresholdSpec spec = ctx.config.thresholds_or_default();
  const ToleranceSpec tol = ctx.config.tolerances_or_default();

  std::vector<RealVec> xs{RealVec{}};
  for (double r : log_spaced(spec.min_radius, spec.max_radius, spec.count)) {
    RealVec x{};
    x[0] = r;
    xs.push_back(x);
  }

  ThresholdOptions topt;
  topt.projector_tolerance = tol.projector_abs;

  auto out = open_csv(ctx.artifact("thresholds.csv"));
  out << "# config_digest=" << ctx.digest << "\n";
  for (int k = 0; k < params.dimension; ++k) out << "xi_" << (k + 1) << ",";
  out << "xi_norm,lambda1,lambda2,f_minus_p,phi_norm,af_minus_eff,rho,rho_star\n";

  std::vector<ThresholdReport> rows;
  double worst_lower = std::numeric_limits<double>::infinity();
  double worst_upper = std::numeric_limits<double>::infinity();
  double worst_gap = std::numeric_limits<double>::infinity();
  double worst_riesz = 0.0;
  for (const RealVec& x : xs) {
    ThresholdReport r;
    try {
      r = threshold_report(coeff, params, modes, x, topt);
    } catch (const VerificationError& e) {
      ctx.verdict("threshold_point", false, euclidean_norm(x, params.dimension), {}, e.what());
      out.flush();
      throw;
    }
    for (int k = 0; k < params.dimension; ++k) out << num(r.xi[k]) << ",";
    out << num(r.xi_norm) << "," << num(r.lambda1) << "," << num(r.lambda2) << ","
        << num(r.f_minus_p_norm) << "," << num(r.phi_norm) << "," << num(r.af_minus_effective_norm)
        << "," << num(r.rho) << "," << num(r.rho_star) << "\n";
    out.flush();
    const double va = v_alpha(params, tc.c0, r.xi);
    const double slack = 1e-10 * std::max(1.0, va);
    worst_lower = std::min(worst_lower, r.lambda1 - coeff.mu_minus() * va + slack);
    worst_upper = std::min(worst_upper, coeff.mu_plus() * va - r.lambda1 + slack);
    if (r.inside_ball) worst_gap = std::min(worst_gap, r.lambda2 - tc.d0);
    worst_riesz = std::max(worst_riesz, r.riesz_agreement);
    rows.push_back(r);
  }
  ctx.verdict("lambda1_lower_bound", worst_lower >= 0.0, worst_lower, 0.0);
  ctx.verdict("lambda1_upper_bound", worst_upper >= 0.0, worst_upper, 0.0);
  if (std::isfinite(worst_gap))
    ctx.verdict("lambda2_gap", worst_gap >= 0.0, worst_gap, 0.0, "lambda2 - d0 inside the delta0-ball");
  else
    ctx.skip("lambda2_gap", "no point inside the delta0-ball");
  ctx.verdict("projector_agreement", worst_riesz <= tol.projector_abs, worst_riesz, tol.projector_abs);

  double margin = tol.slope_margin;
  if (near_singular_alpha(params.alpha)) {
    margin += 0.05;
    ctx.info("warning: alpha is close to a value where the threshold constants blow up; slope margins widened by 0.05");
  }
  for (const SlopeSpec& s : threshold_slope_specs(params.alpha)) {
    std::vector<double> x, v;
    double largest = 0.0;
    for (const auto& r : rows) {
      if (r.xi_norm == 0.0) continue;
      const double value = std::string(s.name) == "f_minus_p"  ? r.f_minus_p_norm
                           : std::string(s.name) == "phi_norm" ? r.phi_norm
                                                               : std::abs(r.rho_star);
      largest = std::max(largest, value);
      // Fitting against bound^{1/p} makes the nominal slope p for every alpha.
      x.push_back(std::pow(s.bound(r.xi_norm), 1.0 / s.power));
      v.push_back(value);
    }
    const std::string check = std::string("slope_") + s.name;
    if (largest <= 1e-12) {
      ctx.verdict(check, true, largest, 1e-12, "exact");
      continue;
    }
    const RateFit fit = fit_loglog(x, v);
    const double need = s.power - margin - s.extra_margin;
    ctx.verdict(check, fit.slope >= need, fit.slope, need, "r_squared=" + num(fit.r_squared));
  }
}

// -------------------------------------------------------------- rate-study

void cmd_rate_study(Context& ctx) {
  const ModelParams params = ctx.config.params();
  const PeriodicCoefficient coeff = certified_coefficient(ctx);
  const ModeSet modes(params.dimension, ctx.config.truncation_or_default());
  const XiGridSpec gspec = ctx.config.xi_grid_or_default();
  const XiGrid grid = build_xi_grid(params.dimension, gspec);
  const EpsilonSpec es = ctx.config.epsilon_or_default();
  const std::vector<double> eps = log_spaced(es.min, es.max, es.count);

  StudyOptions opt;
  opt.workers = ctx.workers;
  opt.truncation_check = true;
  opt.grid_check = ctx.config.grid_check.value_or(false);
  opt.grid_spec = gspec;
  opt.slope_margin = ctx.config.tolerances_or_default().slope_margin;
  opt.strict = false;

  ctx.info("grid points: " + std::to_string(grid.points.size()) + ", truncation " +
           std::to_string(modes.truncation()));
  const RateStudyResult r = discrepancy_study(coeff, params, modes, grid, eps, opt);
  if (!r.warning.empty()) ctx.info("warning: " + r.warning);

  {
    auto out = open_csv(ctx.artifact("rate_study.csv"));
    write_rate_csv(out, r, ctx.digest);
  }

  const double largest = *std::max_element(r.discrepancies.begin(), r.discrepancies.end());
  ctx.verdict("bounded_by_two", r.bounded_ok, largest, 2.0);
  ctx.verdict("decay", r.decay_ok, r.discrepancies.back() / std::max(r.discrepancies.front(), 1e-300), 0.2,
              "smallest-eps over largest-eps discrepancy");
  if (r.exact) {
    ctx.verdict("fitted_slope", true, 0.0, {}, "exact");
    ctx.verdict("bound_ratio_spread", true, 1.0, 10.0, "exact");
  } else {
    ctx.verdict("fitted_slope", r.slope_ok, r.fitted_slope(), r.slope_threshold,
                is_alpha_one(params.alpha) ? "log-corrected" : "");
    ctx.verdict("bound_ratio_spread", r.ratio_ok, r.ratio_spread, 10.0);
    ctx.info("fitted slope: " + num(r.fit->slope) + " (r^2 " + num(r.fit->r_squared) + ")");
    if (r.fit->log_corrected_slope) ctx.info("log-corrected slope: " + num(*r.fit->log_corrected_slope));
  }
  ctx.verdict("truncation_stability", r.truncation_ok, r.truncation_stability, 0.05);
  if (r.grid_stability)
    ctx.verdict("grid_stability", r.grid_ok, r.grid_stability, 0.02);
  else
    ctx.skip("grid_stability", "grid_check disabled");
}

// ------------------------------------------------------------ oracle-check

void cmd_oracle_check(Context& ctx) {
  const ModelParams params = ctx.config.params();
  if (params.dimension != 1) throw UsageError("oracle-check supports d = 1 only");
  const ToleranceSpec tol = ctx.config.tolerances_or_default();
  const OracleSpec os = ctx.config.oracle_or_default();

  const double c0 = compute_c0(params);
  const QuadratureResult q = c0_quadrature(params);
  const double c0_rel = std::abs(q.value - c0) / c0;
  ctx.verdict("c0_quadrature", c0_rel <= tol.oracle_rel, c0_rel, tol.oracle_rel);

  const PeriodicCoefficient coeff = ctx.config.coefficient_model();
  const int n_modes = std::max({os.max_mode, coeff.coupling_extent(), 1});
  const ModeSet modes(1, n_modes);

  struct Row {
    int m, n;
    double xi;
    cplx closed, oracle;
    double rel;
  };
  std::vector<Row> rows;
  double scale = 0.0;
  for (double xi : os.xi) {
    const FiberMatrix a = assemble_fiber_matrix(coeff, params, c0, modes, RealVec{xi, 0.0, 0.0});
    for (int m = -os.max_mode; m <= os.max_mode; ++m) {
      for (int n = -os.max_mode; n <= os.max_mode; ++n) {
        const auto i = *modes.index_of({m, 0, 0});
        const auto j = *modes.index_of({n, 0, 0});
        const cplx closed = a.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const ComplexQuadratureResult o = oracle_form_element(coeff, params, m, n, xi);
        rows.push_back({m, n, xi, closed, o.value, 0.0});
        scale = std::max(scale, std::abs(o.value));
      }
    }
  }
  double worst = 0.0;
  for (auto& r : rows) {
    const double diff = std::abs(r.closed - r.oracle);
    r.rel = diff == 0.0 ? 0.0 : diff / std::max(std::abs(r.oracle), 1e-9 * scale);
    worst = std::max(worst, r.rel);
  }

  auto out = open_csv(ctx.artifact("oracle_check.csv"));
  out << "# config_digest=" << ctx.digest << "\n";
  out << "m,n,xi,alpha,closed_re,closed_im,oracle_re,oracle_im,rel_error\n";
  for (const auto& r : rows)
    out << r.m << "," << r.n << "," << num(r.xi) << "," << num(params.alpha) << "," << num(r.closed.real())
        << "," << num(r.closed.imag()) << "," << num(r.oracle.real()) << "," << num(r.oracle.imag()) << ","
        << num(r.rel) << "\n";
  ctx.verdict("form_elements", worst <= tol.oracle_rel, worst, tol.oracle_rel,
              std::to_string(rows.size()) + " elements");
}

using Body = void (*)(Context&);

Body body_for(const std::string& name) {
  if (name == "validate") return cmd_validate;
  if (name == "constants") return cmd_constants;
  if (name == "fiber") return cmd_fiber;
  if (name == "thresholds") return cmd_thresholds;
  if (name == "rate-study") return cmd_rate_study;
  if (name == "oracle-check") return cmd_oracle_check;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"validate",   "constants",  "fiber",
                                              "thresholds", "rate-study", "oracle-check"};
  return names;
}

std::vector<RealVec> parse_xi_list(const std::string& text, int dimension) {
  std::vector<RealVec> out;
  std::stringstream points(text);
  std::string point;
  while (std::getline(points, point, ';')) {
    if (point.empty()) continue;
    RealVec xi{};
    std::stringstream comps(point);
    std::string c;
    int k = 0;
    while (std::getline(comps, c, ',')) {
      if (k >= dimension) throw InvalidArgument("quasimomentum has more than d components: " + point);
      std::size_t used = 0;
      try {
        xi[k] = std::stod(c, &used);
      } catch (const std::exception&) {
        throw InvalidArgument("cannot parse quasimomentum component '" + c + "'");
      }
      if (used != c.size()) throw InvalidArgument("cannot parse quasimomentum component '" + c + "'");
      ++k;
    }
    if (k != dimension) throw InvalidArgument("quasimomentum needs d components: " + point);
    check_quasimomentum(xi, dimension);
    out.push_back(xi);
  }
  if (out.empty()) throw InvalidArgument("empty quasimomentum list");
  return out;
}

bool RunReport::any_failed() const {
  for (const auto& v : verdicts)
    if (v.status == VerdictStatus::Fail) return true;
  return false;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["wall_time_seconds"] = wall_time_seconds;
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : verdicts) {
    nlohmann::json e{{"check", v.check}, {"status", status_name(v.status)}};
    if (v.value) e["value"] = *v.value;
    if (v.limit) e["limit"] = *v.limit;
    if (!v.detail.empty()) e["detail"] = v.detail;
    vs.push_back(e);
  }
  j["verdicts"] = vs;
  j["artifacts"] = artifacts;
  return j.dump(2) + "\n";
}

RunReport run_command(const CommandOptions& options, std::ostream& log) {
  RunReport report;
  report.command = options.command;
  const auto start = std::chrono::steady_clock::now();
  auto fail = [&](int code, const std::string& msg) {
    report.exit_code = code;
    report.error = msg;
    log << "error: " << msg << "\n";
  };

  const Body body = body_for(options.command);
  if (!body) {
    fail(1, "unknown command '" + options.command + "'");
    return report;
  }

  StudyConfig config;
  try {
    config = load_config(options.config_path.string());
    if (options.truncation) {
      config.truncation = *options.truncation;
      config.validate();
    }
  } catch (const std::exception& e) {
    fail(1, e.what());
    return report;
  }
  report.config_digest = config_digest(config);

  fs::path out_dir = options.out_dir ? *options.out_dir : fs::path(config.output.value_or("."));
  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    fail(1, e.what());
    return report;
  }

  Context ctx{options, log, config, report.config_digest, out_dir,
              options.workers > 0 ? options.workers : default_workers(), report};
  try {
    body(ctx);
    report.exit_code = report.any_failed() ? 2 : 0;
  } catch (const UsageError& e) {
    fail(1, e.what());
  } catch (const InvalidArgument& e) {
    fail(1, e.what());
  } catch (const Error& e) {
    fail(2, e.what());
  } catch (const std::ios_base::failure& e) {
    fail(1, e.what());
  } catch (const fs::filesystem_error& e) {
    fail(1, e.what());
  } catch (const std::exception& e) {
    fail(1, e.what());
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    std::ofstream rep(out_dir / (options.command + "_report.json"), std::ios::binary | std::ios::trunc);
    rep << report.to_json();
  } catch (const std::exception&) {
  }
  if (!quiet()) {
    for (const auto& v : report.verdicts) {
      log << status_name(v.status) << "  " << v.check;
      if (v.value) log << "  value=" << num(*v.value);
      if (v.limit) log << "  limit=" << num(*v.limit);
      if (!v.detail.empty()) log << "  (" << v.detail << ")";
      log << "\n";
    }
  }
  return report;
}

}  // namespace lhom
