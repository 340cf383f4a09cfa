#include "lhom/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lhom/errors.hpp"
#include "lhom/fiber.hpp"

namespace lhom {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw InvalidArgument(std::string("unknown key '") + key + "' in " + where);
}

const json& require(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidArgument(std::string("missing key '") + key + "' in " + where);
  return *it;
}

template <class T>
T get_as(const json& v, const char* key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument(std::string("key '") + key + "' has the wrong type");
  }
}

double get_number(const json& v, const char* key) {
  if (!v.is_number()) throw InvalidArgument(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& v, const char* key) {
  if (!v.is_number_integer()) throw InvalidArgument(std::string("key '") + key + "' must be an integer");
  return v.get<int>();
}

LatticeVec lattice(const json& v, int d, const char* key) {
  if (!v.is_array() || static_cast<int>(v.size()) != d)
    throw InvalidArgument(std::string("'") + key + "' must be an integer array of length d");
  LatticeVec out{};
  for (int i = 0; i < d; ++i) out[i] = get_int(v[i], key);
  return out;
}

json lattice_json(const LatticeVec& v, int d) {
  json a = json::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

PeriodicCoefficient StudyConfig::coefficient_model() const {
  PeriodicCoefficient::ModeMap modes;
  for (const auto& r : coefficient) {
    const ModeKey key{r.k, r.l};
    if (modes.count(key)) throw InvalidArgument("duplicate coefficient record");
    modes[key] = cplx{r.re, r.im};
  }
  return PeriodicCoefficient(dimension, std::move(modes));
}

int StudyConfig::truncation_or_default() const {
  return truncation.value_or(default_truncation(dimension));
}

XiGridSpec StudyConfig::xi_grid_or_default() const {
  return xi_grid.value_or(default_xi_grid(dimension));
}

int StudyConfig::positivity_grid_or_default() const {
  return positivity_grid.value_or(default_positivity_grid(dimension));
}

void StudyConfig::validate() const {
  ModelParams::make(dimension, alpha);
  if (coefficient.empty()) throw InvalidArgument("coefficient list is empty");
  for (const auto& r : coefficient)
    if (!std::isfinite(r.re) || !std::isfinite(r.im))
      throw InvalidArgument("coefficient amplitudes must be finite");
  if (truncation && (*truncation < 1 || *truncation > 256))
    throw InvalidArgument("truncation must be in [1, 256]");
  if (xi_grid) {
    if (xi_grid->points_per_dim < 1 || xi_grid->points_per_dim > 4096)
      throw InvalidArgument("xi_grid.points_per_dim must be in [1, 4096]");
    if (xi_grid->radial_per_decade < 0 || xi_grid->radial_per_decade > 256)
      throw InvalidArgument("xi_grid.radial_per_decade must be in [0, 256]");
    if (!(xi_grid->radial_min_exp < xi_grid->radial_max_exp) || xi_grid->radial_min_exp < -12 ||
        xi_grid->radial_max_exp >= std::log10(3.141592653589793))
      throw InvalidArgument("xi_grid radial exponents must satisfy -12 <= min < max < log10(pi)");
  }
  if (epsilon) {
    if (!(epsilon->min > 0.0) || !(epsilon->max > epsilon->min) || epsilon->max > 1.0)
      throw InvalidArgument("epsilon range must satisfy 0 < min < max <= 1");
    if (epsilon->count < 2 || epsilon->count > 1000) throw InvalidArgument("epsilon.count must be in [2, 1000]");
  }
  if (tolerances) {
    if (!(tolerances->oracle_rel > 0.0) || !(tolerances->projector_abs > 0.0) ||
        !(tolerances->slope_margin >= 0.0))
      throw InvalidArgument("tolerances must be positive");
  }
  if (thresholds) {
    if (!(thresholds->min_radius > 0.0) || !(thresholds->max_radius > thresholds->min_radius) ||
        thresholds->max_radius > 3.141592653589793)
      throw InvalidArgument("thresholds radii must satisfy 0 < min < max <= pi");
    if (thresholds->count < 2 || thresholds->count > 1000)
      throw InvalidArgument("thresholds.count must be in [2, 1000]");
  }
  if (oracle) {
    if (oracle->max_mode < 0 || oracle->max_mode > 8) throw InvalidArgument("oracle.max_mode must be in [0, 8]");
    for (double x : oracle->xi)
      if (!(std::abs(x) <= 3.141592653589793)) throw InvalidArgument("oracle.xi values must lie in [-pi, pi]");
  }
  if (positivity_grid && (*positivity_grid < 16 || *positivity_grid > 4096))
    throw InvalidArgument("positivity_grid must be in [16, 4096]");
  if (output && output->empty()) throw InvalidArgument("output must be a non-empty path");
}

StudyConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  reject_unknown(j,
                 {"dimension", "alpha", "coefficient", "truncation", "xi_grid", "epsilon", "tolerances",
                  "thresholds", "oracle", "positivity_grid", "grid_check", "seed", "output"},
                 "config");
  StudyConfig c;
  c.dimension = get_int(require(j, "dimension", "config"), "dimension");
  c.alpha = get_number(require(j, "alpha", "config"), "alpha");
  if (c.dimension < 1 || c.dimension > kMaxDim) throw InvalidArgument("dimension must be 1..3");

  const json& coeff = require(j, "coefficient", "config");
  if (!coeff.is_array()) throw InvalidArgument("'coefficient' must be an array of records");
  for (const json& rec : coeff) {
    if (!rec.is_object()) throw InvalidArgument("coefficient records must be objects");
    reject_unknown(rec, {"k", "l", "re", "im"}, "coefficient record");
    CoefficientRecord r;
    r.k = lattice(require(rec, "k", "coefficient record"), c.dimension, "k");
    r.l = lattice(require(rec, "l", "coefficient record"), c.dimension, "l");
    r.re = get_number(require(rec, "re", "coefficient record"), "re");
    r.im = get_number(require(rec, "im", "coefficient record"), "im");
    c.coefficient.push_back(r);
  }

  if (auto it = j.find("truncation"); it != j.end()) c.truncation = get_int(*it, "truncation");
  if (auto it = j.find("xi_grid"); it != j.end()) {
    reject_unknown(*it, {"points_per_dim", "radial_min_exp", "radial_max_exp", "radial_per_decade",
                         "boundary_refinement"},
                   "xi_grid");
    XiGridSpec g = default_xi_grid(c.dimension);
    if (auto f = it->find("points_per_dim"); f != it->end()) g.points_per_dim = get_int(*f, "points_per_dim");
    if (auto f = it->find("radial_min_exp"); f != it->end()) g.radial_min_exp = get_number(*f, "radial_min_exp");
    if (auto f = it->find("radial_max_exp"); f != it->end()) g.radial_max_exp = get_number(*f, "radial_max_exp");
    if (auto f = it->find("radial_per_decade"); f != it->end())
      g.radial_per_decade = get_int(*f, "radial_per_decade");
    if (auto f = it->find("boundary_refinement"); f != it->end())
      g.boundary_refinement = get_as<bool>(*f, "boundary_refinement");
    c.xi_grid = g;
  }
  if (auto it = j.find("epsilon"); it != j.end()) {
    reject_unknown(*it, {"min", "max", "count"}, "epsilon");
    EpsilonSpec e;
    e.min = get_number(require(*it, "min", "epsilon"), "min");
    e.max = get_number(require(*it, "max", "epsilon"), "max");
    e.count = get_int(require(*it, "count", "epsilon"), "count");
    c.epsilon = e;
  }
  if (auto it = j.find("tolerances"); it != j.end()) {
    reject_unknown(*it, {"oracle_rel", "projector_abs", "slope_margin"}, "tolerances");
    ToleranceSpec t;
    if (auto f = it->find("oracle_rel"); f != it->end()) t.oracle_rel = get_number(*f, "oracle_rel");
    if (auto f = it->find("projector_abs"); f != it->end()) t.projector_abs = get_number(*f, "projector_abs");
    if (auto f = it->find("slope_margin"); f != it->end()) t.slope_margin = get_number(*f, "slope_margin");
    c.tolerances = t;
  }
  if (auto it = j.find("thresholds"); it != j.end()) {
    reject_unknown(*it, {"min_radius", "max_radius", "count"}, "thresholds");
    ThresholdSpec t;
    t.min_radius = get_number(require(*it, "min_radius", "thresholds"), "min_radius");
    t.max_radius = get_number(require(*it, "max_radius", "thresholds"), "max_radius");
    t.count = get_int(require(*it, "count", "thresholds"), "count");
    c.thresholds = t;
  }
  if (auto it = j.find("oracle"); it != j.end()) {
    reject_unknown(*it, {"max_mode", "xi"}, "oracle");
    OracleSpec o;
    o.max_mode = get_int(require(*it, "max_mode", "oracle"), "max_mode");
    const json& xs = require(*it, "xi", "oracle");
    if (!xs.is_array()) throw InvalidArgument("'oracle.xi' must be an array");
    o.xi.clear();
    for (const json& x : xs) o.xi.push_back(get_number(x, "xi"));
    c.oracle = o;
  }
  if (auto it = j.find("positivity_grid"); it != j.end()) c.positivity_grid = get_int(*it, "positivity_grid");
  if (auto it = j.find("grid_check"); it != j.end()) c.grid_check = get_as<bool>(*it, "grid_check");
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      throw InvalidArgument("'seed' must be a non-negative integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("output"); it != j.end()) c.output = get_as<std::string>(*it, "output");
  c.validate();
  return c;
}

StudyConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const StudyConfig& c) {
  json j;
  j["dimension"] = c.dimension;
  j["alpha"] = c.alpha;
  json coeff = json::array();
  for (const auto& r : c.coefficient)
    coeff.push_back({{"k", lattice_json(r.k, c.dimension)},
                     {"l", lattice_json(r.l, c.dimension)},
                     {"re", r.re},
                     {"im", r.im}});
  j["coefficient"] = coeff;
  if (c.truncation) j["truncation"] = *c.truncation;
  if (c.xi_grid)
    j["xi_grid"] = {{"points_per_dim", c.xi_grid->points_per_dim},
                    {"radial_min_exp", c.xi_grid->radial_min_exp},
                    {"radial_max_exp", c.xi_grid->radial_max_exp},
                    {"radial_per_decade", c.xi_grid->radial_per_decade},
                    {"boundary_refinement", c.xi_grid->boundary_refinement}};
  if (c.epsilon) j["epsilon"] = {{"min", c.epsilon->min}, {"max", c.epsilon->max}, {"count", c.epsilon->count}};
  if (c.tolerances)
    j["tolerances"] = {{"oracle_rel", c.tolerances->oracle_rel},
                       {"projector_abs", c.tolerances->projector_abs},
                       {"slope_margin", c.tolerances->slope_margin}};
  if (c.thresholds)
    j["thresholds"] = {{"min_radius", c.thresholds->min_radius},
                       {"max_radius", c.thresholds->max_radius},
                       {"count", c.thresholds->count}};
  if (c.oracle) j["oracle"] = {{"max_mode", c.oracle->max_mode}, {"xi", c.oracle->xi}};
  if (c.positivity_grid) j["positivity_grid"] = *c.positivity_grid;
  if (c.grid_check) j["grid_check"] = *c.grid_check;
  if (c.seed) j["seed"] = *c.seed;
  if (c.output) j["output"] = *c.output;
  return j.dump(2) + "\n";
}

std::string config_digest(const StudyConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<CoefficientRecord> records_from(const PeriodicCoefficient& coeff) {
  std::vector<CoefficientRecord> out;
  for (const auto& [key, v] : coeff.modes()) out.push_back({key.k, key.l, v.real(), v.imag()});
  return out;
}

}  // namespace lhom
