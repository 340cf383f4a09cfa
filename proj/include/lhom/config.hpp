#pragma once

// JSON study configuration. Required keys: "dimension", "alpha",
// "coefficient". Every other section is optional; absent sections resolve to
// the documented defaults through the accessors below, and are not written
// back on serialization, so parse(serialize(c)) == c.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lhom/coefficient.hpp"
#include "lhom/homogenization.hpp"

namespace lhom {

struct CoefficientRecord {
  LatticeVec k{};
  LatticeVec l{};
  double re = 0.0;
  double im = 0.0;
  bool operator==(const CoefficientRecord&) const = default;
};

struct EpsilonSpec {
  double min = 1e-3;
  double max = 1e-1;
  int count = 12;  // log-spaced
  bool operator==(const EpsilonSpec&) const = default;
};

struct ToleranceSpec {
  double oracle_rel = 1e-3;
  double projector_abs = 1e-8;
  double slope_margin = 0.1;
  bool operator==(const ToleranceSpec&) const = default;
};

// |xi| values for the thresholds command, log-spaced along direction e_1,
// plus xi = 0.
struct ThresholdSpec {
  double min_radius = 1e-3;
  double max_radius = 1e-1;
  int count = 12;
  bool operator==(const ThresholdSpec&) const = default;
};

// Elements checked by oracle-check: |m|, |n| <= max_mode at each xi.
struct OracleSpec {
  int max_mode = 2;
  std::vector<double> xi{0.3, 1.0};
  bool operator==(const OracleSpec&) const = default;
};

struct StudyConfig {
  int dimension = 1;
  double alpha = 1.0;
  std::vector<CoefficientRecord> coefficient;
  std::optional<int> truncation;
  std::optional<XiGridSpec> xi_grid;
  std::optional<EpsilonSpec> epsilon;
  std::optional<ToleranceSpec> tolerances;
  std::optional<ThresholdSpec> thresholds;
  std::optional<OracleSpec> oracle;
  std::optional<int> positivity_grid;
  std::optional<bool> grid_check;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;

  bool operator==(const StudyConfig&) const = default;

  ModelParams params() const { return ModelParams::make(dimension, alpha); }
  PeriodicCoefficient coefficient_model() const;
  int truncation_or_default() const;
  XiGridSpec xi_grid_or_default() const;
  EpsilonSpec epsilon_or_default() const { return epsilon.value_or(EpsilonSpec{}); }
  ToleranceSpec tolerances_or_default() const { return tolerances.value_or(ToleranceSpec{}); }
  ThresholdSpec thresholds_or_default() const { return thresholds.value_or(ThresholdSpec{}); }
  OracleSpec oracle_or_default() const { return oracle.value_or(OracleSpec{}); }
  int positivity_grid_or_default() const;
  std::uint64_t seed_or_default() const { return seed.value_or(0); }

  // Throws InvalidArgument for out-of-range fields.
  void validate() const;
};

// Throws InvalidArgument on malformed JSON, unknown keys or invalid values.
StudyConfig parse_config(const std::string& text);
StudyConfig load_config(const std::string& path);
// Canonical text: sorted keys, shortest round-trip doubles.
std::string serialize_config(const StudyConfig& config);
// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_digest(const StudyConfig& config);

std::vector<CoefficientRecord> records_from(const PeriodicCoefficient& coeff);

}  // namespace lhom
