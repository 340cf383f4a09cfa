#pragma once

// Batch commands behind the `lhom` executable. Each command loads a
// StudyConfig, runs its checks, writes CSV artifacts and a JSON run report
// into the output directory, and maps the outcome to an exit code:
// 0 pass, 1 usage or I/O error, 2 verification failure.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lhom/coefficient.hpp"

namespace lhom {

enum class VerdictStatus { Pass, Fail, Skip };

struct Verdict {
  std::string check;
  VerdictStatus status = VerdictStatus::Skip;
  std::optional<double> value;
  std::optional<double> limit;
  std::string detail;
};

struct RunReport {
  std::string command;
  std::string config_digest;
  double wall_time_seconds = 0.0;
  std::vector<Verdict> verdicts;
  std::vector<std::string> artifacts;
  std::string error;  // message of an aborting exception, if any
  int exit_code = 0;

  bool any_failed() const;
  std::string to_json() const;
};

struct CommandOptions {
  std::string command;
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;  // default: config "output", else "."
  int workers = 0;                               // 0: all cores
  std::optional<int> truncation;
  std::string xi_list;  // `fiber` only, see parse_xi_list
};

// Parses "a,b;c,d" into quasimomenta of the given dimension.
std::vector<RealVec> parse_xi_list(const std::string& text, int dimension);

// Runs one command; never throws. Human-readable progress goes to `log`.
RunReport run_command(const CommandOptions& options, std::ostream& log);

const std::vector<std::string>& command_names();

}  // namespace lhom
