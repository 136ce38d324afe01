// devroll - scenario files
//
// A scenario is a strict JSON document (unknown keys are rejected) naming a
// manifold, a command, its parameters, integrator options and a seed. Running it
// writes a JSON report (and CSV trajectories) into an output directory and maps
// the outcome to an exit code. The schema is documented in docs/scenario.md.

#ifndef DEVROLL_SCENARIO_HPP
#define DEVROLL_SCENARIO_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "devroll/core.hpp"

namespace devroll::scenario {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { ok = 0, gate_failed = 1, invalid_input = 2, numerical_failure = 3 };

// Scenario does not match the schema.
class SchemaError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool frames = false;  // frame / X columns in CSV output
  bool quiet = false;
};

struct RunResult {
  int exit_code = ok;
  std::string message;                // one-line diagnostic for non-zero codes
  std::vector<std::string> artifacts;  // written files, relative to out_dir
  nlohmann::json report;
};

const std::vector<std::string>& commands();

RunResult run(const nlohmann::json& scenario, const RunOptions& opts);
// Reads and parses the file; unreadable or malformed files give invalid_input.
RunResult run_file(const std::filesystem::path& path, const RunOptions& opts);

}  // namespace devroll::scenario

#endif  // DEVROLL_SCENARIO_HPP
