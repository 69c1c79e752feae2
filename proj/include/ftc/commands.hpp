#pragma once

#include <ftc/json_io.hpp>
#include <ftc/pmp.hpp>
#include <ftc/systems.hpp>

#include <string>
#include <utility>
#include <vector>

namespace ftc {

/// Non-error command outcomes; values double as CLI exit codes.
enum class Outcome : int {
  Ok = 0,
  AuditFail = 4,
  LambdaEmpty = 5,
  AttainRefused = 6,
  AttainFailed = 7,
};

struct CommandResult {
  Outcome outcome = Outcome::Ok;
  std::string json;  // main report, also written as <command>.json / summary.json
  std::vector<std::pair<std::string, std::string>> artifacts;  // file name -> contents
};

/// Runs one of simulate | audit | lambda | chatter | attain | value.
/// Throws ftc::Error on configuration, lookup and numerical failures.
CommandResult run_command(const std::string& command, const Json& request);

std::vector<std::string> command_names();

ScenarioParams scenario_params_from_json(const Json& j);

/// Reference pair sampled on a mesh over [t1, t2_hat] with `cells_per_unit` density.
ReferencePair resolve_pair(const Scenario& sc, const ReferencePairSpec& spec, int cells_per_unit);

}  // namespace ftc
