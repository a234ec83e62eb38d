#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "conewalk/config.hpp"

namespace conewalk {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitCheckFailed = 3,
};

/// Command-line values that win over the config file.
struct Overrides {
  std::optional<std::string> subcommand;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<bool> timing;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

/// Dispatches a validated config. Outputs go to cfg.output.dir, a short
/// summary to `out`; errors are written to `err` as one JSON object.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_config + apply_overrides + run, mapping every failure to its exit
/// status.
int run_text(const std::string& config_text, const Overrides& o, std::ostream& out, std::ostream& err);

}  // namespace conewalk
