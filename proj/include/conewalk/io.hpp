#pragma once

#include <optional>
#include <ostream>

#include <json.hpp>

#include "conewalk/conditions.hpp"
#include "conewalk/config.hpp"
#include "conewalk/ito.hpp"
#include "conewalk/montecarlo.hpp"
#include "conewalk/simulator.hpp"

namespace conewalk {

/// One comment line "# d=..,seed=..,dt=..,policy=..", the column header
///   t,det,lambda_min,trace,jump_flag,X_11,X_12,...,X_dd
/// (upper triangle, row-major), then one row per recorded state.
void write_path_csv(std::ostream& out, const Path& path);

/// Config echo, boundary event, counters and jumps. `runtime_seconds` is
/// written only when given.
nlohmann::ordered_json path_sidecar_json(const Path& path, const RunConfig& cfg,
                                         std::optional<double> runtime_seconds = std::nullopt);

nlohmann::ordered_json config_json(const RunConfig& cfg);
nlohmann::ordered_json check_json(const ConditionReport& report);
nlohmann::ordered_json verify_json(const VerifyReport& report);
nlohmann::ordered_json ensemble_json(const EnsembleResult& result);
nlohmann::ordered_json sweep_json(const SweepTable& table);

/// seed,hit,first_proximity_time,min_lambda (empty time for non-hitters,
/// "error" in the hit column for failed paths).
void write_per_path_csv(std::ostream& out, const EnsembleResult& result);

/// Fixed-format dump: two-space indent and a trailing newline.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace conewalk
