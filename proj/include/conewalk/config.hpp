#pragma once

// Run configuration: a key = value text format with [section] headers.
//
//   seed = 42
//   [model]
//   family = wishart
//   dim = 2
//   delta = 3.5
//   [sim]
//   dt = 1e-4
//
// Keys inside a section are addressed as section.key (model.b, sim.dt).
// '#' starts a comment. Matrices use the literal format "2,1;1,2".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conewalk/error.hpp"
#include "conewalk/linalg.hpp"
#include "conewalk/model.hpp"
#include "conewalk/simulator.hpp"

namespace conewalk {

/// Every problem found in a config, each prefixed by its line or key path.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct ModelConfig {
  std::string family = "wishart";
  Index dim = 0;
  double alpha = 0.5;
  std::optional<MatrixXd> q;     // default identity
  std::optional<MatrixXd> beta;  // default zero
  std::optional<MatrixXd> b;     // exclusive with delta
  std::optional<double> delta;   // b = delta Q^T Q
  std::optional<double> floor_c; // default 2 Tr(beta); required for general
  double modulation_amplitude = 0.0;
  double modulation_frequency = 0.0;

  std::vector<std::string> gamma_forms;  // constant, congruence, scaled_trace
  std::optional<MatrixXd> gamma_c;
  std::vector<MatrixXd> gamma_a;
  double trace_offset = 0.0;
  double trace_coef = 0.0;
  double trace_power = 1.0;
  std::optional<MatrixXd> trace_c;

  std::string jump_kind = "none";
  double jump_rate = 0.0;
  std::string jump_mark_law = "rank_one";
  double jump_sigma = 1.0;
  double jump_mu = 1.0;
  std::optional<MatrixXd> jump_mark;
  std::vector<std::pair<double, MatrixXd>> jump_schedule;

  std::string k_form = "identity";
  std::optional<MatrixXd> k_a;
  double k_c = 1.0;
};

struct SimSection {
  double dt = 1e-3;
  double horizon = 1.0;
  std::optional<double> boundary_eps;
  std::string policy = "stop";
  int max_halvings = 4;
  std::size_t record_stride = 1;
};

struct ExperimentSection {
  std::size_t n_paths = 1000;
  std::size_t checkpoints = 5;
  std::string axis = "delta";
  std::vector<double> axis_values;
  std::string condition = "theorem_floor";
  std::optional<MatrixXd> check_x;  // state for gcir_pointwise; default x0
  std::size_t samples = 1000;
  std::optional<double> claimed_c;  // default: the model's drift floor
  std::vector<std::string> h_forms{"identity", "sqrt_state"};
  double quadrature_scale = 1.0;
};

struct OutputSection {
  std::string dir = ".";
  bool per_path_csv = false;
  bool timing = false;
};

struct RunConfig {
  std::string subcommand = "simulate";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::optional<MatrixXd> x0;  // default identity
  ModelConfig model;
  SimSection sim;
  ExperimentSection experiment;
  OutputSection output;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

inline const std::vector<std::string> kSubcommands{"simulate", "check", "verify", "mc", "sweep"};

/// Parses and validates. Throws ConfigError listing every problem.
RunConfig parse_config(std::string_view text);
/// Syntax and value parsing only; no cross-key validation.
RunConfig read_config(std::string_view text);

/// Checks a RunConfig built or modified in code (after flag overrides).
void validate_config(const RunConfig& cfg);

/// The effective config with every default written out; parse_config of
/// the result compares equal to `cfg`.
std::string emit_config(const RunConfig& cfg);

ModelSpec build_model(const RunConfig& cfg);
SimConfig build_sim_config(const RunConfig& cfg);
SymMatrixd build_x0(const RunConfig& cfg);

}  // namespace conewalk
