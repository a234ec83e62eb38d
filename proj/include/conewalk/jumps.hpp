#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conewalk/linalg.hpp"

namespace conewalk {

/// One jump of the driver J: time and PSD mark Delta J.
struct JumpEvent {
  double time = 0.0;
  SymMatrixd mark;
};

enum class JumpKind { none, compound_poisson, deterministic_schedule };
enum class MarkLaw { rank_one, diag_exponential, constant_mark };

/// Finite-activity, PSD-increasing pure-jump driver.
struct JumpSpec {
  JumpKind kind = JumpKind::none;
  double rate = 0.0;
  MarkLaw mark_law = MarkLaw::rank_one;
  double sigma = 1.0;  // rank_one: v ~ N(0, sigma^2 I), mark = v v^T
  double mu = 1.0;     // diag_exponential: mean of each diagonal entry
  std::optional<SymMatrixd> constant_mark;
  std::vector<JumpEvent> schedule;

  static JumpSpec none() { return {}; }
  static JumpSpec compound_poisson(double rate, MarkLaw law, double scale = 1.0);
  static JumpSpec compound_poisson(double rate, SymMatrixd constant_mark);
  static JumpSpec deterministic(std::vector<JumpEvent> schedule);

  /// Throws if the rate is negative, a constant mark is not PSD, or the
  /// schedule is not strictly increasing with PSD marks.
  void validate(Index dim) const;
};

enum class KForm { identity, congruence, scale, state_congruence };

/// Linear operator K(x) mapping PSD marks to PSD increments.
struct KSpec {
  KForm form = KForm::identity;
  MatrixXd a;        // congruence: y -> A y A^T
  double c = 1.0;    // scale: y -> c y, c >= 0

  static KSpec identity() { return {}; }
  static KSpec congruence(MatrixXd a) { return {KForm::congruence, std::move(a), 1.0}; }
  static KSpec scale(double c);
  static KSpec state_congruence() { return {KForm::state_congruence, {}, 1.0}; }
};

/// Jump times strictly increasing in (0, horizon], marks PSD, deterministic
/// in `seed`.
std::vector<JumpEvent> sample_jumps(const JumpSpec& spec, Index dim, double horizon,
                                    std::uint64_t seed);

/// K(x)(mark). Throws InvalidMarkError when the mark is outside the cone.
SymMatrixd apply_jump_operator(const KSpec& k, const SymMatrixd& x, const SymMatrixd& mark);

std::string to_string(JumpKind k);
std::string to_string(MarkLaw m);
std::string to_string(KForm k);
JumpKind jump_kind_from_string(const std::string& s);
MarkLaw mark_law_from_string(const std::string& s);
KForm k_form_from_string(const std::string& s);

}  // namespace conewalk
