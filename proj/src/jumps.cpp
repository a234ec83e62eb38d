#include "conewalk/jumps.hpp"

#include <cmath>

#include "conewalk/rng.hpp"

namespace conewalk {

JumpSpec JumpSpec::compound_poisson(double rate, MarkLaw law, double scale) {
  JumpSpec s;
  s.kind = JumpKind::compound_poisson;
  s.rate = rate;
  s.mark_law = law;
  s.sigma = scale;
  s.mu = scale;
  return s;
}

JumpSpec JumpSpec::compound_poisson(double rate, SymMatrixd constant_mark) {
  JumpSpec s;
  s.kind = JumpKind::compound_poisson;
  s.rate = rate;
  s.mark_law = MarkLaw::constant_mark;
  s.constant_mark = std::move(constant_mark);
  return s;
}

JumpSpec JumpSpec::deterministic(std::vector<JumpEvent> schedule) {
  JumpSpec s;
  s.kind = JumpKind::deterministic_schedule;
  s.schedule = std::move(schedule);
  return s;
}

void JumpSpec::validate(Index dim) const {
  auto check_mark = [dim](const SymMatrixd& m, const std::string& what) {
    if (m.dim() != dim) throw DimensionError(what + ": mark has wrong dimension");
    if (!is_psd(m)) throw InvalidMarkError(what + ": mark is not positive semidefinite");
  };
  switch (kind) {
    case JumpKind::none:
      return;
    case JumpKind::compound_poisson:
      if (!(rate >= 0.0) || !std::isfinite(rate)) throw Error("jump rate must be >= 0");
      if (mark_law == MarkLaw::constant_mark) {
        if (!constant_mark) throw Error("constant_mark law requires a mark");
        check_mark(*constant_mark, "jump.mark");
      }
      if (mark_law == MarkLaw::rank_one && !(sigma >= 0.0)) throw Error("jump.sigma must be >= 0");
      if (mark_law == MarkLaw::diag_exponential && !(mu >= 0.0)) throw Error("jump.mu must be >= 0");
      return;
    case JumpKind::deterministic_schedule: {
      double prev = 0.0;
      for (const auto& e : schedule) {
        if (!(e.time > prev)) throw Error("jump schedule times must be strictly increasing and > 0");
        prev = e.time;
        check_mark(e.mark, "jump.schedule");
      }
      return;
    }
  }
}

KSpec KSpec::scale(double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("KSpec::scale requires c >= 0");
  return {KForm::scale, {}, c};
}

namespace {

SymMatrixd draw_mark(const JumpSpec& spec, Index d, const CounterRng& rng,
                     std::uint64_t& counter) {
  switch (spec.mark_law) {
    case MarkLaw::rank_one: {
      Eigen::VectorXd v(d);
      for (Index i = 0; i < d; ++i) v(i) = spec.sigma * rng.normal(counter++);
      return SymMatrixd(MatrixXd(v * v.transpose()));
    }
    case MarkLaw::diag_exponential: {
      Eigen::VectorXd diag(d);
      for (Index i = 0; i < d; ++i) diag(i) = rng.exponential(counter++, spec.mu);
      return SymMatrixd::diagonal(diag);
    }
    case MarkLaw::constant_mark:
      return *spec.constant_mark;
  }
  return SymMatrixd::zero(d);
}

}  // namespace

std::vector<JumpEvent> sample_jumps(const JumpSpec& spec, Index dim, double horizon,
                                    std::uint64_t seed) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("sample_jumps: horizon must be positive and finite");
  }
  spec.validate(dim);
  std::vector<JumpEvent> out;
  switch (spec.kind) {
    case JumpKind::none:
      break;
    case JumpKind::deterministic_schedule:
      for (const auto& e : spec.schedule) {
        if (e.time <= horizon) out.push_back(e);
      }
      break;
    case JumpKind::compound_poisson: {
      if (spec.rate == 0.0) break;
      const CounterRng rng(seed);
      std::uint64_t counter = 0;
      double t = 0.0;
      while (true) {
        t += rng.exponential(counter++, 1.0 / spec.rate);
        if (t > horizon) break;
        if (!out.empty() && !(t > out.back().time)) continue;
        out.push_back({t, draw_mark(spec, dim, rng, counter)});
      }
      break;
    }
  }
  return out;
}

SymMatrixd apply_jump_operator(const KSpec& k, const SymMatrixd& x, const SymMatrixd& mark) {
  if (mark.dim() != x.dim()) throw DimensionError("apply_jump_operator: dimension mismatch");
  if (!is_psd(mark)) throw InvalidMarkError("apply_jump_operator: mark is not positive semidefinite");
  switch (k.form) {
    case KForm::identity:
      return mark;
    case KForm::congruence:
      if (k.a.rows() != x.dim() || k.a.cols() != x.dim()) {
        throw DimensionError("apply_jump_operator: congruence matrix has wrong dimension");
      }
      return SymMatrixd(MatrixXd(k.a * mark.matrix() * k.a.transpose()));
    case KForm::scale:
      return mark * k.c;
    case KForm::state_congruence: {
      const auto root = psd_power(x, 0.5).matrix();
      return SymMatrixd(MatrixXd(root * mark.matrix() * root));
    }
  }
  return mark;
}

std::string to_string(JumpKind k) {
  switch (k) {
    case JumpKind::none: return "none";
    case JumpKind::compound_poisson: return "compound_poisson";
    case JumpKind::deterministic_schedule: return "deterministic_schedule";
  }
  return "none";
}

std::string to_string(MarkLaw m) {
  switch (m) {
    case MarkLaw::rank_one: return "rank_one";
    case MarkLaw::diag_exponential: return "diag_exponential";
    case MarkLaw::constant_mark: return "constant_mark";
  }
  return "rank_one";
}

std::string to_string(KForm k) {
  switch (k) {
    case KForm::identity: return "identity";
    case KForm::congruence: return "congruence";
    case KForm::scale: return "scale";
    case KForm::state_congruence: return "state_congruence";
  }
  return "identity";
}

JumpKind jump_kind_from_string(const std::string& s) {
  if (s == "none") return JumpKind::none;
  if (s == "compound_poisson") return JumpKind::compound_poisson;
  if (s == "deterministic_schedule") return JumpKind::deterministic_schedule;
  throw Error("unknown jump kind '" + s + "'");
}

MarkLaw mark_law_from_string(const std::string& s) {
  if (s == "rank_one") return MarkLaw::rank_one;
  if (s == "diag_exponential") return MarkLaw::diag_exponential;
  if (s == "constant_mark") return MarkLaw::constant_mark;
  throw Error("unknown mark law '" + s + "'");
}

KForm k_form_from_string(const std::string& s) {
  if (s == "identity") return KForm::identity;
  if (s == "congruence") return KForm::congruence;
  if (s == "scale") return KForm::scale;
  if (s == "state_congruence") return KForm::state_congruence;
  throw Error("unknown k.form '" + s + "'");
}

}  // namespace conewalk
