#include "conewalk/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "conewalk/conditions.hpp"
#include "conewalk/ito.hpp"
#include "conewalk/montecarlo.hpp"
#include "conewalk/text.hpp"

namespace conewalk {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::uint64_t parse_u64(std::string_view s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
    throw Error("expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

template <typename Int>
Int parse_count(std::string_view s) {
  const long long v = parse_integer(s);
  if (v < 0) throw Error("expected a non-negative integer, got '" + trim(s) + "'");
  return static_cast<Int>(v);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Key {
  std::string path;
  Setter set;
  Getter get;
};

// Accessors are generic lambdas returning a reference into the config, so
// one lambda serves the setter and the getter.

template <typename Acc>
Key real(std::string path, Acc acc) {
  return {std::move(path), [acc](RunConfig& c, const std::string& v) { acc(c) = parse_double(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> { return format_double(acc(c)); }};
}

template <typename Acc>
Key opt_real(std::string path, Acc acc) {
  return {std::move(path), [acc](RunConfig& c, const std::string& v) { acc(c) = parse_double(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> {
            if (!acc(c)) return std::nullopt;
            return format_double(*acc(c));
          }};
}

template <typename Int, typename Acc>
Key count(std::string path, Acc acc) {
  return {std::move(path), [acc](RunConfig& c, const std::string& v) { acc(c) = parse_count<Int>(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> { return std::to_string(acc(c)); }};
}

template <typename Acc>
Key text(std::string path, Acc acc) {
  return {std::move(path), [acc](RunConfig& c, const std::string& v) { acc(c) = trim(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> { return acc(c); }};
}

template <typename Acc>
Key flag(std::string path, Acc acc) {
  return {std::move(path), [acc](RunConfig& c, const std::string& v) { acc(c) = parse_bool(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> {
            return acc(c) ? std::string("true") : std::string("false");
          }};
}

template <typename Acc>
Key matrix(std::string path, Acc acc) {
  return {std::move(path),
          [acc](RunConfig& c, const std::string& v) { acc(c) = parse_matrix_literal(v); },
          [acc](const RunConfig& c) -> std::optional<std::string> {
            if (!acc(c)) return std::nullopt;
            return format_matrix_literal(*acc(c));
          }};
}

template <typename Acc>
Key matrix_list(std::string path, Acc acc) {
  return {std::move(path),
          [acc](RunConfig& c, const std::string& v) {
            acc(c).clear();
            for (const auto& part : split(v, '|')) acc(c).push_back(parse_matrix_literal(part));
          },
          [acc](const RunConfig& c) -> std::optional<std::string> {
            if (acc(c).empty()) return std::nullopt;
            std::vector<std::string> parts;
            for (const auto& m : acc(c)) parts.push_back(format_matrix_literal(m));
            return join(parts, " | ");
          }};
}

template <typename Acc>
Key word_list(std::string path, char sep, Acc acc) {
  return {std::move(path),
          [acc, sep](RunConfig& c, const std::string& v) {
            acc(c).clear();
            if (trim(v).empty()) return;
            for (auto& part : split(v, sep)) {
              if (part.empty()) throw Error("empty list entry");
              acc(c).push_back(part);
            }
          },
          [acc, sep](const RunConfig& c) -> std::optional<std::string> {
            return join(acc(c), sep == ',' ? ", " : std::string(" ") + sep + " ");
          }};
}

template <typename Acc>
Key real_list(std::string path, Acc acc) {
  return {std::move(path),
          [acc](RunConfig& c, const std::string& v) {
            acc(c).clear();
            if (trim(v).empty()) return;
            for (const auto& part : split(v, ',')) acc(c).push_back(parse_double(part));
          },
          [acc](const RunConfig& c) -> std::optional<std::string> {
            std::vector<std::string> parts;
            for (double x : acc(c)) parts.push_back(format_double(x));
            return join(parts, ", ");
          }};
}

Key schedule(std::string path) {
  return {std::move(path),
          [](RunConfig& c, const std::string& v) {
            auto& out = c.model.jump_schedule;
            out.clear();
            if (trim(v).empty()) return;
            for (const auto& entry : split(v, '|')) {
              const auto colon = entry.find(':');
              if (colon == std::string::npos) throw Error("schedule entries look like 't: matrix'");
              out.emplace_back(parse_double(entry.substr(0, colon)),
                               parse_matrix_literal(entry.substr(colon + 1)));
            }
          },
          [](const RunConfig& c) -> std::optional<std::string> {
            if (c.model.jump_schedule.empty()) return std::nullopt;
            std::vector<std::string> parts;
            for (const auto& [t, m] : c.model.jump_schedule) {
              parts.push_back(format_double(t) + ": " + format_matrix_literal(m));
            }
            return join(parts, " | ");
          }};
}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(text("subcommand", [](auto& c) -> auto& { return c.subcommand; }));
    k.push_back(count<std::uint64_t>("seed", [](auto& c) -> auto& { return c.seed; }));
    k.back().set = [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); };
    k.push_back(count<unsigned>("threads", [](auto& c) -> auto& { return c.threads; }));
    k.push_back(matrix("x0", [](auto& c) -> auto& { return c.x0; }));

    k.push_back(text("model.family", [](auto& c) -> auto& { return c.model.family; }));
    k.push_back(count<Index>("model.dim", [](auto& c) -> auto& { return c.model.dim; }));
    k.push_back(real("model.alpha", [](auto& c) -> auto& { return c.model.alpha; }));
    k.push_back(matrix("model.Q", [](auto& c) -> auto& { return c.model.q; }));
    k.push_back(matrix("model.beta", [](auto& c) -> auto& { return c.model.beta; }));
    k.push_back(matrix("model.b", [](auto& c) -> auto& { return c.model.b; }));
    k.push_back(opt_real("model.delta", [](auto& c) -> auto& { return c.model.delta; }));
    k.push_back(opt_real("model.floor_c", [](auto& c) -> auto& { return c.model.floor_c; }));
    k.push_back(real("model.modulation.amplitude",
                     [](auto& c) -> auto& { return c.model.modulation_amplitude; }));
    k.push_back(real("model.modulation.frequency",
                     [](auto& c) -> auto& { return c.model.modulation_frequency; }));
    k.push_back(word_list("model.gamma.form", ',', [](auto& c) -> auto& { return c.model.gamma_forms; }));
    k.push_back(matrix("model.gamma.C", [](auto& c) -> auto& { return c.model.gamma_c; }));
    k.push_back(matrix_list("model.gamma.A", [](auto& c) -> auto& { return c.model.gamma_a; }));
    k.push_back(real("model.gamma.trace_offset", [](auto& c) -> auto& { return c.model.trace_offset; }));
    k.push_back(real("model.gamma.trace_coef", [](auto& c) -> auto& { return c.model.trace_coef; }));
    k.push_back(real("model.gamma.trace_power", [](auto& c) -> auto& { return c.model.trace_power; }));
    k.push_back(matrix("model.gamma.trace_C", [](auto& c) -> auto& { return c.model.trace_c; }));
    k.push_back(text("model.jump.kind", [](auto& c) -> auto& { return c.model.jump_kind; }));
    k.push_back(real("model.jump.rate", [](auto& c) -> auto& { return c.model.jump_rate; }));
    k.push_back(text("model.jump.mark_law", [](auto& c) -> auto& { return c.model.jump_mark_law; }));
    k.push_back(real("model.jump.sigma", [](auto& c) -> auto& { return c.model.jump_sigma; }));
    k.push_back(real("model.jump.mu", [](auto& c) -> auto& { return c.model.jump_mu; }));
    k.push_back(matrix("model.jump.mark", [](auto& c) -> auto& { return c.model.jump_mark; }));
    k.push_back(schedule("model.jump.schedule"));
    k.push_back(text("model.k.form", [](auto& c) -> auto& { return c.model.k_form; }));
    k.push_back(matrix("model.k.A", [](auto& c) -> auto& { return c.model.k_a; }));
    k.push_back(real("model.k.c", [](auto& c) -> auto& { return c.model.k_c; }));

    k.push_back(real("sim.dt", [](auto& c) -> auto& { return c.sim.dt; }));
    k.push_back(real("sim.horizon", [](auto& c) -> auto& { return c.sim.horizon; }));
    k.push_back(opt_real("sim.boundary_eps", [](auto& c) -> auto& { return c.sim.boundary_eps; }));
    k.push_back(text("sim.policy", [](auto& c) -> auto& { return c.sim.policy; }));
    k.push_back(count<int>("sim.max_halvings", [](auto& c) -> auto& { return c.sim.max_halvings; }));
    k.push_back(count<std::size_t>("sim.record_stride", [](auto& c) -> auto& { return c.sim.record_stride; }));

    k.push_back(count<std::size_t>("experiment.n_paths", [](auto& c) -> auto& { return c.experiment.n_paths; }));
    k.push_back(count<std::size_t>("experiment.checkpoints",
                                   [](auto& c) -> auto& { return c.experiment.checkpoints; }));
    k.push_back(text("experiment.axis", [](auto& c) -> auto& { return c.experiment.axis; }));
    k.push_back(real_list("experiment.axis_values", [](auto& c) -> auto& { return c.experiment.axis_values; }));
    k.push_back(text("experiment.condition", [](auto& c) -> auto& { return c.experiment.condition; }));
    k.push_back(matrix("experiment.check_x", [](auto& c) -> auto& { return c.experiment.check_x; }));
    k.push_back(count<std::size_t>("experiment.samples", [](auto& c) -> auto& { return c.experiment.samples; }));
    k.push_back(opt_real("experiment.claimed_c", [](auto& c) -> auto& { return c.experiment.claimed_c; }));
    k.push_back(word_list("experiment.h_forms", '|', [](auto& c) -> auto& { return c.experiment.h_forms; }));
    k.push_back(real("experiment.quadrature_scale",
                     [](auto& c) -> auto& { return c.experiment.quadrature_scale; }));

    k.push_back(text("output.dir", [](auto& c) -> auto& { return c.output.dir; }));
    k.push_back(flag("output.per_path_csv", [](auto& c) -> auto& { return c.output.per_path_csv; }));
    k.push_back(flag("output.timing", [](auto& c) -> auto& { return c.output.timing; }));
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& path) {
  for (const auto& k : key_table()) {
    if (k.path == path) return &k;
  }
  return nullptr;
}

const std::set<std::string> kSections{"model", "sim", "experiment", "output"};

std::string shape(const MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_square(std::vector<std::string>& errors, const std::string& key, const MatrixXd& m, Index d) {
  if (m.rows() != d || m.cols() != d) {
    errors.push_back(key + ": expected " + std::to_string(d) + "x" + std::to_string(d) + ", got " + shape(m));
  }
}

template <typename Fn>
void attempt(std::vector<std::string>& errors, const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    errors.push_back(key + ": " + e.what());
  }
}

GammaSpec build_gamma(const ModelConfig& m) {
  GammaSpec g;
  for (const auto& form : m.gamma_forms) {
    if (form == "constant") {
      g = g + GammaSpec::constant(SymMatrixd(*m.gamma_c));
    } else if (form == "congruence") {
      g = g + GammaSpec::congruence(m.gamma_a);
    } else if (form == "scaled_trace") {
      g = g + GammaSpec::scaled_trace(m.trace_offset, m.trace_coef, m.trace_power, SymMatrixd(*m.trace_c));
    } else {
      throw Error("unknown gamma form '" + form + "'");
    }
  }
  return g;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : Error("invalid config: " + join(errors, "; ")), errors_(std::move(errors)) {}

bool operator==(const RunConfig& a, const RunConfig& b) {
  // Every field has exactly one key and its canonical text is exact
  // (shortest round-trip doubles), so comparing key values compares fields.
  for (const auto& k : key_table()) {
    if (k.get(a) != k.get(b)) return false;
  }
  return true;
}

void validate_config(const RunConfig& cfg) {
  std::vector<std::string> errors;
  const auto& m = cfg.model;

  if (std::find(kSubcommands.begin(), kSubcommands.end(), cfg.subcommand) == kSubcommands.end()) {
    errors.push_back("subcommand: unknown '" + cfg.subcommand + "' (expected " + join(kSubcommands, ", ") + ")");
  }

  std::optional<Family> family;
  attempt(errors, "model.family", [&] { family = family_from_string(m.family); });
  const Index d = m.dim;
  if (d < 1) errors.push_back("model.dim: required, must be >= 1");

  if (!(m.alpha >= 0.5 && m.alpha <= 1.0)) errors.push_back("model.alpha: alpha out of [0.5, 1]");
  if (m.b && m.delta) errors.push_back("model.delta: give either model.b or model.delta, not both");
  if (!m.b && !m.delta) errors.push_back("model.b: required (or give model.delta)");
  if (family == Family::ou) {
    if (m.q) errors.push_back("model.Q: family ou has no diffusion term");
    if (m.delta) errors.push_back("model.delta: family ou has no Q to scale");
  }
  if (family == Family::general) {
    if (!m.floor_c) errors.push_back("model.floor_c: required for family general");
    if (!(std::abs(m.modulation_amplitude) < 1.0)) {
      errors.push_back("model.modulation.amplitude: must satisfy |amplitude| < 1");
    }
    if (!(m.modulation_frequency >= 0.0)) errors.push_back("model.modulation.frequency: must be >= 0");
  }

  std::set<std::string> seen;
  for (const auto& form : m.gamma_forms) {
    if (!seen.insert(form).second) errors.push_back("model.gamma.form: '" + form + "' listed twice");
    if (form == "constant") {
      if (!m.gamma_c) errors.push_back("model.gamma.C: required by gamma form constant");
    } else if (form == "congruence") {
      if (m.gamma_a.empty()) errors.push_back("model.gamma.A: required by gamma form congruence");
    } else if (form == "scaled_trace") {
      if (!m.trace_c) errors.push_back("model.gamma.trace_C: required by gamma form scaled_trace");
    } else {
      errors.push_back("model.gamma.form: unknown form '" + form +
                       "' (expected constant, congruence or scaled_trace)");
    }
  }

  std::optional<JumpKind> jk;
  std::optional<MarkLaw> law;
  attempt(errors, "model.jump.kind", [&] { jk = jump_kind_from_string(m.jump_kind); });
  attempt(errors, "model.jump.mark_law", [&] { law = mark_law_from_string(m.jump_mark_law); });
  if (jk == JumpKind::compound_poisson) {
    if (!(m.jump_rate >= 0.0)) errors.push_back("model.jump.rate: must be >= 0");
    if (law == MarkLaw::constant_mark && !m.jump_mark) {
      errors.push_back("model.jump.mark: required by mark law constant_mark");
    }
  }
  if (jk == JumpKind::deterministic_schedule && m.jump_schedule.empty()) {
    errors.push_back("model.jump.schedule: required by jump kind deterministic_schedule");
  }
  std::optional<KForm> kf;
  attempt(errors, "model.k.form", [&] { kf = k_form_from_string(m.k_form); });
  if (kf == KForm::congruence && !m.k_a) errors.push_back("model.k.A: required by k.form congruence");
  if (!(m.k_c >= 0.0)) errors.push_back("model.k.c: must be >= 0");

  if (d >= 1) {
    if (m.q) check_square(errors, "model.Q", *m.q, d);
    if (m.beta) check_square(errors, "model.beta", *m.beta, d);
    if (m.b) check_square(errors, "model.b", *m.b, d);
    if (m.gamma_c) check_square(errors, "model.gamma.C", *m.gamma_c, d);
    for (const auto& a : m.gamma_a) check_square(errors, "model.gamma.A", a, d);
    if (m.trace_c) check_square(errors, "model.gamma.trace_C", *m.trace_c, d);
    if (m.jump_mark) check_square(errors, "model.jump.mark", *m.jump_mark, d);
    for (const auto& [t, mk] : m.jump_schedule) check_square(errors, "model.jump.schedule", mk, d);
    if (m.k_a) check_square(errors, "model.k.A", *m.k_a, d);
    if (cfg.x0) check_square(errors, "x0", *cfg.x0, d);
    if (cfg.experiment.check_x) check_square(errors, "experiment.check_x", *cfg.experiment.check_x, d);
  }

  const auto& s = cfg.sim;
  if (!(s.dt > 0.0)) errors.push_back("sim.dt: must be > 0");
  if (!(s.horizon > 0.0)) errors.push_back("sim.horizon: must be > 0");
  if (s.boundary_eps && !(*s.boundary_eps > 0.0)) errors.push_back("sim.boundary_eps: must be > 0");
  attempt(errors, "sim.policy", [&] { policy_from_string(s.policy); });
  if (s.max_halvings > 30) errors.push_back("sim.max_halvings: must lie in [0, 30]");
  if (s.record_stride < 1) errors.push_back("sim.record_stride: must be >= 1");

  const auto& e = cfg.experiment;
  if (e.n_paths < 1) errors.push_back("experiment.n_paths: must be >= 1");
  if (cfg.subcommand == "verify" && e.n_paths < kMinEnsemble) {
    errors.push_back("experiment.n_paths: verify needs at least " + std::to_string(kMinEnsemble) + " paths");
  }
  if (e.checkpoints < 1) errors.push_back("experiment.checkpoints: must be >= 1");
  if (e.samples < 1) errors.push_back("experiment.samples: must be >= 1");
  attempt(errors, "experiment.axis", [&] { sweep_axis_from_string(e.axis); });
  attempt(errors, "experiment.condition", [&] { condition_from_string(e.condition); });
  if (!std::isfinite(e.quadrature_scale)) errors.push_back("experiment.quadrature_scale: must be finite");

  if (errors.empty()) {
    std::optional<ModelSpec> model;
    attempt(errors, "model", [&] { model = build_model(cfg); });
    attempt(errors, "x0", [&] {
      const SymMatrixd x0 = build_x0(cfg);
      if (!(lambda_min(x0) > 0.0)) throw Error("must be positive definite");
    });
    if (model) {
      for (const auto& h : e.h_forms) {
        attempt(errors, "experiment.h_forms", [&] { hform_from_string(h, *model); });
      }
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

RunConfig parse_config(std::string_view input) {
  RunConfig cfg = read_config(input);
  validate_config(cfg);
  return cfg;
}

RunConfig read_config(std::string_view input) {
  RunConfig cfg;
  std::vector<std::string> errors;
  std::set<std::string> assigned;
  std::string section;
  std::istringstream in{std::string(input)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.contains(section)) {
        errors.push_back(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back(where + ": missing key");
      continue;
    }
    const std::string path = section.empty() ? key : section + "." + key;
    const Key* k = find_key(path);
    if (!k) {
      errors.push_back(where + ": unknown key '" + path + "'");
      continue;
    }
    if (!assigned.insert(path).second) {
      errors.push_back(where + ": duplicate key '" + path + "'");
      continue;
    }
    try {
      k->set(cfg, value);
    } catch (const std::exception& e) {
      errors.push_back(path + " (" + where + "): " + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  std::string current;
  for (const auto& k : key_table()) {
    const auto value = k.get(cfg);
    if (!value) continue;
    std::string section, name = k.path;
    for (const auto& s : kSections) {
      if (k.path.starts_with(s + ".")) {
        section = s;
        name = k.path.substr(s.size() + 1);
      }
    }
    if (section != current) {
      out << "\n[" << section << "]\n";
      current = section;
    }
    out << name << " = " << *value << "\n";
  }
  return out.str();
}

ModelSpec build_model(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const Index d = m.dim;
  const Family family = family_from_string(m.family);
  const MatrixXd q = m.q ? *m.q : MatrixXd(MatrixXd::Identity(d, d));
  const MatrixXd beta = m.beta ? *m.beta : MatrixXd(MatrixXd::Zero(d, d));
  const SymMatrixd b = m.b ? SymMatrixd(*m.b) : SymMatrixd(MatrixXd(m.delta.value_or(0.0) * q.transpose() * q));
  const GammaSpec gamma = build_gamma(m);

  ModelSpec model;
  switch (family) {
    case Family::wishart: model = ModelSpec::wishart(q, beta, b, gamma); break;
    case Family::gcir: model = ModelSpec::gcir(m.alpha, q, beta, b, gamma); break;
    case Family::ou: model = ModelSpec::ou(beta, b, gamma); break;
    case Family::general:
      model = ModelSpec::general(m.alpha, q, beta, b, gamma,
                                 Modulation{m.modulation_amplitude, m.modulation_frequency},
                                 m.floor_c.value_or(0.0));
      break;
  }
  if (m.floor_c) model.drift_floor = *m.floor_c;

  JumpSpec jump;
  jump.kind = jump_kind_from_string(m.jump_kind);
  jump.rate = m.jump_rate;
  jump.mark_law = mark_law_from_string(m.jump_mark_law);
  jump.sigma = m.jump_sigma;
  jump.mu = m.jump_mu;
  if (m.jump_mark) jump.constant_mark = SymMatrixd(*m.jump_mark);
  for (const auto& [t, mk] : m.jump_schedule) jump.schedule.push_back({t, SymMatrixd(mk)});

  KSpec k;
  switch (k_form_from_string(m.k_form)) {
    case KForm::identity: k = KSpec::identity(); break;
    case KForm::congruence: k = KSpec::congruence(*m.k_a); break;
    case KForm::scale: k = KSpec::scale(m.k_c); break;
    case KForm::state_congruence: k = KSpec::state_congruence(); break;
  }
  return model.with_jumps(std::move(jump), std::move(k));
}

SimConfig build_sim_config(const RunConfig& cfg) {
  SimConfig s;
  s.dt = cfg.sim.dt;
  s.horizon = cfg.sim.horizon;
  s.boundary_eps = cfg.sim.boundary_eps;
  s.policy = policy_from_string(cfg.sim.policy);
  s.max_halvings = cfg.sim.max_halvings;
  s.record_stride = cfg.sim.record_stride;
  s.seed = cfg.seed;
  return s;
}

SymMatrixd build_x0(const RunConfig& cfg) {
  return cfg.x0 ? SymMatrixd(*cfg.x0) : SymMatrixd::identity(cfg.model.dim);
}

}  // namespace conewalk
