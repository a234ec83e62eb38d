#include "conewalk/io.hpp"

#include <sstream>

#include "conewalk/text.hpp"

namespace conewalk {

using nlohmann::ordered_json;

namespace {

ordered_json matrix_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json bools_json(const std::vector<bool>& v) {
  ordered_json a = ordered_json::array();
  for (bool b : v) a.push_back(b);
  return a;
}

}  // namespace

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_path_csv(std::ostream& out, const Path& path) {
  const Index d = path.states.empty() ? 0 : path.states.front().dim();
  out << "# d=" << d << ",seed=" << path.seed << ",dt=" << format_double(path.config.dt)
      << ",policy=" << to_string(path.config.policy) << "\n";
  out << "t,det,lambda_min,trace,jump_flag";
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) out << ",X_" << i + 1 << j + 1;
  out << "\n";
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const auto& diag = path.diagnostics[k];
    out << format_double(path.times[k]) << ',' << format_double(diag.det) << ','
        << format_double(diag.lambda_min) << ',' << format_double(diag.trace) << ','
        << (diag.jump ? 1 : 0);
    const auto& x = path.states[k];
    for (Index i = 0; i < d; ++i)
      for (Index j = i; j < d; ++j) out << ',' << format_double(x(i, j));
    out << "\n";
  }
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j = ordered_json::object();
  std::istringstream in(emit_config(cfg));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      j[section] = ordered_json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (section.empty()) {
      j[key] = value;
    } else {
      j[section][key] = value;
    }
  }
  return j;
}

ordered_json path_sidecar_json(const Path& path, const RunConfig& cfg,
                               std::optional<double> runtime_seconds) {
  ordered_json j;
  j["config"] = config_json(cfg);
  j["seed"] = path.seed;
  j["boundary_eps"] = path.boundary_eps;
  if (path.boundary_event) {
    const auto& e = *path.boundary_event;
    j["boundary_event"] = {{"time", e.time}, {"lambda_min", e.lambda_min}, {"action", e.action}, {"step", e.step}};
  } else {
    j["boundary_event"] = nullptr;
  }
  j["stopped"] = path.stopped;
  j["steps"] = path.steps;
  j["halvings"] = path.halvings;
  j["clamps"] = path.clamps;
  j["min_lambda"] = path.min_lambda;
  ordered_json jumps = ordered_json::array();
  for (const auto& jr : path.jumps) {
    jumps.push_back({{"time", jr.time},
                     {"mark", matrix_json(jr.mark.matrix())},
                     {"increment", matrix_json(jr.increment.matrix())},
                     {"det_before", jr.det_before},
                     {"det_after", jr.det_after}});
  }
  j["jumps"] = std::move(jumps);
  if (runtime_seconds) j["runtime_seconds"] = *runtime_seconds;
  return j;
}

ordered_json check_json(const ConditionReport& r) {
  ordered_json j;
  j["condition_id"] = to_string(r.condition_id);
  j["verdict"] = to_string(r.verdict);
  j["exact"] = r.exact;
  j["samples"] = r.samples_used;
  j["seed"] = r.seed;
  j["sampling_law"] = r.sampling_law;
  if (r.witness) {
    ordered_json w;
    w["x"] = r.witness->x ? matrix_json(*r.witness->x) : ordered_json(nullptr);
    w["value"] = r.witness->value;
    if (r.witness->eigenvalue) w["eigenvalue"] = *r.witness->eigenvalue;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  if (r.condition_id == ConditionId::theorem_floor) j["floor_estimate"] = r.floor_estimate;
  j["lambda_qtq"] = r.lambda_qtq;
  return j;
}

ordered_json verify_json(const VerifyReport& r) {
  const auto& m = r.martingale;
  ordered_json j;
  j["checkpoints"] = m.checkpoints;
  j["n_records"] = m.n_records;
  j["stopped_paths"] = r.stopped_paths;
  j["m_mean"] = m.m_mean;
  j["m_se"] = m.m_se;
  j["qv_realized"] = m.qv_realized;
  j["qv_predicted"] = m.qv_predicted;
  j["qv_se"] = m.qv_se;
  j["allowance"] = m.allowance;
  j["floor_violations"] = m.floor_violations;
  j["jump_violations"] = r.jump_violations;
  ordered_json tb = ordered_json::array();
  for (const auto& t : r.trace) {
    tb.push_back({{"h_form", t.h_form},
                  {"horizon", t.horizon},
                  {"qv_mean", t.qv_mean},
                  {"qv_se", t.qv_se},
                  {"n", t.n},
                  {"pass", t.pass}});
  }
  j["trace_brownian_qv"] = std::move(tb);
  ordered_json pass;
  pass["mean_zero"] = bools_json(m.mean_pass);
  pass["qv_match"] = bools_json(m.qv_pass);
  pass["floor"] = m.floor_violations == 0;
  pass["jumps"] = r.jump_violations == 0;
  pass["overall"] = r.pass();
  j["pass"] = std::move(pass);
  return j;
}

ordered_json ensemble_json(const EnsembleResult& r) {
  ordered_json j;
  j["family"] = to_string(r.model.family);
  j["dim"] = r.model.dim;
  j["x0"] = matrix_json(r.x0.matrix());
  j["b"] = matrix_json(r.model.b.matrix());
  j["dt"] = r.config.dt;
  j["horizon"] = r.config.horizon;
  j["boundary_eps"] = optional_json(r.config.boundary_eps);
  j["master_seed"] = r.config.seed;
  j["n_paths"] = r.n_paths;
  j["hits"] = r.hits;
  j["errors"] = r.errors;
  j["hit_fraction"] = r.hit_fraction;
  j["min_lambda_quantiles"] = {{"q05", r.min_lambda_q05}, {"q50", r.min_lambda_q50}, {"q95", r.min_lambda_q95}};
  j["mean_first_proximity_time"] = optional_json(r.mean_first_proximity_time);
  j["jumps"] = r.jumps;
  j["jump_violations"] = r.jump_violations;
  ordered_json seeds = ordered_json::array();
  for (const auto& p : r.paths) seeds.push_back(p.seed);
  j["seeds"] = std::move(seeds);
  ordered_json errors = ordered_json::array();
  for (std::size_t i = 0; i < r.paths.size(); ++i) {
    if (r.paths[i].error) errors.push_back({{"path", i}, {"message", *r.paths[i].error}});
  }
  j["error_messages"] = std::move(errors);
  if (r.runtime_seconds) j["runtime_seconds"] = *r.runtime_seconds;
  return j;
}

ordered_json sweep_json(const SweepTable& t) {
  ordered_json j;
  j["axis"] = to_string(t.axis);
  ordered_json cells = ordered_json::array();
  for (const auto& c : t.cells) {
    ordered_json cell;
    cell["value"] = c.value;
    if (c.result) {
      ordered_json r = ensemble_json(*c.result);
      r.erase("seeds");
      cell["result"] = std::move(r);
    } else {
      cell["result"] = nullptr;
    }
    cell["error"] = optional_json(c.error);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

void write_per_path_csv(std::ostream& out, const EnsembleResult& r) {
  out << "seed,hit,first_proximity_time,min_lambda\n";
  for (const auto& p : r.paths) {
    out << p.seed << ',';
    if (p.error) {
      out << "error,,\n";
      continue;
    }
    out << (p.hit ? 1 : 0) << ',';
    if (p.first_proximity_time) out << format_double(*p.first_proximity_time);
    out << ',' << format_double(p.min_lambda) << "\n";
  }
}

}  // namespace conewalk
