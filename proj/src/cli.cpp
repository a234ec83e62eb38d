#include "conewalk/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "conewalk/conditions.hpp"
#include "conewalk/io.hpp"
#include "conewalk/ito.hpp"
#include "conewalk/montecarlo.hpp"
#include "conewalk/simulator.hpp"

namespace conewalk {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void report_error(std::ostream& err, const std::string& kind, const std::vector<std::string>& messages) {
  ordered_json j;
  j["error"] = kind;
  j["messages"] = messages;
  err << j.dump() << "\n";
}

class OutputError : public Error {
 public:
  using Error::Error;
};

std::ofstream open_output(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError("output.dir: cannot write " + p.string());
  return f;
}

void write_text(const fs::path& p, const std::string& s, std::ostream& out) {
  auto f = open_output(p);
  f << s;
  if (!f) throw OutputError("output.dir: failed writing " + p.string());
  out << "wrote " << p.string() << "\n";
}

SamplePlan plan_for(const RunConfig& cfg) {
  SamplePlan plan;
  plan.n = cfg.experiment.samples;
  plan.seed = cfg.seed;
  return plan;
}

ConditionReport run_check(const RunConfig& cfg, const ModelSpec& model) {
  const ConditionId id = condition_from_string(cfg.experiment.condition);
  switch (id) {
    case ConditionId::wishart_drift:
      return check_wishart_drift(model.b, model.q, model.dim);
    case ConditionId::gcir_pointwise: {
      const SymMatrixd x = cfg.experiment.check_x ? SymMatrixd(*cfg.experiment.check_x) : build_x0(cfg);
      const auto params = GcirParams::from_model(model);
      ConditionReport r;
      r.condition_id = id;
      r.exact = true;
      r.samples_used = 1;
      r.seed = cfg.seed;
      r.sampling_law = "single state";
      r.verdict = check_gcir_pointwise(params, x) ? Verdict::pass : Verdict::fail;
      r.witness = Witness{x.matrix(), gcir_pointwise_gap(params, x), std::nullopt};
      return r;
    }
    case ConditionId::theorem_floor:
      return check_theorem_floor(model, plan_for(cfg), cfg.experiment.claimed_c.value_or(model.drift_floor));
    default:
      return check_gcir_sufficient(variant_from_condition(id), GcirParams::from_model(model), plan_for(cfg));
  }
}

}  // namespace

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.subcommand) cfg.subcommand = *o.subcommand;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.output.dir = *o.out_dir;
  if (o.threads) cfg.threads = *o.threads;
  if (o.timing) cfg.output.timing = *o.timing;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir(cfg.output.dir);
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw OutputError("output.dir: cannot create " + dir.string());

    const ModelSpec model = build_model(cfg);
    const SymMatrixd x0 = build_x0(cfg);
    const SimConfig sim = build_sim_config(cfg);
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&]() -> std::optional<double> {
      if (!cfg.output.timing) return std::nullopt;
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (cfg.subcommand == "simulate") {
      const Path path = simulate_path(model, x0, sim);
      std::ostringstream csv;
      write_path_csv(csv, path);
      write_text(dir / "path.csv", csv.str(), out);
      write_text(dir / "path.json", dump(path_sidecar_json(path, cfg, elapsed())), out);
      return kExitOk;
    }
    if (cfg.subcommand == "check") {
      const ConditionReport r = run_check(cfg, model);
      write_text(dir / "check.json", dump(check_json(r)), out);
      out << to_string(r.condition_id) << ": " << to_string(r.verdict) << "\n";
      return r.verdict == Verdict::fail ? kExitCheckFailed : kExitOk;
    }
    if (cfg.subcommand == "verify") {
      VerifyOptions vo;
      vo.n_paths = cfg.experiment.n_paths;
      vo.n_checkpoints = cfg.experiment.checkpoints;
      vo.quadrature_scale = cfg.experiment.quadrature_scale;
      vo.threads = cfg.threads;
      for (const auto& h : cfg.experiment.h_forms) vo.h_forms.push_back(hform_from_string(h, model));
      const VerifyReport r = verify_ensemble(model, x0, sim, vo);
      ordered_json j = verify_json(r);
      if (auto t = elapsed()) j["runtime_seconds"] = *t;
      write_text(dir / "verify.json", dump(j), out);
      out << "verify: " << (r.pass() ? "pass" : "fail") << "\n";
      return r.pass() ? kExitOk : kExitCheckFailed;
    }
    EnsembleOptions eo;
    eo.n_paths = cfg.experiment.n_paths;
    eo.threads = cfg.threads;
    eo.timing = cfg.output.timing;
    if (cfg.subcommand == "mc") {
      const EnsembleResult r = boundary_stats(model, x0, sim, eo);
      write_text(dir / "mc.json", dump(ensemble_json(r)), out);
      if (cfg.output.per_path_csv) {
        std::ostringstream csv;
        write_per_path_csv(csv, r);
        write_text(dir / "mc_paths.csv", csv.str(), out);
      }
      out << "hit_fraction: " << r.hit_fraction << "\n";
      return kExitOk;
    }
    if (cfg.subcommand == "sweep") {
      const SweepTable t = regime_sweep(model, x0, sim, sweep_axis_from_string(cfg.experiment.axis),
                                        cfg.experiment.axis_values, eo);
      write_text(dir / "sweep.json", dump(sweep_json(t)), out);
      return kExitOk;
    }
    report_error(err, "validation", {"subcommand: unknown '" + cfg.subcommand + "'"});
    return kExitValidation;
  } catch (const ConfigError& e) {
    report_error(err, "validation", e.errors());
    return kExitValidation;
  } catch (const OutputError& e) {
    report_error(err, "validation", {e.what()});
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, "runtime", {e.what()});
    return kExitRuntime;
  }
}

int run_text(const std::string& config_text, const Overrides& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = read_config(config_text);
    apply_overrides(cfg, o);
    validate_config(cfg);
  } catch (const ConfigError& e) {
    report_error(err, "validation", e.errors());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error(err, "validation", {e.what()});
    return kExitValidation;
  }
  return run(cfg, out, err);
}

}  // namespace conewalk
