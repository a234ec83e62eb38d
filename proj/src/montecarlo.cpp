#include "conewalk/montecarlo.hpp"

#include <chrono>
#include <limits>

#include "conewalk/parallel.hpp"
#include "conewalk/rng.hpp"
#include "conewalk/stats.hpp"

namespace conewalk {

EnsembleResult boundary_stats(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg,
                              const EnsembleOptions& opts) {
  if (opts.n_paths < 1) throw Error("n_paths must be >= 1");
  model.validate();
  SimConfig run = cfg;
  run.policy = BoundaryPolicy::stop;
  run.record_increments = false;
  // Only the summary is needed; jump instants and the last point are
  // recorded regardless of the stride.
  run.record_stride = std::numeric_limits<std::size_t>::max();
  run.validate();

  const auto start = std::chrono::steady_clock::now();
  std::vector<PathSummary> paths(opts.n_paths);
  parallel_for(opts.n_paths, resolve_threads(opts.threads), [&](std::size_t i) {
    SimConfig pc = run;
    pc.seed = derive_seed(run.seed, i);
    PathSummary& s = paths[i];
    s.seed = pc.seed;
    try {
      const Path p = simulate_path(model, x0, pc);
      s.hit = p.stopped;
      if (p.boundary_event) s.first_proximity_time = p.boundary_event->time;
      s.min_lambda = p.min_lambda;
      s.jumps = p.jumps.size();
      s.jump_violations = count_jump_violations(p);
    } catch (const Error& e) {
      s.error = e.what();
    }
  });

  EnsembleResult r;
  r.model = model;
  r.x0 = x0;
  r.config = run;
  r.config.record_stride = cfg.record_stride;
  r.n_paths = opts.n_paths;
  std::vector<double> lambdas;
  RunningStats hit_time;
  for (const auto& s : paths) {
    if (s.error) {
      ++r.errors;
      continue;
    }
    lambdas.push_back(s.min_lambda);
    r.jumps += s.jumps;
    r.jump_violations += s.jump_violations;
    if (s.hit) {
      ++r.hits;
      hit_time.push(*s.first_proximity_time);
    }
  }
  const std::size_t done = r.n_paths - r.errors;
  if (done > 0) {
    r.hit_fraction = static_cast<double>(r.hits) / static_cast<double>(done);
    r.min_lambda_q05 = quantile(lambdas, 0.05);
    r.min_lambda_q50 = quantile(lambdas, 0.50);
    r.min_lambda_q95 = quantile(lambdas, 0.95);
  }
  if (r.hits > 0) r.mean_first_proximity_time = hit_time.mean();
  r.paths = std::move(paths);
  if (opts.timing) {
    r.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::delta: return "delta";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::jump_rate: return "jump_rate";
    case SweepAxis::dt: return "dt";
  }
  return "delta";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "delta") return SweepAxis::delta;
  if (s == "alpha") return SweepAxis::alpha;
  if (s == "jump_rate") return SweepAxis::jump_rate;
  if (s == "dt") return SweepAxis::dt;
  throw Error("unknown sweep axis '" + s + "' (expected delta, alpha, jump_rate or dt)");
}

void apply_axis(SweepAxis axis, double value, ModelSpec& model, SimConfig& cfg) {
  switch (axis) {
    case SweepAxis::delta:
      if (model.family == Family::ou) throw Error("axis delta needs a model with Q");
      model.b = model.qtq() * value;
      break;
    case SweepAxis::alpha:
      if (model.family != Family::gcir && model.family != Family::general) {
        throw Error("axis alpha applies to the gcir and general families");
      }
      model.alpha = value;
      break;
    case SweepAxis::jump_rate:
      if (model.jump.kind != JumpKind::compound_poisson) {
        throw Error("axis jump_rate needs compound Poisson jumps");
      }
      model.jump.rate = value;
      break;
    case SweepAxis::dt:
      cfg.dt = value;
      break;
  }
  model.validate();
  cfg.validate();
}

SweepTable regime_sweep(const ModelSpec& base, const SymMatrixd& x0, const SimConfig& cfg,
                        SweepAxis axis, const std::vector<double>& values,
                        const EnsembleOptions& opts) {
  SweepTable table{axis, {}};
  for (double v : values) {
    SweepCell cell{v, std::nullopt, std::nullopt};
    try {
      ModelSpec m = base;
      SimConfig c = cfg;
      apply_axis(axis, v, m, c);
      cell.result = boundary_stats(m, x0, c, opts);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

}  // namespace conewalk
