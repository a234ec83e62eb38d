#include "conewalk/simulator.hpp"

#include <cmath>
#include <limits>

#include "conewalk/rng.hpp"

namespace conewalk {

std::string to_string(BoundaryPolicy p) {
  switch (p) {
    case BoundaryPolicy::stop: return "stop";
    case BoundaryPolicy::clamp: return "clamp";
    case BoundaryPolicy::halve: return "halve";
  }
  return "stop";
}

BoundaryPolicy policy_from_string(const std::string& s) {
  if (s == "stop") return BoundaryPolicy::stop;
  if (s == "clamp") return BoundaryPolicy::clamp;
  if (s == "halve") return BoundaryPolicy::halve;
  throw Error("unknown boundary policy '" + s + "'");
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("sim.dt must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error("sim.horizon must be > 0");
  if (boundary_eps && !(*boundary_eps > 0.0)) throw Error("sim.boundary_eps must be > 0");
  if (max_halvings < 0 || max_halvings > 30) throw Error("sim.max_halvings must lie in [0, 30]");
  if (record_stride < 1) throw Error("sim.record_stride must be >= 1");
  if (record_increments && record_stride != 1) {
    throw Error("recording increments requires sim.record_stride = 1");
  }
}

double SimConfig::eps_for(const SymMatrixd& x0) const {
  return boundary_eps ? *boundary_eps : 1e-8 * x0.norm();
}

NoiseIncrement NoiseIncrement::draw(std::uint64_t path_seed, std::uint64_t base_step,
                                    std::uint64_t piece, int level, std::uint64_t sub, Index dim,
                                    double h) {
  const auto brownian = stream(path_seed, Stream::brownian);
  const CounterRng rng(derive_seed(derive_seed(brownian.key(), base_step), piece));
  const std::uint64_t d2 = static_cast<std::uint64_t>(dim * dim);
  const std::uint64_t slot = ((std::uint64_t{1} << level) - 1) + sub;
  const double scale = std::sqrt(h);
  NoiseIncrement n{MatrixXd(dim, dim)};
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) {
      const auto e = static_cast<std::uint64_t>(i * dim + j);
      n.db(i, j) = scale * rng.normal(slot * d2 + e);
    }
  return n;
}

namespace {

SymMatrixd euler_increment(const CoefficientSet& cs, const SymMatrixd& x, const MatrixXd& db,
                           double dt) {
  MatrixXd next = x.matrix() + dt * cs.h.matrix();
  if (!cs.big_f.isZero(0.0) && !cs.big_g.isZero(0.0)) {
    const MatrixXd fdbg = cs.big_f * db * cs.big_g;
    next += fdbg + fdbg.transpose();
  }
  return SymMatrixd(next);
}

StepDiagnostics diagnose(const SymMatrixd& x, const SpectralFormd& s, bool jump) {
  return {det_spd(s), s.lambda_min(), x.trace(), jump};
}

}  // namespace

SymMatrixd step(const ModelSpec& model, double t, const SymMatrixd& x, const NoiseIncrement& db,
                double dt, std::span<const SymMatrixd> jump_marks) {
  if (!(dt >= 0.0)) throw std::invalid_argument("step: dt must be >= 0");
  const auto cs = coefficients(model, t, x);
  SymMatrixd next = euler_increment(cs, x, db.db, dt);
  for (const auto& mark : jump_marks) next = next + apply_jump_operator(model.k, x, mark);
  return next;
}

Path simulate_path(const ModelSpec& model, const SymMatrixd& x0, const SimConfig& cfg) {
  cfg.validate();
  model.validate();
  if (x0.dim() != model.dim) throw DimensionError("simulate_path: x0 has wrong dimension");
  const double eps = cfg.eps_for(x0);
  SpectralFormd s = spectral_decompose(x0);
  if (!(s.lambda_min() > eps)) {
    throw NotInteriorError("simulate_path: lambda_min(x0) must exceed boundary_eps", s.lambda_min());
  }

  const Index d = model.dim;
  const double horizon = cfg.horizon;
  const auto jumps =
      sample_jumps(model.jump, d, horizon, stream(cfg.seed, Stream::jumps).key());
  const auto n_base = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / cfg.dt - 1e-9)));

  Path path;
  path.seed = cfg.seed;
  path.config = cfg;
  path.boundary_eps = eps;
  path.min_lambda = s.lambda_min();

  SymMatrixd x = x0;
  double t = 0.0;
  std::size_t grid_index = 0;
  MatrixXd pending_increment = MatrixXd::Zero(d, d);

  auto record = [&](bool jumped) {
    path.times.push_back(t);
    path.states.push_back(x);
    path.diagnostics.push_back(diagnose(x, s, jumped));
    if (cfg.record_increments && path.states.size() > 1) path.increments.push_back(pending_increment);
  };
  record(false);

  struct Attempt {
    bool ok = true;
    double fail_time = 0.0;
    double fail_lambda = 0.0;
  };

  std::size_t jump_cursor = 0;
  for (std::size_t k = 0; k < n_base; ++k) {
    const double t_end = (k + 1 == n_base) ? horizon : static_cast<double>(k + 1) * cfg.dt;
    std::uint64_t piece = 0;
    try {
      while (true) {
        const bool has_jump = jump_cursor < jumps.size() && jumps[jump_cursor].time <= t_end;
        const double end = has_jump ? jumps[jump_cursor].time : t_end;
        const double h = end - t;

        if (h > 0.0) {
          // Runs 2^level sub-steps from (t, x); commits on success.
          auto attempt = [&](int level, bool clamp) -> Attempt {
            const std::uint64_t n_sub = std::uint64_t{1} << level;
            const double hs = h / static_cast<double>(n_sub);
            SymMatrixd xt = x;
            SpectralFormd st = s;
            double tt = t;
            MatrixXd db_sum = MatrixXd::Zero(d, d);
            double lowest = std::numeric_limits<double>::infinity();
            for (std::uint64_t j = 0; j < n_sub; ++j) {
              const auto db = NoiseIncrement::draw(cfg.seed, k, piece, level, j, d, hs);
              const auto cs = coefficients(model, tt, xt, st);
              SymMatrixd prop = euler_increment(cs, xt, db.db, hs);
              SpectralFormd sp = spectral_decompose(prop);
              tt = (j + 1 == n_sub) ? end : tt + hs;
              lowest = std::min(lowest, sp.lambda_min());
              if (sp.lambda_min() <= eps) {
                if (!clamp) {
                  path.min_lambda = std::min(path.min_lambda, sp.lambda_min());
                  return {false, tt, sp.lambda_min()};
                }
                if (!path.boundary_event) {
                  path.boundary_event = BoundaryEvent{
                      tt, sp.lambda_min(),
                      cfg.policy == BoundaryPolicy::halve ? "halve_then_clamp" : "clamp", k};
                }
                ++path.clamps;
                prop = cone_project(prop, eps);
                sp = spectral_decompose(prop);
              }
              db_sum += db.db;
              xt = std::move(prop);
              st = std::move(sp);
            }
            path.min_lambda = std::min(path.min_lambda, lowest);
            x = std::move(xt);
            s = std::move(st);
            if (cfg.record_increments) pending_increment = db_sum;
            return {};
          };

          switch (cfg.policy) {
            case BoundaryPolicy::stop: {
              const Attempt a = attempt(0, false);
              if (!a.ok) {
                path.boundary_event = BoundaryEvent{a.fail_time, a.fail_lambda, "stop", k};
                path.stopped = true;
                path.steps = grid_index;
                return path;
              }
              break;
            }
            case BoundaryPolicy::clamp:
              attempt(0, true);
              break;
            case BoundaryPolicy::halve: {
              bool done = false;
              for (int level = 0; level <= cfg.max_halvings && !done; ++level) {
                done = attempt(level, false).ok;
                if (level > 0) ++path.halvings;
              }
              if (!done) attempt(cfg.max_halvings, true);
              break;
            }
          }
        }
        t = end;
        ++grid_index;

        bool jumped = false;
        while (jump_cursor < jumps.size() && jumps[jump_cursor].time <= end) {
          const auto& ev = jumps[jump_cursor++];
          SymMatrixd inc = apply_jump_operator(model.k, x, ev.mark);
          const double det_before = det_spd(s);
          x = x + inc;
          s = spectral_decompose(x);
          path.jumps.push_back({ev.time, path.states.size(), ev.mark, inc, lambda_min(inc), det_before,
                                det_spd(s)});
          jumped = true;
        }
        if (jumped || grid_index % cfg.record_stride == 0 || (end >= t_end && k + 1 == n_base)) {
          record(jumped);
          pending_increment.setZero();
        } else if (cfg.record_increments) {
          pending_increment.setZero();
        }
        ++piece;
        if (end >= t_end) break;
      }
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      throw SimulationError(e.what(), k);
    }
  }
  path.steps = grid_index;
  return path;
}

std::size_t count_jump_violations(const Path& path) {
  std::size_t bad = 0;
  for (const auto& j : path.jumps) {
    const bool psd = j.increment_lambda_min >= -cone_atol(j.increment);
    const bool monotone = j.det_after >= j.det_before * (1.0 - 1e-12);
    if (!psd || !monotone) ++bad;
  }
  return bad;
}

}  // namespace conewalk
