#include "polypart/tighten.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "polypart/metrics.hpp"

namespace polypart {

const char* to_string(TightenMode m) { return m == TightenMode::CP ? "CP" : "TCP"; }

PartitionMap make_tcp_pmap(double x_star, Interval bounds, double delta) {
  if (!bounds.finite() || bounds.lo > bounds.hi) throw Error("TCP partitioning needs finite bounds");
  if (!(delta > 0.0)) throw Error("delta must be positive");
  PartitionMap pm(bounds);
  const double x = std::clamp(x_star, bounds.lo, bounds.hi);
  const double l = bounds.width() / delta;
  pm.insert(std::max(bounds.lo, x - l));
  pm.insert(std::min(bounds.hi, x + l));
  pm.set_active(pm.locate(x));
  return pm;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double value_bound(const MilpSolution& s, bool maximize) {
  double v = -kInf;
  if (s.status == MilpStatus::optimal) v = s.objective;
  else if (s.status == MilpStatus::time_limit || s.status == MilpStatus::numerical_error) v = s.best_bound;
  if (!std::isfinite(v)) return maximize ? kInf : -kInf;
  return maximize ? -v : v;
}

SubSolve solve_one(const RelaxedMILP& base, int var, double time_limit) {
  const auto t0 = Clock::now();
  SubSolve out;
  MilpProblem p = base.milp;
  const int col = base.var_map[static_cast<std::size_t>(var)];
  MilpOptions opt;
  opt.time_limit = time_limit;
  for (bool maximize : {false, true}) {
    std::fill(p.lp.objective.begin(), p.lp.objective.end(), 0.0);
    p.lp.objective[static_cast<std::size_t>(col)] = maximize ? -1.0 : 1.0;
    const MilpSolution s = solve_milp(p, opt);
    if (s.status == MilpStatus::infeasible) {
      std::ostringstream msg;
      msg << "bound tightening sub-problem for variable " << var << " is infeasible; the incumbent is inconsistent";
      throw Error(msg.str());
    }
    if (maximize) {
      out.max_value = value_bound(s, true);
      out.max_status = s.status;
    } else {
      out.min_value = value_bound(s, false);
      out.min_status = s.status;
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

}  // namespace

RelaxedMILP tighten_relaxation(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg) {
  PartitionMaps pmaps;
  RelaxMode mode = RelaxMode::MC;
  if (cfg.mode == TightenMode::TCP) {
    mode = RelaxMode::DTMC;
    for (int v : model.term_variables()) {
      const auto& var = model.variables[static_cast<std::size_t>(v)];
      pmaps[v] = make_tcp_pmap(incumbent.point[static_cast<std::size_t>(v)], var.bounds(), cfg.delta);
    }
  }
  RelaxedMILP r = build_relaxation(model, pmaps, mode, cfg.relax);
  const double f = incumbent.objective_value;
  LinearRow cutoff;
  cutoff.coeffs = model.objective;
  cutoff.rel = Relation::le;
  cutoff.rhs = f - model.objective_constant + 1e-7 * std::max(1.0, std::abs(f));
  canonicalize(cutoff.coeffs);
  if (!cutoff.coeffs.empty()) r.milp.lp.add_row(cutoff);
  return r;
}

namespace {

std::vector<SubSolve> run_round(const RelaxedMILP& r, const TightenConfig& cfg, const std::vector<int>& variables,
                                bool parallel) {
  const int n = static_cast<int>(variables.size());
  std::vector<SubSolve> out(variables.size());
  if (!parallel) {
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] = solve_one(r, variables[static_cast<std::size_t>(i)], cfg.per_solve_time_limit);
    }
    return out;
  }
  std::vector<std::string> errors(variables.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.parallel_width)
  for (int i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = solve_one(r, variables[static_cast<std::size_t>(i)], cfg.per_solve_time_limit);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(e);
  }
  return out;
}

}  // namespace

std::vector<SubSolve> tighten_round_serial(const Model& model, const Incumbent& incumbent,
                                           const TightenConfig& cfg, const std::vector<int>& variables) {
  return run_round(tighten_relaxation(model, incumbent, cfg), cfg, variables, false);
}

std::vector<SubSolve> tighten_round(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg,
                                    const std::vector<int>& variables) {
  return run_round(tighten_relaxation(model, incumbent, cfg), cfg, variables, cfg.parallel_width > 1);
}

Model TightenReport::apply(const Model& model) const {
  Model out = model;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    auto& var = out.variables[static_cast<std::size_t>(variables[i])];
    var.lower = final_bounds[i].lo;
    var.upper = final_bounds[i].hi;
  }
  return out;
}

TightenReport tighten_bounds(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw Error("tightening tolerance must be positive");
  if (!check_feasible(model, incumbent.point)) throw Error("incumbent is not feasible");
  const auto t0 = Clock::now();
  TightenReport rep;
  for (int v : model.term_variables()) {
    if (model.variables[static_cast<std::size_t>(v)].is_binary()) continue;
    rep.variables.push_back(v);
    rep.original.push_back(model.variables[static_cast<std::size_t>(v)].bounds());
  }
  rep.final_bounds = rep.original;
  Model current = model;
  double moved_lo = 0.0, moved_hi = 0.0;
  do {
    const auto tr = Clock::now();
    const auto prev = rep.final_bounds;
    const RelaxedMILP relax = tighten_relaxation(current, incumbent, cfg);
    rep.round_binaries.push_back(relax.binaries_added());
    rep.round_selectors.push_back(relax.selector_binaries);
    const auto subs = run_round(relax, cfg, rep.variables, cfg.parallel_width > 1);
    moved_lo = moved_hi = 0.0;
    for (std::size_t i = 0; i < rep.variables.size(); ++i) {
      const int v = rep.variables[i];
      const double xv = incumbent.point[static_cast<std::size_t>(v)];
      Interval b = prev[i];
      const double mlo = subs[i].min_value, mhi = subs[i].max_value;
      if (std::isfinite(mlo)) b.lo = std::max(b.lo, mlo - 1e-7 * std::max(1.0, std::abs(mlo)));
      if (std::isfinite(mhi)) b.hi = std::min(b.hi, mhi + 1e-7 * std::max(1.0, std::abs(mhi)));
      if (!b.contains(xv, 1e-6 * std::max(1.0, std::abs(xv)))) {
        std::ostringstream msg;
        msg << "tightening excluded the incumbent for variable " << model.variables[static_cast<std::size_t>(v)].name
            << ": " << xv << " not in [" << b.lo << ", " << b.hi << "]";
        throw Error(msg.str());
      }
      b.lo = std::min(b.lo, xv);
      b.hi = std::max(b.hi, xv);
      rep.final_bounds[i] = b;
      auto& var = current.variables[static_cast<std::size_t>(v)];
      var.lower = b.lo;
      var.upper = b.hi;
      moved_lo += (b.lo - prev[i].lo) * (b.lo - prev[i].lo);
      moved_hi += (b.hi - prev[i].hi) * (b.hi - prev[i].hi);
      rep.trace.push_back({rep.rounds + 1, v, prev[i], b, subs[i].seconds});
    }
    ++rep.rounds;
    rep.trajectory.push_back(rep.final_bounds);
    rep.round_seconds.push_back(seconds_since(tr));
  } while (std::sqrt(moved_lo) > cfg.tol && std::sqrt(moved_hi) > cfg.tol && rep.rounds < cfg.max_rounds &&
           seconds_since(t0) < cfg.time_limit);
  std::vector<double> L, U, l, u;
  for (std::size_t i = 0; i < rep.variables.size(); ++i) {
    L.push_back(rep.original[i].lo);
    U.push_back(rep.original[i].hi);
    l.push_back(rep.final_bounds[i].lo);
    u.push_back(rep.final_bounds[i].hi);
  }
  rep.bc_percent = bc_percent(L, U, l, u);
  rep.seconds = seconds_since(t0);
  return rep;
}

}  // namespace polypart
