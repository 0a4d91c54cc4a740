#include "polypart/driver.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "polypart/dynpart.hpp"

namespace polypart {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Incumbent initial_incumbent(const Model& model, const SolverConfig& cfg) {
  if (!cfg.incumbent) {
    IncumbentOptions opt = cfg.incumbent_search;
    opt.seed = cfg.seed;
    return find_incumbent(model, opt);
  }
  std::vector<double> p = *cfg.incumbent;
  const auto originals = model.original_variables();
  if (p.size() == originals.size() && p.size() != model.variables.size()) {
    std::vector<double> full(model.variables.size(), 0.0);
    for (std::size_t i = 0; i < originals.size(); ++i) full[static_cast<std::size_t>(originals[i])] = p[i];
    p = std::move(full);
  }
  if (p.size() != model.variables.size()) throw Error("incumbent has the wrong number of entries");
  complete_point(model, p);
  if (!check_feasible(model, p)) {
    std::ostringstream msg;
    msg << "supplied incumbent is infeasible (max violation " << max_violation(model, p) << ")";
    throw Error(msg.str());
  }
  Incumbent inc;
  inc.objective_value = objective_value(model, p);
  inc.point = std::move(p);
  return inc;
}

int total_partitions(const PartitionMaps& pmaps) {
  int n = 0;
  for (const auto& [v, pm] : pmaps) n += pm.size();
  return n;
}

bool bound_meets(double lb, double inc) { return lb >= inc - 1e-6 * std::max(1.0, std::abs(inc)); }

// Lower bound from a relaxation solve; -inf when none is known.
double milp_bound(const MilpSolution& sol, double constant) {
  if (sol.status == MilpStatus::infeasible || sol.status == MilpStatus::unbounded) return -kInf;
  return sol.best_bound + constant;
}

}  // namespace

SolveMode parse_solve_mode(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::replace(t.begin(), t.end(), '_', '-');
  if (t == "mc") return SolveMode::MC;
  if (t == "utmc") return SolveMode::UTMC;
  if (t == "dtmc") return SolveMode::DTMC;
  if (t == "cp-dtmc") return SolveMode::CP_DTMC;
  if (t == "tcp-dtmc") return SolveMode::TCP_DTMC;
  throw Error("unknown mode '" + std::string(s) + "' (expected mc, utmc, dtmc, cp-dtmc or tcp-dtmc)");
}

const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::MC: return "mc";
    case SolveMode::UTMC: return "utmc";
    case SolveMode::DTMC: return "dtmc";
    case SolveMode::CP_DTMC: return "cp-dtmc";
    case SolveMode::TCP_DTMC: return "tcp-dtmc";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::global_optimum: return "global_optimum";
    case SolveStatus::converged_partition: return "converged_partition";
    case SolveStatus::converged_improvement: return "converged_improvement";
    case SolveStatus::converged_bound: return "converged_bound";
    case SolveStatus::single_pass: return "single_pass";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::time_limit: return "time_limit";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

SolveReport solve(const Model& input, const SolverConfig& cfg) {
  if (!(cfg.delta > 1.0)) throw Error("delta must exceed 1");
  if (!(cfg.eps > 0.0)) throw Error("eps must be positive");
  if (cfg.utmc_n < 1) throw Error("utmc_n must be at least 1");
  const auto t0 = Clock::now();
  auto remaining = [&] { return std::max(0.0, cfg.time_limit - since(t0)); };

  SolveReport rep;
  rep.mode = cfg.mode;
  rep.delta = cfg.delta;
  rep.utmc_n = cfg.utmc_n;
  rep.seed = cfg.seed;
  rep.reference_optimum = input.reference_optimum;

  for (int v : input.term_variables()) {
    const auto& var = input.variables[static_cast<std::size_t>(v)];
    if (!std::isfinite(var.lower) || !std::isfinite(var.upper)) {
      throw Error("variable " + var.name + " appears in a nonlinear term and needs finite bounds");
    }
  }

  auto ti = Clock::now();
  const Incumbent inc = initial_incumbent(input, cfg);
  rep.t_incumbent = since(ti);
  rep.incumbent_value = inc.objective_value;
  for (int v : input.original_variables()) rep.incumbent_point.push_back(inc.point[static_cast<std::size_t>(v)]);

  Model model = input;
  if (cfg.mode == SolveMode::CP_DTMC || cfg.mode == SolveMode::TCP_DTMC) {
    TightenConfig tc = cfg.tighten;
    tc.mode = cfg.mode == SolveMode::CP_DTMC ? TightenMode::CP : TightenMode::TCP;
    if (!(tc.delta > 0.0)) tc.delta = cfg.delta;
    tc.time_limit = std::min(tc.time_limit, remaining());
    tc.relax = cfg.relax;
    const auto tt = Clock::now();
    TightenReport tr = tighten_bounds(model, inc, tc);
    rep.t_tighten = since(tt);
    model = tr.apply(model);
    rep.bc_percent = tr.bc_percent;
    rep.tightening = std::move(tr);
  }

  std::vector<int> part_vars = model.term_variables();
  const auto tl = Clock::now();
  auto finish = [&](SolveStatus st, std::string reason) {
    rep.t_relax = since(tl);
    rep.status = st;
    rep.stop_reason = std::move(reason);
    rep.iterations = static_cast<int>(rep.trajectory.size());
    double best = -kInf;
    for (const auto& it : rep.trajectory) best = std::max(best, it.lower_bound);
    rep.lower_bound = best;
    const double ref = rep.reference_optimum.value_or(rep.incumbent_value);
    rep.gap_vs_reference = rep.reference_optimum.has_value();
    if (std::isfinite(best)) {
      rep.gap = gap_percent(ref, best);
      if (rep.reference_optimum && st != SolveStatus::infeasible && !rep.gap.absolute &&
          std::abs(rep.gap.value) <= 1e-4) {
        rep.status = SolveStatus::global_optimum;
      } else if (rep.reference_optimum && rep.gap.absolute && std::abs(rep.gap.value) <= 1e-6) {
        rep.status = SolveStatus::global_optimum;
      }
    } else {
      rep.gap = {kInf, false};
    }
    rep.t_total = since(t0);
    return rep;
  };

  auto solve_once = [&](const RelaxedMILP& relax, int iteration, MilpSolution& sol) {
    const auto ts = Clock::now();
    MilpOptions mo;
    mo.time_limit = remaining();
    sol = solve_milp(relax.milp, mo);
    IterationRecord rec;
    rec.iteration = iteration;
    rec.lower_bound = milp_bound(sol, relax.objective_constant);
    rec.milp_status = sol.status;
    rec.binaries = relax.binaries_added();
    rec.selectors = relax.selector_binaries;
    rec.partitions = total_partitions(relax.pmaps);
    rec.cuts = sol.cuts_added;
    rec.nodes = sol.nodes_explored;
    rec.seconds = since(ts);
    rep.binaries_added = rec.binaries;
    rep.trajectory.push_back(rec);
  };

  auto terminal = [&](const MilpSolution& sol) -> std::optional<SolveStatus> {
    switch (sol.status) {
      case MilpStatus::infeasible: return SolveStatus::infeasible;
      case MilpStatus::unbounded: return SolveStatus::numerical_error;
      case MilpStatus::time_limit: return SolveStatus::time_limit;
      case MilpStatus::numerical_error: return sol.point.empty() ? std::optional(SolveStatus::numerical_error) : std::nullopt;
      case MilpStatus::optimal: return std::nullopt;
    }
    return std::nullopt;
  };

  if (cfg.mode == SolveMode::MC || cfg.mode == SolveMode::UTMC) {
    PartitionMaps pmaps;
    const RelaxMode rm = cfg.mode == SolveMode::MC ? RelaxMode::MC : RelaxMode::UTMC;
    if (rm == RelaxMode::UTMC) {
      for (int v : part_vars) pmaps[v] = PartitionMap::uniform(model.variables[static_cast<std::size_t>(v)].bounds(), cfg.utmc_n);
    }
    const RelaxedMILP relax = build_relaxation(model, pmaps, rm, cfg.relax);
    MilpSolution sol;
    solve_once(relax, 1, sol);
    if (auto st = terminal(sol)) return finish(*st, to_string(sol.status));
    return finish(SolveStatus::single_pass, "single_pass");
  }

  // Refine-solve loop.
  PartitionMaps pmaps;
  for (int v : part_vars) pmaps[v] = PartitionMap(model.variables[static_cast<std::size_t>(v)].bounds());
  RefineConfig rc;
  rc.delta = cfg.delta;
  rc.eps = cfg.eps;
  std::vector<double> x_iter = inc.point;
  for (std::size_t i = 0; i < x_iter.size(); ++i) {
    const auto& var = model.variables[i];
    x_iter[i] = std::clamp(x_iter[i], var.lower, var.upper);
  }
  int small_steps = 0;
  for (int iteration = 1;; ++iteration) {
    if (iteration > cfg.max_iterations) return finish(SolveStatus::iteration_limit, "iteration_limit");
    if (remaining() <= 0.0) return finish(SolveStatus::time_limit, "time_limit");
    pmaps = refine(pmaps, x_iter, rc).pmaps;
    std::map<int, Interval> active;
    for (const auto& [v, pm] : pmaps) active[v] = pm.active_interval();

    const RelaxedMILP relax = build_relaxation(model, pmaps, RelaxMode::DTMC, cfg.relax);
    MilpSolution sol;
    solve_once(relax, iteration, sol);
    if (auto st = terminal(sol)) return finish(*st, to_string(sol.status));
    const double lb = rep.trajectory.back().lower_bound;

    x_iter = relax.project(sol.point);
    for (std::size_t i = 0; i < x_iter.size(); ++i) {
      const auto& var = model.variables[i];
      x_iter[i] = std::clamp(x_iter[i], var.lower, var.upper);
    }
    update_active(pmaps, x_iter);

    if (cfg.stop_on_bound && bound_meets(lb, inc.objective_value)) {
      return finish(SolveStatus::converged_bound, "bound_meets_incumbent");
    }
    if (cfg.stop_on_partition) {
      bool same = true;
      for (const auto& [v, pm] : pmaps) same = same && pm.active_interval() == active[v];
      if (same && !refine(pmaps, x_iter, rc).refined_any) {
        return finish(SolveStatus::converged_partition, "partition");
      }
    }
    if (cfg.stop_on_improvement && rep.trajectory.size() >= 2) {
      const double prev = rep.trajectory[rep.trajectory.size() - 2].lower_bound;
      const double imp = std::isfinite(prev) ? std::abs(lb - prev) / (std::abs(prev) + 1.0) * 100.0 : kInf;
      small_steps = imp < cfg.tol_imp ? small_steps + 1 : 0;
      if (small_steps >= 2) return finish(SolveStatus::converged_improvement, "improvement");
    }
  }
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json interval_json(Interval b) { return nlohmann::json::array({num(b.lo), num(b.hi)}); }

}  // namespace

nlohmann::json to_json(const SolveReport& r, const Model& model) {
  using nlohmann::json;
  json j;
  j["instance"] = r.instance;
  j["mode"] = to_string(r.mode);
  j["delta"] = r.delta;
  j["utmc_n"] = r.utmc_n;
  j["seed"] = r.seed;
  j["status"] = to_string(r.status);
  j["stop_reason"] = r.stop_reason;
  j["incumbent"]["objective"] = num(r.incumbent_value);
  json point = json::object();
  const auto originals = model.original_variables();
  for (std::size_t i = 0; i < originals.size() && i < r.incumbent_point.size(); ++i) {
    point[model.variables[static_cast<std::size_t>(originals[i])].name] = num(r.incumbent_point[i]);
  }
  j["incumbent"]["point"] = point;
  j["reference_optimum"] = r.reference_optimum ? num(*r.reference_optimum) : json(nullptr);
  j["lower_bound"] = num(r.lower_bound);
  j["gap_percent"] = num(r.gap.value);
  j["gap_absolute"] = r.gap.absolute;
  j["gap_vs_reference"] = r.gap_vs_reference;
  j["bc_percent"] = num(r.bc_percent);
  j["binaries_added"] = r.binaries_added;
  j["iterations"] = r.iterations;
  json traj = json::array();
  json traj_t = json::array();
  for (const auto& it : r.trajectory) {
    traj.push_back({{"iteration", it.iteration},
                    {"lower_bound", num(it.lower_bound)},
                    {"milp_status", to_string(it.milp_status)},
                    {"binaries", it.binaries},
                    {"selectors", it.selectors},
                    {"partitions", it.partitions},
                    {"cuts", it.cuts},
                    {"nodes", it.nodes}});
    traj_t.push_back(it.seconds);
  }
  j["trajectory"] = traj;
  json timing = {{"incumbent", r.t_incumbent},
                 {"tighten", r.t_tighten},
                 {"relax", r.t_relax},
                 {"total", r.t_total},
                 {"iterations", traj_t}};
  if (r.tightening) {
    const auto& t = *r.tightening;
    json tj;
    tj["rounds"] = t.rounds;
    tj["bc_percent"] = num(t.bc_percent);
    tj["round_binaries"] = t.round_binaries;
    tj["round_selectors"] = t.round_selectors;
    json vars = json::array();
    for (std::size_t i = 0; i < t.variables.size(); ++i) {
      vars.push_back({{"name", model.variables[static_cast<std::size_t>(t.variables[i])].name},
                      {"original", interval_json(t.original[i])},
                      {"tightened", interval_json(t.final_bounds[i])}});
    }
    tj["variables"] = vars;
    j["tightening"] = tj;
    timing["tighten_rounds"] = t.round_seconds;
  } else {
    j["tightening"] = nullptr;
  }
  j["timing"] = timing;
  return j;
}

std::string csv_header() { return "instance,mode,best_param,bc_percent,gap_percent,t_tighten,t_relax"; }

std::string csv_row(const SolveReport& r) {
  std::ostringstream os;
  std::string param;
  if (r.mode == SolveMode::UTMC) {
    param = "N=" + std::to_string(r.utmc_n);
  } else if (r.mode == SolveMode::MC) {
    param = "-";
  } else {
    param = "delta=" + format_fixed(r.delta, r.delta == std::floor(r.delta) ? 0 : 2);
  }
  std::string gap = format_fixed(r.gap.value, 4);
  if (r.gap.absolute && std::isfinite(r.gap.value)) gap = "abs:" + gap;
  if (r.status == SolveStatus::global_optimum) gap = "GOpt";
  std::string name = r.instance;
  if (name.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char c : name) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    name = q + "\"";
  }
  os << name << ',' << to_string(r.mode) << ',' << param << ',' << format_fixed(r.bc_percent, 2) << ',' << gap << ','
     << format_fixed(r.t_tighten, 2) << ',' << format_fixed(r.t_relax, 2);
  return os.str();
}

}  // namespace polypart
