#include "polypart/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "polypart/driver.hpp"
#include "polypart/parser.hpp"

namespace polypart {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string mode = "dtmc";
  std::vector<double> deltas{4.0};
  std::vector<int> utmc_ns{10};
  double time_limit = 3600.0;
  double tol_imp = 0.001;
  double eps = 0.001;
  double bt_tol = 0.01;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string incumbent;
  std::string out = ".";
  std::vector<std::string> inputs;
};

void add_common(CLI::App* app, Options& o, bool grids) {
  auto* mode = app->add_option("--mode", o.mode, "mc, utmc, dtmc, cp-dtmc or tcp-dtmc")->capture_default_str();
  if (o.mode != "tcp") {
    mode->check(CLI::Validator(
        [](std::string& s) {
          try {
            parse_solve_mode(s);
            return std::string();
          } catch (const Error& e) {
            return std::string(e.what());
          }
        },
        "MODE"));
  }
  if (grids) {
    app->add_option("--delta", o.deltas, "partition scaling factors (comma separated)")->delimiter(',');
    app->add_option("--utmc-n", o.utmc_ns, "uniform partition counts (comma separated)")->delimiter(',');
  } else {
    app->add_option("--delta", o.deltas, "partition scaling factor (default 4)")->expected(1);
    app->add_option("--utmc-n", o.utmc_ns, "uniform partition count (default 10)")->expected(1);
  }
  app->add_option("--time-limit", o.time_limit, "seconds per run (POLYPART_TIME_LIMIT overrides)")
      ->capture_default_str();
  app->add_option("--tol-imp", o.tol_imp, "lower-bound improvement tolerance, percent")->capture_default_str();
  app->add_option("--eps", o.eps, "minimum partition length")->capture_default_str();
  app->add_option("--bt-tol", o.bt_tol, "bound tightening tolerance")->capture_default_str();
  app->add_option("--seed", o.seed, "seed for the incumbent search")->capture_default_str();
  app->add_option("--jobs", o.jobs, "parallel width")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--incumbent", o.incumbent, "feasible point, e.g. x=1,y=2");
  app->add_option("--out", o.out, "output directory")->capture_default_str();
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<std::string> in_dir;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".mlt") in_dir.push_back(e.path().string());
      }
      std::sort(in_dir.begin(), in_dir.end());
      files.insert(files.end(), in_dir.begin(), in_dir.end());
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw CLI::ValidationError("input", "no such file or directory: " + p);
    }
  }
  if (files.empty()) throw CLI::ValidationError("input", "no .mlt instances found");
  return files;
}

std::vector<double> parse_incumbent(const std::string& text, const Model& model) {
  std::map<std::string, double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("incumbent entry '" + item + "' is not name=value");
    const std::string name = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const std::string num = item.substr(eq + 1);
      values[name] = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw Error("incumbent value for '" + name + "' is not a number");
    }
  }
  std::vector<double> point;
  for (int v : model.original_variables()) {
    const auto& name = model.variables[static_cast<std::size_t>(v)].name;
    auto it = values.find(name);
    if (it == values.end()) throw Error("incumbent misses variable " + name);
    point.push_back(it->second);
    values.erase(it);
  }
  if (!values.empty()) throw Error("incumbent names unknown variable " + values.begin()->first);
  return point;
}

double env_time_limit(double flag) {
  if (const char* s = std::getenv("POLYPART_TIME_LIMIT")) {
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || !(v >= 0.0)) throw Error(std::string("bad POLYPART_TIME_LIMIT '") + s + "'");
    return v;
  }
  return flag;
}

SolverConfig make_config(const Options& o, double delta, int n) {
  SolverConfig c;
  c.mode = parse_solve_mode(o.mode);
  c.delta = delta;
  c.utmc_n = n;
  c.time_limit = env_time_limit(o.time_limit);
  c.tol_imp = o.tol_imp;
  c.eps = o.eps;
  c.tighten.tol = o.bt_tol;
  c.seed = o.seed;
  return c;
}

std::string run_name(const SolveReport& r) {
  std::string param;
  if (r.mode == SolveMode::UTMC) {
    param = ".n" + std::to_string(r.utmc_n);
  } else if (r.mode != SolveMode::MC) {
    param = ".delta" + format_fixed(r.delta, r.delta == std::floor(r.delta) ? 0 : 2);
  }
  return r.instance + "." + to_string(r.mode) + param;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

struct RunResult {
  std::string path;
  std::optional<SolveReport> report;
  std::optional<Model> model;
  std::string error;
  bool bad_input = false;
};

RunResult run_one(const std::string& path, const SolverConfig& cfg, const std::string& incumbent) {
  RunResult rr;
  rr.path = path;
  try {
    Model m = normalize(parse_file(path));
    SolverConfig c = cfg;
    if (!incumbent.empty()) c.incumbent = parse_incumbent(incumbent, m);
    SolveReport r = solve(m, c);
    r.instance = stem(path);
    rr.report = std::move(r);
    rr.model = std::move(m);
  } catch (const ModelError& e) {
    rr.error = e.what();
    rr.bad_input = true;
  } catch (const ParseError& e) {
    rr.error = e.what();
    rr.bad_input = true;
  } catch (const std::exception& e) {
    rr.error = path + ": " + e.what();
  }
  return rr;
}

// Ordering for the Best column: gap, then time, then the smaller parameter,
// with gap and time compared at their printed precision.
bool better(const SolveReport& a, const SolveReport& b) {
  auto key_gap = [](const SolveReport& r) {
    if (r.status == SolveStatus::global_optimum) return 0.0;
    return std::isfinite(r.gap.value) ? std::round(r.gap.value * 1e4) : kInf;
  };
  auto key_time = [](const SolveReport& r) { return std::round((r.t_tighten + r.t_relax) * 100.0); };
  auto key_param = [](const SolveReport& r) { return r.mode == SolveMode::UTMC ? r.utmc_n : r.delta; };
  if (key_gap(a) != key_gap(b)) return key_gap(a) < key_gap(b);
  if (key_time(a) != key_time(b)) return key_time(a) < key_time(b);
  return key_param(a) < key_param(b);
}

int emit(const std::vector<RunResult>& results, const Options& o, bool sweep, std::ostream& out, std::ostream& err) {
  bool failed = false, bad_input = false;
  for (const auto& rr : results) {
    if (rr.report) continue;
    err << "error: " << rr.error << "\n";
    failed = true;
    bad_input = bad_input || rr.bad_input;
  }
  if (std::none_of(results.begin(), results.end(), [](const RunResult& rr) { return rr.report.has_value(); })) {
    return bad_input ? exit_usage : exit_run_failed;
  }
  fs::create_directories(o.out);
  std::string csv = csv_header() + "\n";
  for (const auto& rr : results) {
    if (!rr.report) continue;
    write_file(fs::path(o.out) / (run_name(*rr.report) + ".json"), to_json(*rr.report, *rr.model).dump(2) + "\n");
    csv += csv_row(*rr.report) + "\n";
  }
  write_file(fs::path(o.out) / "results.csv", csv);
  if (!sweep) {
    out << csv;
    return bad_input ? exit_usage : failed ? exit_run_failed : exit_ok;
  }
  std::map<std::string, const SolveReport*> best;
  std::vector<std::string> order;
  for (const auto& rr : results) {
    if (!rr.report) continue;
    auto [it, fresh] = best.try_emplace(rr.path, &*rr.report);
    if (fresh) order.push_back(rr.path);
    else if (better(*rr.report, *it->second)) it->second = &*rr.report;
  }
  std::string bcsv = csv_header() + "\n";
  for (const auto& p : order) bcsv += csv_row(*best[p]) + "\n";
  write_file(fs::path(o.out) / "best.csv", bcsv);
  out << bcsv;
  return failed ? exit_run_failed : exit_ok;
}

int cmd_solve(const Options& o, bool sweep, std::ostream& out, std::ostream& err) {
  const auto files = expand_inputs(o.inputs);
  const SolveMode mode = parse_solve_mode(o.mode);
  std::vector<std::pair<std::string, SolverConfig>> runs;
  for (const auto& f : files) {
    if (mode == SolveMode::UTMC) {
      for (int n : o.utmc_ns) runs.emplace_back(f, make_config(o, o.deltas.front(), n));
    } else if (mode == SolveMode::MC) {
      runs.emplace_back(f, make_config(o, o.deltas.front(), o.utmc_ns.front()));
    } else {
      for (double d : o.deltas) runs.emplace_back(f, make_config(o, d, o.utmc_ns.front()));
    }
  }
  std::vector<RunResult> results(runs.size());
  const int workers = sweep ? std::min<int>(o.jobs, static_cast<int>(runs.size())) : 1;
  if (!sweep) {
    for (auto& [f, c] : runs) c.tighten.parallel_width = o.jobs;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      results[i] = run_one(runs[i].first, runs[i].second, o.incumbent);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return emit(results, o, sweep, out, err);
}

int cmd_tighten(const Options& o, const std::string& tmode, std::ostream& out) {
  const auto files = expand_inputs(o.inputs);
  fs::create_directories(o.out);
  for (const auto& f : files) {
    const Model m = normalize(parse_file(f));
    Incumbent inc;
    if (!o.incumbent.empty()) {
      auto p = parse_incumbent(o.incumbent, m);
      std::vector<double> full(m.variables.size(), 0.0);
      const auto originals = m.original_variables();
      for (std::size_t i = 0; i < originals.size(); ++i) full[static_cast<std::size_t>(originals[i])] = p[i];
      complete_point(m, full);
      inc = {full, objective_value(m, full)};
    } else {
      IncumbentOptions io;
      io.seed = o.seed;
      inc = find_incumbent(m, io);
    }
    TightenConfig tc;
    tc.tol = o.bt_tol;
    tc.mode = tmode == "cp" ? TightenMode::CP : TightenMode::TCP;
    tc.delta = o.deltas.front();
    tc.parallel_width = o.jobs;
    tc.time_limit = env_time_limit(o.time_limit);
    const TightenReport rep = tighten_bounds(m, inc, tc);

    out << "instance " << stem(f) << "  mode " << tmode << "  incumbent "
        << format_fixed(inc.objective_value, 4) << "\n";
    out << "variable,original_lo,original_hi,tightened_lo,tightened_hi\n";
    nlohmann::json vars = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.variables.size(); ++i) {
      const auto& name = m.variables[static_cast<std::size_t>(rep.variables[i])].name;
      const Interval a = rep.original[i], b = rep.final_bounds[i];
      out << name << ',' << format_fixed(a.lo, 4) << ',' << format_fixed(a.hi, 4) << ',' << format_fixed(b.lo, 4) << ','
          << format_fixed(b.hi, 4) << "\n";
      vars.push_back({{"name", name}, {"original", {a.lo, a.hi}}, {"tightened", {b.lo, b.hi}}});
    }
    const int sel = rep.round_selectors.empty() ? 0 : rep.round_selectors.front();
    const int bin = rep.round_binaries.empty() ? 0 : rep.round_binaries.front();
    out << "rounds " << rep.rounds << "  bc_percent " << format_fixed(rep.bc_percent, 2) << "  binaries " << bin
        << " (selectors " << sel << ")  seconds " << format_fixed(rep.seconds, 2) << "\n";
    nlohmann::json j = {{"instance", stem(f)},
                        {"mode", tmode},
                        {"delta", tc.delta},
                        {"incumbent", inc.objective_value},
                        {"rounds", rep.rounds},
                        {"bc_percent", std::isfinite(rep.bc_percent) ? nlohmann::json(rep.bc_percent) : nlohmann::json("inf")},
                        {"round_binaries", rep.round_binaries},
                        {"round_selectors", rep.round_selectors},
                        {"variables", vars},
                        {"timing", {{"total", rep.seconds}, {"rounds", rep.round_seconds}}}};
    write_file(fs::path(o.out) / (stem(f) + ".tighten-" + tmode + ".json"), j.dump(2) + "\n");
  }
  return exit_ok;
}

struct EnvelopeOptions {
  std::string input;
  std::vector<std::string> factors;
  std::vector<std::string> breakpoints;
  int partitions = 1;
  int resolution = 21;
  std::string out;
};

std::string sample(double v) {
  if (std::abs(v) < 1e-12) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_envelope(const EnvelopeOptions& e, std::ostream& out) {
  const RawModel src = parse_file(e.input);
  if (e.factors.size() != 2) throw CLI::ValidationError("--term", "only degree-2 terms are supported");
  RawModel raw;
  std::map<std::string, int> ids;
  Monomial mono;
  mono.coef = 1.0;
  for (const auto& name : e.factors) {
    auto it = std::find_if(src.variables.begin(), src.variables.end(), [&](const Variable& v) { return v.name == name; });
    if (it == src.variables.end()) throw Error("unknown variable " + name);
    if (it->is_binary()) throw CLI::ValidationError("--term", "binary factors have an exact relaxation");
    if (!ids.count(name)) {
      ids[name] = static_cast<int>(raw.variables.size());
      raw.variables.push_back(*it);
    }
    mono.factors.emplace_back(ids[name], 1);
  }
  raw.objective.terms.push_back(mono);
  canonicalize(raw.objective);
  const Model m = normalize(raw);
  if (m.terms.size() != 1) throw Error("unexpected term structure");
  PartitionMaps pmaps;
  for (const auto& [name, v] : ids) pmaps[v] = PartitionMap::uniform(m.variables[static_cast<std::size_t>(v)].bounds(), e.partitions);
  for (const auto& spec : e.breakpoints) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--breakpoints", "expected name=t0,t1,...");
    const std::string name = spec.substr(0, eq);
    if (!ids.count(name)) throw CLI::ValidationError("--breakpoints", "variable " + name + " is not in the term");
    std::vector<double> bps;
    std::stringstream ss(spec.substr(eq + 1));
    for (std::string t; std::getline(ss, t, ':');) bps.push_back(std::stod(t));
    PartitionMap pm(bps);
    if (!(pm.domain() == m.variables[static_cast<std::size_t>(ids[name])].bounds())) {
      throw CLI::ValidationError("--breakpoints", "breakpoints of " + name + " must span its bounds");
    }
    pmaps[ids[name]] = pm;
  }
  const RelaxedMILP r = build_relaxation(m, pmaps, RelaxMode::DTMC);
  const int z = r.var_map[static_cast<std::size_t>(m.terms.front().aux)];
  std::ostringstream csv;
  const bool square = ids.size() == 1;
  auto grid = [&](int v, int k) {
    const Interval b = m.variables[static_cast<std::size_t>(v)].bounds();
    return e.resolution == 1 ? 0.5 * (b.lo + b.hi) : b.lo + (b.hi - b.lo) * k / (e.resolution - 1);
  };
  if (square) {
    csv << e.factors[0] << ",z_min,z_max\n";
    for (int i = 0; i < e.resolution; ++i) {
      const double x = grid(0, i);
      const Interval zr = relaxation_range(r, {{r.var_map[0], x}}, z);
      if (zr.lo > zr.hi) continue;
      csv << sample(x) << ',' << sample(zr.lo) << ',' << sample(zr.hi) << "\n";
    }
  } else {
    csv << e.factors[0] << ',' << e.factors[1] << ",z_min,z_max\n";
    for (int i = 0; i < e.resolution; ++i) {
      for (int k = 0; k < e.resolution; ++k) {
        const double x = grid(0, i), y = grid(1, k);
        const Interval zr = relaxation_range(r, {{r.var_map[0], x}, {r.var_map[1], y}}, z);
        if (zr.lo > zr.hi) continue;
        csv << sample(x) << ',' << sample(y) << ',' << sample(zr.lo) << ','
            << sample(zr.hi) << "\n";
      }
    }
  }
  if (e.out.empty()) {
    out << csv.str();
  } else {
    write_file(e.out, csv.str());
  }
  return exit_ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"polypart: global optimization of multilinear MINLPs", "polypart"};
  app.require_subcommand(1);
  Options solve_opt, sweep_opt, tight_opt;
  tight_opt.mode = "tcp";
  EnvelopeOptions env;

  auto* s = app.add_subcommand("solve", "solve one instance");
  add_common(s, solve_opt, false);
  s->add_option("instance", solve_opt.inputs, ".mlt file")->required()->expected(1);

  auto* w = app.add_subcommand("sweep", "parameter grid over instances");
  add_common(w, sweep_opt, true);
  w->add_option("inputs", sweep_opt.inputs, ".mlt files or directories")->required();

  auto* t = app.add_subcommand("tighten-only", "bound tightening report");
  add_common(t, tight_opt, false);
  t->get_option("--mode")->check(CLI::IsMember({"cp", "tcp"}));
  t->add_option("instance", tight_opt.inputs, ".mlt file")->required()->expected(1);

  auto* v = app.add_subcommand("envelope", "sample the relaxation of one term");
  v->add_option("instance", env.input, ".mlt file")->required()->check(CLI::ExistingFile);
  v->add_option("--term", env.factors, "factor names, e.g. x,y or x,x")->delimiter(',')->required();
  v->add_option("--partitions", env.partitions, "uniform partitions per factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  v->add_option("--breakpoints", env.breakpoints, "explicit breakpoints, e.g. x=0:0.5:2 (repeatable)");
  v->add_option("--resolution", env.resolution, "grid points per axis")->check(CLI::PositiveNumber)->capture_default_str();
  v->add_option("--out", env.out, "CSV file (stdout if absent)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }
  try {
    if (s->parsed()) return cmd_solve(solve_opt, false, out, err);
    if (w->parsed()) return cmd_solve(sweep_opt, true, out, err);
    if (t->parsed()) return cmd_tighten(tight_opt, tight_opt.mode, out);
    return cmd_envelope(env, out);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_run_failed;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace polypart
