#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polypart/incumbent.hpp"
#include "polypart/metrics.hpp"
#include "polypart/milp.hpp"
#include "polypart/model.hpp"
#include "polypart/relaxation.hpp"
#include "polypart/tighten.hpp"

namespace polypart {

enum class SolveMode { MC, UTMC, DTMC, CP_DTMC, TCP_DTMC };

/// mc, utmc, dtmc, cp-dtmc, tcp-dtmc (case-insensitive). Throws Error.
SolveMode parse_solve_mode(std::string_view s);
const char* to_string(SolveMode m);

enum class SolveStatus {
  global_optimum,         // lower bound within 1e-4 % of the reference optimum
  converged_partition,    // x stayed in its partitions and no partition can be refined
  converged_improvement,  // two consecutive improvements below tol_imp
  converged_bound,        // lower bound met the incumbent
  single_pass,            // MC / UTMC: one relaxation solved
  iteration_limit,
  time_limit,
  infeasible,
  numerical_error,
};

const char* to_string(SolveStatus s);

struct SolverConfig {
  SolveMode mode = SolveMode::DTMC;
  double delta = 4.0;
  int utmc_n = 10;
  double tol_imp = 0.001;  // percent
  double eps = 0.001;
  double time_limit = 3600.0;
  std::uint64_t seed = 1;
  /// Tightening settings; `mode` is derived from the solve mode, and a
  /// non-positive `delta` means "use the solve delta".
  TightenConfig tighten = [] {
    TightenConfig t;
    t.delta = 0.0;
    return t;
  }();
  std::optional<std::vector<double>> incumbent;  // originals or all model variables
  IncumbentOptions incumbent_search;              // seed is overridden by `seed`
  int max_iterations = 10'000;
  bool stop_on_improvement = true;
  bool stop_on_partition = true;
  bool stop_on_bound = true;
  RelaxOptions relax;
};

struct IterationRecord {
  int iteration = 0;
  double lower_bound = -kInf;
  MilpStatus milp_status = MilpStatus::optimal;
  int binaries = 0;
  int selectors = 0;
  int partitions = 0;  // total over partitioned variables
  int cuts = 0;
  long long nodes = 0;
  double seconds = 0.0;
};

struct SolveReport {
  std::string instance;
  SolveMode mode = SolveMode::DTMC;
  double delta = 0.0;
  int utmc_n = 0;
  std::uint64_t seed = 0;
  SolveStatus status = SolveStatus::single_pass;
  std::string stop_reason;

  double incumbent_value = kInf;
  std::vector<double> incumbent_point;  // originals
  std::optional<double> reference_optimum;
  double lower_bound = -kInf;
  GapValue gap;
  bool gap_vs_reference = false;
  double bc_percent = 0.0;
  int binaries_added = 0;
  int iterations = 0;
  std::vector<IterationRecord> trajectory;
  std::optional<TightenReport> tightening;

  double t_incumbent = 0.0;
  double t_tighten = 0.0;
  double t_relax = 0.0;  // refine-solve loop (T_DTMC)
  double t_total = 0.0;
};

/// Incumbent, optional tightening, then the refine-solve loop.
SolveReport solve(const Model& model, const SolverConfig& cfg);

/// All wall times sit under the "timing" key; everything else is
/// deterministic for fixed (model, config).
nlohmann::json to_json(const SolveReport& r, const Model& model);

/// instance,mode,best_param,bc_percent,gap_percent,t_tighten,t_relax
std::string csv_header();
std::string csv_row(const SolveReport& r);

/// Number format of the CSV: fixed with `digits` decimals, "inf"/"-inf",
/// and an "abs:" prefix for absolute gaps.
std::string format_fixed(double v, int digits);

}  // namespace polypart
