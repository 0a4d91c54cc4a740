#pragma once

#include <vector>

#include "polypart/milp.hpp"
#include "polypart/model.hpp"
#include "polypart/relaxation.hpp"

namespace polypart {

enum class TightenMode { CP, TCP };

const char* to_string(TightenMode m);

struct TightenConfig {
  double tol = 0.01;
  TightenMode mode = TightenMode::CP;
  double per_solve_time_limit = kInf;
  int parallel_width = 1;
  double delta = 4.0;  // TCP partition sizing
  int max_rounds = 1000;
  double time_limit = kInf;  // checked between rounds
  RelaxOptions relax;
};

/// Three-partition map around x_star: inner [max(lo, x*-l), min(hi, x*+l)]
/// with l = (hi - lo) / delta, flanked by the remainders.
PartitionMap make_tcp_pmap(double x_star, Interval bounds, double delta);

/// min/max of one variable over a round's relaxation.
struct SubSolve {
  double min_value = -kInf;
  double max_value = kInf;
  MilpStatus min_status = MilpStatus::optimal;
  MilpStatus max_status = MilpStatus::optimal;
  double seconds = 0.0;
};

struct TightenTrace {
  int round = 0;
  int var = -1;
  Interval before;
  Interval after;
  double seconds = 0.0;
};

struct TightenReport {
  std::vector<int> variables;                    // tightened model variables
  std::vector<Interval> original;                // per entry of `variables`
  std::vector<Interval> final_bounds;
  std::vector<std::vector<Interval>> trajectory;  // bounds after each round
  std::vector<double> round_seconds;
  std::vector<int> round_binaries;               // binaries in each round's relaxation
  std::vector<int> round_selectors;              // of which partition selectors
  std::vector<TightenTrace> trace;
  int rounds = 0;
  double bc_percent = 0.0;
  double seconds = 0.0;

  /// Copy of `model` with the tightened bounds installed.
  Model apply(const Model& model) const;
};

/// The relaxation solved in one round, with the objective cutoff appended.
RelaxedMILP tighten_relaxation(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg);

/// All 2n sub-MILPs of one round against the model's current bounds, in
/// variable order. The parallel version runs them with OpenMP.
std::vector<SubSolve> tighten_round(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg,
                                    const std::vector<int>& variables);
std::vector<SubSolve> tighten_round_serial(const Model& model, const Incumbent& incumbent,
                                           const TightenConfig& cfg, const std::vector<int>& variables);

/// Sequential bound tightening on the continuous variables of the
/// multilinear terms. Requires a feasible incumbent.
TightenReport tighten_bounds(const Model& model, const Incumbent& incumbent, const TightenConfig& cfg);

}  // namespace polypart
