#pragma once

#include <functional>
#include <vector>

#include "polypart/simplex.hpp"

namespace polypart {

/// Returns cuts violated at the candidate point (empty when clean).
/// Must be a pure function of the point; cuts must be globally valid.
using CutCallback = std::function<std::vector<LinearRow>(const std::vector<double>&)>;

struct MilpProblem {
  LinearProgram lp;
  std::vector<int> integer_columns;  // bounds within [0,1]
  CutCallback cut_callback;
};

enum class MilpStatus { optimal, infeasible, time_limit, unbounded, numerical_error };

const char* to_string(MilpStatus s);

struct MilpSolution {
  MilpStatus status = MilpStatus::infeasible;
  std::vector<double> point;
  double objective = kInf;
  double best_bound = -kInf;
  long long nodes_explored = 0;
  int cuts_added = 0;
};

/// Global bound state after a processed node.
struct MilpTrace {
  long long node = 0;
  double lower_bound = -kInf;
  double incumbent = kInf;
};

struct MilpOptions {
  double time_limit = kInf;  // seconds
  double int_tol = 1e-6;
  double rel_gap = 1e-9;
  long long node_cap = 1'000'000;  // open nodes before depth-first diving
  int cut_rounds_fractional = 20;
  int cut_rounds_integral = 500;
  double cutoff = kInf;  // prune nodes whose bound is not below this
  std::function<void(const MilpTrace&)> trace;
};

/// Best-bound branch and bound with lazy cuts. Callback cuts are appended to
/// the shared LP and kept for all later nodes.
MilpSolution solve_milp(const MilpProblem& p, double time_limit);
MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opt);

/// Integer column whose fractional part is closest to 0.5; ties go to the
/// lowest index. -1 when all are integral within int_tol.
int branch_select(const std::vector<double>& point, const std::vector<int>& integer_columns,
                  double int_tol = 1e-6);

}  // namespace polypart
