#pragma once

#include <cstdint>
#include <vector>

#include "polypart/common.hpp"

namespace polypart {

/// min c^T u  s.t.  rows (a_i^T u  rel_i  b_i),  lower <= u <= upper.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> col_lower;
  std::vector<double> col_upper;
  std::vector<LinearRow> rows;

  int num_cols() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_column(double lower, double upper, double cost = 0.0);
  int add_row(LinearRow row);
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_error };

const char* to_string(LpStatus s);

enum class BasisStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

/// Basis over structural columns followed by one logical per row.
struct Basis {
  std::vector<int> head;              // basic variable for each row position
  std::vector<BasisStatus> status;    // num_cols + num_rows entries

  bool empty() const { return head.empty() && status.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_error;
  std::vector<double> point;   // structural values
  double objective = 0.0;
  std::vector<double> duals;   // one per row; d(objective)/d(rhs)
  Basis basis;
  int iterations = 0;
  bool warm_start_rejected = false;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;
  int bland_after = 50;       // consecutive degenerate pivots before Bland's rule
  int refactor_every = 100;
  int max_iterations = 0;     // 0: 50 * (rows + cols) + 10000
};

/// Bounded-variable primal simplex with a reusable workspace. Bounds may be
/// changed and rows appended between solves; a warm basis equal to the
/// currently factored one skips refactorization.
class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp, SimplexOptions options = {});

  const LinearProgram& lp() const { return lp_; }

  void set_bounds(int col, double lower, double upper);
  void set_objective(std::vector<double> objective);
  void add_row(const LinearRow& row);

  LpSolution solve();
  LpSolution solve(const Basis& warm);

 private:
  enum class Outcome { optimal, infeasible, unbounded, iteration_limit, numerical };

  int total() const { return n_ + m_; }
  void compute_column_scales(const std::vector<LinearRow>& rows);
  void load_cold_basis();
  bool load_warm_basis(const Basis& warm);
  void normalize_nonbasic();
  bool refactor();
  bool factor_once(bool allow_repair);
  void repair_basis(const std::vector<int>& struct_pos, const std::vector<int>& free_rows);
  void compute_basic_values();
  Outcome iterate();
  double tol_for(double bound) const;
  void column_times_binv(int j, std::vector<double>& alpha) const;
  double dot_column(int j, const std::vector<double>& y) const;
  bool residuals_ok() const;
  LpSolution run(bool rejected);
  LpSolution finish(Outcome outcome, int iterations, bool rejected);

  LinearProgram lp_;
  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;  // structural columns
  std::vector<double> lo_, hi_, cost_;   // scaled space
  std::vector<double> col_scale_;        // x = col_scale * x'
  std::vector<double> row_scale_;        // row' = row_scale * row
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<BasisStatus> status_;
  std::vector<double> x_;
  std::vector<double> binv_;  // m x m, row-major
  bool factored_ = false;
  int pivots_since_refactor_ = 0;
  int iterations_ = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

/// Same optimum as solve_lp; an incompatible basis falls back to a cold start
/// and sets warm_start_rejected.
LpSolution solve_lp_with_basis(const LinearProgram& lp, const Basis& warm);

}  // namespace polypart
