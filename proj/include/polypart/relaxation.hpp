#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "polypart/milp.hpp"
#include "polypart/model.hpp"

namespace polypart {

/// Ordered breakpoints t_0 < t_1 < ... < t_M splitting a domain into M
/// partitions [t_{k-1}, t_k], plus the active partition (0-based).
class PartitionMap {
 public:
  PartitionMap() = default;
  explicit PartitionMap(Interval domain);
  explicit PartitionMap(std::vector<double> breakpoints, int active = 0);

  static PartitionMap uniform(Interval domain, int n);

  int size() const { return static_cast<int>(breakpoints_.size()) - 1; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  Interval domain() const { return {breakpoints_.front(), breakpoints_.back()}; }
  Interval partition(int k) const;

  int active() const { return active_; }
  void set_active(int k);
  Interval active_interval() const { return partition(active_); }

  /// Partition containing x; on an interior breakpoint the left one.
  /// Values outside the domain map to the first/last partition.
  int locate(double x) const;

  /// Adds t as a breakpoint when it lies strictly inside a partition with
  /// both gaps >= kMinGap. Keeps the active partition pointing at the same
  /// region (its left part if split). Returns whether t was inserted.
  bool insert(double t);

  bool operator==(const PartitionMap&) const = default;

  static constexpr double kMinGap = 1e-12;

 private:
  std::vector<double> breakpoints_{0.0, 0.0};
  int active_ = 0;
};

using PartitionMaps = std::map<int, PartitionMap>;

/// The four McCormick inequalities for z = x_i * x_j over a box:
/// two underestimators, then two overestimators.
std::array<LinearRow, 4> mccormick_bilinear(Interval bi, Interval bj, int z, int xi, int xj);

/// z = y_i * y_j for binary columns: z >= y_i + y_j - 1, z <= y_i, z <= y_j
/// (z >= 0 comes from the column bound). Throws if either column is not a
/// [0,1] integer column of `p`.
std::array<LinearRow, 3> mccormick_binary(const MilpProblem& p, int yi, int yj, int z);

/// One bilinear step of a lexicographic grouping. Operands are model
/// variables or intermediates (ids >= first free id).
struct GroupedLink {
  int left = -1;
  int right = -1;
  int out = -1;
  Interval bounds;
};

/// (((x_i x_j) x_l) ... x_k): degree-1 links; intermediates get ids
/// starting at `next_id`, the last link writes `term.aux`. `bounds` covers
/// model variables; intermediate bounds come from interval products.
std::vector<GroupedLink> group_lexicographic(const MultilinearTerm& term, const std::vector<Interval>& bounds,
                                             int next_id);

enum class RelaxMode { MC, UTMC, DTMC };

const char* to_string(RelaxMode m);

/// How a monomial x^2 link is relaxed.
enum class MonomialForm {
  dtmc_q,     // piecewise secant + tangent cuts (lazy)
  mccormick,  // piecewise McCormick on (x, x): tangents at the selected bounds
};

struct RelaxOptions {
  MonomialForm monomial = MonomialForm::dtmc_q;
  bool single_partition_per_link = false;
  double oa_tol = 1e-7;
  int seed_tangents_per_partition = 2;  // endpoints only when 2
  bool bmc_product_rows = false;        // per-entry BMC instead of row/column sums
};

struct ColumnDef {
  enum class Kind { model, intermediate, selector, selector_product, selector_pair };
  Kind kind = Kind::model;
  int a = -1;  // model var / left operand / selector column
  int b = -1;  // right operand / multiplied column
  int k = -1;  // partition index for selectors
};

struct MonomialLink {
  int x = -1;
  int z = -1;
};

struct RelaxedMILP {
  MilpProblem milp;
  double objective_constant = 0.0;
  std::vector<int> var_map;                         // model variable -> column
  std::map<std::vector<int>, int> aux_map;          // term key or grouping prefix -> column
  std::map<int, std::vector<int>> selector_map;     // variable -> selector columns
  std::map<std::tuple<int, int, int, int>, int> product_binary_map;  // (i, k, j, m) -> column
  int selector_binaries = 0;
  int product_binaries = 0;
  std::vector<ColumnDef> columns;
  std::vector<MonomialLink> monomials;
  PartitionMaps pmaps;
  double oa_tol = 1e-7;

  int binaries_added() const { return selector_binaries + product_binaries; }

  /// Extends a model point (aux entries consistent) to every MILP column.
  std::vector<double> lift(const std::vector<double>& model_point) const;

  /// Tangent cuts x~ >= 2 xh x - xh^2 at every violated monomial link.
  std::vector<LinearRow> generate_cuts(const std::vector<double>& point) const;

  /// Projects a MILP point back onto model variables.
  std::vector<double> project(const std::vector<double>& point) const;
};

/// Full relaxation: model rows plus one block per grouping link. Variable
/// bounds are taken from `model`; partitioned variables need a map whose
/// domain matches their bounds. Unlisted term variables are unpartitioned.
RelaxedMILP build_relaxation(const Model& model, const PartitionMaps& pmaps, RelaxMode mode,
                             const RelaxOptions& opt = {});

/// Region pair for a single monomial x^2 with x partitioned by `pmap`:
/// (a) secant overestimator plus dense tangents, (b) tangents at the
/// selected partition bounds plus the same overestimator.
struct Lemma1Regions {
  RelaxedMILP a;
  RelaxedMILP b;
  int x = 0;
  int z = 1;
};

Lemma1Regions lemma1_regions(const PartitionMap& pmap, int tangents_per_partition = 64);

/// min and max of column `z` over the relaxation with the given columns
/// fixed. Returns an empty interval {+inf, -inf} when infeasible.
Interval relaxation_range(const RelaxedMILP& r, const std::vector<std::pair<int, double>>& fixed, int z);

}  // namespace polypart
