#pragma once

#include <map>
#include <vector>

#include "polypart/relaxation.hpp"

namespace polypart {

struct RefineConfig {
  double delta = 4.0;
  double eps = 0.001;
  std::map<int, double> eps_override;  // per-variable minimum partition length

  double eps_for(int var) const;
};

struct RefineResult {
  PartitionMaps pmaps;
  bool refined_any = false;
};

/// One refinement step: for every map whose active partition [lb, ub] has
/// l = (ub - lb) / delta > eps, inserts [max(lo, x* - l), min(hi, x* + l)]
/// (existing breakpoints are kept) and makes the piece containing x* active.
/// x_star is indexed by model variable. Values within 1e-7 (relative to the
/// domain width) outside a domain are clamped; anything further throws.
RefineResult refine(const PartitionMaps& pmaps, const std::vector<double>& x_star, const RefineConfig& cfg);

/// Partition index containing x_star per mapped variable (left on ties).
std::map<int, int> locate_active(const PartitionMaps& pmaps, const std::vector<double>& x_star);

/// Same, and stores the result as each map's active partition.
void update_active(PartitionMaps& pmaps, const std::vector<double>& x_star);

}  // namespace polypart
