#pragma once

#include <cstdint>
#include <vector>

#include "polypart/model.hpp"

namespace polypart {

struct IncumbentOptions {
  std::uint64_t seed = 1;
  int starts = 16;
  double budget_seconds = 60.0;  // no new start after this
  int max_iterations = 300;      // per start
  double feas_tol = 1e-7;        // accepted points pass check_feasible at this tolerance
};

/// Local search for a feasible point: seeded multistart of a primal-dual
/// interior point method over the continuous originals (binaries fixed per
/// start), then least-norm restoration onto the constraints. Deterministic for fixed
/// options unless the budget runs out. Throws Error when nothing feasible
/// is found.
Incumbent find_incumbent(const Model& model, const IncumbentOptions& opt = {});

/// Polishes a given point (binaries kept); returns it unchanged when no
/// feasible improvement is found.
std::vector<double> local_improve(const Model& model, const std::vector<double>& point, double feas_tol = 1e-7);

}  // namespace polypart
