#include "polypart/metrics.hpp"

#include <cmath>

#include "polypart/common.hpp"

namespace polypart {

GapValue gap_percent(double opt_value, double lower_bound) {
  if (lower_bound == 0.0) return {opt_value - lower_bound, true};
  return {(opt_value - lower_bound) / lower_bound * 100.0, false};
}

double bc_percent(const std::vector<double>& x_L, const std::vector<double>& x_U, const std::vector<double>& x_l,
                  const std::vector<double>& x_u) {
  const std::size_t n = x_L.size();
  if (x_U.size() != n || x_l.size() != n || x_u.size() != n) throw Error("bound vectors differ in length");
  double orig = 0.0, tight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    orig += (x_U[i] - x_L[i]) * (x_U[i] - x_L[i]);
    tight += (x_u[i] - x_l[i]) * (x_u[i] - x_l[i]);
  }
  orig = std::sqrt(orig);
  tight = std::sqrt(tight);
  if (tight == 0.0) return orig == 0.0 ? 0.0 : kInf;
  return (orig - tight) / tight * 100.0;
}

}  // namespace polypart
