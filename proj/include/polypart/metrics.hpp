#pragma once

#include <vector>

namespace polypart {

struct GapValue {
  double value = 0.0;
  bool absolute = false;  // lower bound was 0: value is f_opt - f_lb
};

/// (f_opt - f_lb) / f_lb * 100.
GapValue gap_percent(double opt_value, double lower_bound);

/// (|U - L| - |u - l|) / |u - l| * 100 with L2 norms over the width
/// vectors. +inf when every tightened width is zero.
double bc_percent(const std::vector<double>& x_L, const std::vector<double>& x_U, const std::vector<double>& x_l,
                  const std::vector<double>& x_u);

}  // namespace polypart
