#include "polypart/common.hpp"

#include <algorithm>
#include <cmath>

namespace polypart {

const char* to_string(Relation rel) {
  switch (rel) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
  }
  return "?";
}

void canonicalize(SparseRow& row) {
  std::stable_sort(row.begin(), row.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseRow merged;
  merged.reserve(row.size());
  for (const auto& [col, coef] : row) {
    if (!merged.empty() && merged.back().first == col) {
      merged.back().second += coef;
    } else {
      merged.emplace_back(col, coef);
    }
  }
  std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
  row = std::move(merged);
}

double dot(const SparseRow& row, const std::vector<double>& point) {
  double s = 0.0;
  for (const auto& [col, coef] : row) s += coef * point[static_cast<std::size_t>(col)];
  return s;
}

double violation(const LinearRow& row, const std::vector<double>& point) {
  const double lhs = dot(row.coeffs, point);
  switch (row.rel) {
    case Relation::le: return lhs - row.rhs;
    case Relation::ge: return row.rhs - lhs;
    case Relation::eq: return std::abs(lhs - row.rhs);
  }
  return 0.0;
}

bool Interval::finite() const { return std::isfinite(lo) && std::isfinite(hi); }

Interval product(Interval a, Interval b) {
  const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Interval square(Interval a) {
  const double l2 = a.lo * a.lo;
  const double h2 = a.hi * a.hi;
  if (a.lo >= 0.0) return {l2, h2};
  if (a.hi <= 0.0) return {h2, l2};
  return {0.0, std::max(l2, h2)};
}

}  // namespace polypart
