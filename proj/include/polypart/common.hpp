#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polypart {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

const char* to_string(Relation rel);

/// Sparse linear form: (column, coefficient) pairs.
using SparseRow = std::vector<std::pair<int, double>>;

/// A single linear constraint `coeffs · u  rel  rhs`.
struct LinearRow {
  SparseRow coeffs;
  Relation rel = Relation::le;
  double rhs = 0.0;

  bool operator==(const LinearRow&) const = default;
};

/// Sorts by column and merges duplicate columns; drops exact zeros.
void canonicalize(SparseRow& row);

/// Evaluates `coeffs · point`.
double dot(const SparseRow& row, const std::vector<double>& point);

/// Signed violation of a row at a point (positive means violated).
double violation(const LinearRow& row, const std::vector<double>& point);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  bool finite() const;
  bool operator==(const Interval&) const = default;
};

Interval product(Interval a, Interval b);
Interval square(Interval a);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed models: bad indices, unbounded product factors, etc.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace polypart
