#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polypart/common.hpp"

namespace polypart {

enum class VarKind { continuous, binary };

struct Variable {
  std::string name;
  VarKind kind = VarKind::continuous;
  double lower = -kInf;
  double upper = kInf;

  bool is_binary() const { return kind == VarKind::binary; }
  Interval bounds() const { return {lower, upper}; }
  bool operator==(const Variable&) const = default;
};

// ---------------------------------------------------------------------------
// Raw (user-facing) form: sums of scaled products with integer powers.
// ---------------------------------------------------------------------------

/// coef * prod(var^power). Factors are sorted by variable index and merged.
struct Monomial {
  double coef = 0.0;
  std::vector<std::pair<int, int>> factors;  // (variable, power >= 1)

  int degree() const;
  bool operator==(const Monomial&) const = default;
};

struct Expr {
  std::vector<Monomial> terms;
  double constant = 0.0;

  bool operator==(const Expr&) const = default;
};

/// Merges like monomials, orders them canonically and drops zero coefficients.
void canonicalize(Expr& e);

struct RawConstraint {
  std::string name;
  Expr expr;  // constant already folded into rhs by canonical form
  Relation rel = Relation::le;
  double rhs = 0.0;

  bool operator==(const RawConstraint&) const = default;
};

/// A model as written: nested products allowed anywhere. Always minimize.
struct RawModel {
  std::vector<Variable> variables;
  Expr objective;
  std::vector<RawConstraint> constraints;
  std::optional<double> reference_optimum;

  bool operator==(const RawModel&) const = default;
};

// ---------------------------------------------------------------------------
// Normal form: linear rows over (x, y, z) plus term definitions z_K = prod x.
// ---------------------------------------------------------------------------

struct MultilinearTerm {
  std::vector<int> key;  // K, ascending; repeated indices encode monomials
  int aux = -1;          // column of z_K

  int degree() const { return static_cast<int>(key.size()); }
  bool operator==(const MultilinearTerm&) const = default;
};

struct Constraint {
  std::string name;
  LinearRow row;

  bool operator==(const Constraint&) const = default;
};

struct Model {
  std::vector<Variable> variables;
  std::vector<MultilinearTerm> terms;  // topological: factors defined before use
  std::vector<Constraint> constraints;
  SparseRow objective;
  double objective_constant = 0.0;
  std::optional<double> reference_optimum;

  int num_variables() const { return static_cast<int>(variables.size()); }
  bool operator==(const Model&) const = default;

  /// Index of the term defining `var`, if `var` is an auxiliary.
  std::optional<int> defining_term(int var) const;
  bool is_aux(int var) const { return defining_term(var).has_value(); }

  /// Non-auxiliary continuous variables that feed some multilinear term
  /// (directly or through a chained auxiliary). Ascending.
  std::vector<int> term_variables() const;

  /// Original (non-auxiliary) variable indices, ascending.
  std::vector<int> original_variables() const;

  /// Expands an auxiliary into powers of original variables.
  std::map<int, int> expand(int var) const;

  int find_variable(const std::string& name) const;  // -1 if absent
};

/// Throws ModelError when indices are out of range or term invariants fail.
void validate(const Model& model);

/// Flattens a raw model into normal form. Every product of degree >= 2
/// becomes an auxiliary z_K; powers >= 3 are chained through squared
/// auxiliaries (x^5 -> ((x^2)^2) * x). Aux bounds come from interval
/// arithmetic. Throws ModelError naming any unbounded product factor.
Model normalize(const RawModel& raw);

/// Inverse of normalize: products of original variables again.
RawModel to_raw(const Model& model);

/// Fills auxiliary entries of `point` with the products they define.
void complete_point(const Model& model, std::vector<double>& point);

double objective_value(const Model& model, const std::vector<double>& point);
double evaluate(const Expr& expr, const std::vector<double>& point);

/// All linear rows, bounds, integrality and term equations within feas_tol.
/// Throws std::invalid_argument on a dimension mismatch.
bool check_feasible(const Model& model, const std::vector<double>& point, double feas_tol = 1e-6);

/// Largest violation among rows, bounds, integrality and term equations.
double max_violation(const Model& model, const std::vector<double>& point);

struct Incumbent {
  std::vector<double> point;  // over all model variables, aux included
  double objective_value = kInf;
};

}  // namespace polypart
