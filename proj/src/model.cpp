#include "polypart/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace polypart {

int Monomial::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.second;
  return d;
}

namespace {

void canonicalize_factors(Monomial& m) {
  std::sort(m.factors.begin(), m.factors.end());
  std::vector<std::pair<int, int>> merged;
  for (const auto& f : m.factors) {
    if (!merged.empty() && merged.back().first == f.first) {
      merged.back().second += f.second;
    } else {
      merged.push_back(f);
    }
  }
  m.factors = std::move(merged);
}

bool monomial_less(const Monomial& a, const Monomial& b) {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  return a.factors < b.factors;
}

Interval power_interval(Interval x, int p) {
  Interval r{1.0, 1.0};
  Interval base = x;
  // Even powers of the same factor are squares, not products of two copies.
  while (p > 0) {
    if (p % 2 == 1) r = product(r, base);
    p /= 2;
    if (p > 0) base = square(base);
  }
  return r;
}

class Normalizer {
 public:
  explicit Normalizer(const RawModel& raw) {
    model_.variables = raw.variables;
    model_.reference_optimum = raw.reference_optimum;
  }

  void check_variables() const {
    for (const auto& v : model_.variables) {
      if (v.is_binary() && (v.lower != 0.0 || v.upper != 1.0)) {
        throw ModelError("binary variable '" + v.name + "' must have bounds {0,1}");
      }
      if (v.lower > v.upper) {
        throw ModelError("variable '" + v.name + "': lower bound exceeds upper bound");
      }
    }
  }

  SparseRow linearize(const Expr& expr) {
    SparseRow row;
    for (const auto& m : expr.terms) {
      if (m.coef == 0.0) continue;
      row.emplace_back(column_for(m), m.coef);
    }
    canonicalize(row);
    return row;
  }

  Model take() { return std::move(model_); }

 private:
  void require_bounded(int var) const {
    const auto& v = model_.variables[static_cast<std::size_t>(var)];
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      throw ModelError("variable '" + v.name + "' appears in a product but is unbounded");
    }
  }

  int column_for(const Monomial& m) {
    if (m.degree() == 1) return m.factors.front().first;
    std::vector<int> key;
    for (const auto& [var, power] : m.factors) {
      require_bounded(var);
      if (power == 1) {
        key.push_back(var);
      } else if (power == 2) {
        key.push_back(var);
        key.push_back(var);
      } else {
        key.push_back(reduce_power(var, power));
      }
    }
    std::sort(key.begin(), key.end());
    if (key.size() == 1) return key.front();
    return aux_for(key);
  }

  // x^p -> (x^2)^(p/2) * x^(p%2), recursively on the squared auxiliary.
  int reduce_power(int var, int power) {
    if (power == 1) return var;
    const int sq = aux_for({var, var});
    const int r = reduce_power(sq, power / 2);
    if (power % 2 == 1) {
      std::vector<int> key{var, r};
      std::sort(key.begin(), key.end());
      return aux_for(key);
    }
    return r;
  }

  int aux_for(const std::vector<int>& key) {
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    Interval bounds{1.0, 1.0};
    std::string name = "(";
    for (std::size_t i = 0; i < key.size();) {
      std::size_t j = i;
      while (j < key.size() && key[j] == key[i]) ++j;
      const int p = static_cast<int>(j - i);
      const auto& v = model_.variables[static_cast<std::size_t>(key[i])];
      bounds = product(bounds, power_interval(v.bounds(), p));
      if (i > 0) name += "*";
      name += v.name;
      if (p > 1) name += "^" + std::to_string(p);
      i = j;
    }
    name += ")";
    const int aux = model_.num_variables();
    model_.variables.push_back({name, VarKind::continuous, bounds.lo, bounds.hi});
    model_.terms.push_back({key, aux});
    index_.emplace(key, aux);
    return aux;
  }

  Model model_;
  std::map<std::vector<int>, int> index_;
};

}  // namespace

void canonicalize(Expr& e) {
  for (auto& m : e.terms) canonicalize_factors(m);
  std::stable_sort(e.terms.begin(), e.terms.end(), monomial_less);
  std::vector<Monomial> merged;
  for (auto& m : e.terms) {
    if (!merged.empty() && merged.back().factors == m.factors) {
      merged.back().coef += m.coef;
    } else {
      merged.push_back(std::move(m));
    }
  }
  std::erase_if(merged, [](const Monomial& m) { return m.coef == 0.0 || m.factors.empty(); });
  e.terms = std::move(merged);
}

std::optional<int> Model::defining_term(int var) const {
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (terms[t].aux == var) return static_cast<int>(t);
  }
  return std::nullopt;
}

std::map<int, int> Model::expand(int var) const {
  std::map<int, int> powers;
  const auto t = defining_term(var);
  if (!t) {
    powers[var] = 1;
    return powers;
  }
  for (int f : terms[static_cast<std::size_t>(*t)].key) {
    for (const auto& [v, p] : expand(f)) powers[v] += p;
  }
  return powers;
}

std::vector<int> Model::term_variables() const {
  std::set<int> vars;
  for (const auto& t : terms) {
    for (const auto& [v, p] : expand(t.aux)) {
      if (!variables[static_cast<std::size_t>(v)].is_binary()) vars.insert(v);
    }
  }
  return {vars.begin(), vars.end()};
}

std::vector<int> Model::original_variables() const {
  std::vector<bool> aux(variables.size(), false);
  for (const auto& t : terms) aux[static_cast<std::size_t>(t.aux)] = true;
  std::vector<int> out;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (!aux[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

int Model::find_variable(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void validate(const Model& model) {
  const int n = model.num_variables();
  auto check_index = [n](int idx, const std::string& where) {
    if (idx < 0 || idx >= n) {
      throw ModelError(where + " references undeclared variable index " + std::to_string(idx));
    }
  };
  for (const auto& v : model.variables) {
    if (v.lower > v.upper) throw ModelError("variable '" + v.name + "': lower exceeds upper");
    if (v.is_binary() && (v.lower != 0.0 || v.upper != 1.0)) {
      throw ModelError("binary variable '" + v.name + "' must have bounds {0,1}");
    }
  }
  std::set<int> defined;
  for (const auto& t : model.terms) {
    check_index(t.aux, "term");
    if (t.degree() < 2) throw ModelError("term of degree < 2");
    if (!std::is_sorted(t.key.begin(), t.key.end())) throw ModelError("term key is not ordered");
    if (!defined.insert(t.aux).second) throw ModelError("auxiliary defined by two terms");
    for (int f : t.key) {
      check_index(f, "term");
      const auto& v = model.variables[static_cast<std::size_t>(f)];
      if (!v.bounds().finite()) {
        throw ModelError("variable '" + v.name + "' appears in a product but is unbounded");
      }
    }
  }
  for (const auto& c : model.constraints) {
    for (const auto& [col, coef] : c.row.coeffs) check_index(col, "constraint '" + c.name + "'");
  }
  for (const auto& [col, coef] : model.objective) check_index(col, "objective");
}

Model normalize(const RawModel& raw) {
  Normalizer norm(raw);
  norm.check_variables();
  Expr objective = raw.objective;
  canonicalize(objective);
  SparseRow obj = norm.linearize(objective);
  std::vector<Constraint> rows;
  for (const auto& c : raw.constraints) {
    Expr e = c.expr;
    canonicalize(e);
    rows.push_back({c.name, {norm.linearize(e), c.rel, c.rhs - e.constant}});
  }
  Model m = norm.take();
  m.objective = std::move(obj);
  m.objective_constant = objective.constant;
  m.constraints = std::move(rows);
  validate(m);
  return m;
}

namespace {

Expr expr_from_row(const Model& model, const SparseRow& row, double constant) {
  Expr e;
  e.constant = constant;
  for (const auto& [col, coef] : row) {
    Monomial m;
    m.coef = coef;
    for (const auto& [v, p] : model.expand(col)) m.factors.emplace_back(v, p);
    e.terms.push_back(std::move(m));
  }
  canonicalize(e);
  return e;
}

}  // namespace

RawModel to_raw(const Model& model) {
  RawModel raw;
  for (int v : model.original_variables()) {
    if (v != static_cast<int>(raw.variables.size())) {
      throw ModelError("auxiliary variables must follow all original variables");
    }
    raw.variables.push_back(model.variables[static_cast<std::size_t>(v)]);
  }
  raw.objective = expr_from_row(model, model.objective, model.objective_constant);
  for (const auto& c : model.constraints) {
    raw.constraints.push_back({c.name, expr_from_row(model, c.row.coeffs, 0.0), c.row.rel, c.row.rhs});
  }
  raw.reference_optimum = model.reference_optimum;
  return raw;
}

void complete_point(const Model& model, std::vector<double>& point) {
  for (const auto& t : model.terms) {
    double p = 1.0;
    for (int f : t.key) p *= point[static_cast<std::size_t>(f)];
    point[static_cast<std::size_t>(t.aux)] = p;
  }
}

double objective_value(const Model& model, const std::vector<double>& point) {
  return dot(model.objective, point) + model.objective_constant;
}

double evaluate(const Expr& expr, const std::vector<double>& point) {
  double s = expr.constant;
  for (const auto& m : expr.terms) {
    double p = m.coef;
    for (const auto& [v, power] : m.factors) {
      p *= std::pow(point[static_cast<std::size_t>(v)], power);
    }
    s += p;
  }
  return s;
}

double max_violation(const Model& model, const std::vector<double>& point) {
  if (point.size() != model.variables.size()) {
    throw std::invalid_argument("point has " + std::to_string(point.size()) +
                                " entries, model has " + std::to_string(model.variables.size()) +
                                " variables");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const auto& v = model.variables[i];
    const double x = point[i];
    if (!std::isfinite(x)) return kInf;
    worst = std::max({worst, v.lower - x, x - v.upper});
    if (v.is_binary()) worst = std::max(worst, std::abs(x - std::round(x)));
  }
  for (const auto& c : model.constraints) worst = std::max(worst, violation(c.row, point));
  for (const auto& t : model.terms) {
    double p = 1.0;
    for (int f : t.key) p *= point[static_cast<std::size_t>(f)];
    worst = std::max(worst, std::abs(point[static_cast<std::size_t>(t.aux)] - p));
  }
  return worst;
}

bool check_feasible(const Model& model, const std::vector<double>& point, double feas_tol) {
  return max_violation(model, point) <= feas_tol;
}

}  // namespace polypart
