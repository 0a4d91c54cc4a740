#include "polypart/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace polypart {

// ---------------------------------------------------------------------------
// PartitionMap
// ---------------------------------------------------------------------------

PartitionMap::PartitionMap(Interval domain) {
  if (!domain.finite() || domain.lo > domain.hi) throw Error("partition domain must be a finite interval");
  breakpoints_ = {domain.lo, domain.hi};
}

PartitionMap::PartitionMap(std::vector<double> breakpoints, int active) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 2) throw Error("a partition map needs at least two breakpoints");
  for (double t : breakpoints_) {
    if (!std::isfinite(t)) throw Error("breakpoints must be finite");
  }
  if (breakpoints_.size() == 2) {
    if (breakpoints_[0] > breakpoints_[1]) throw Error("breakpoints must be increasing");
  } else {
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i] - breakpoints_[i - 1] >= kMinGap)) {
        throw Error("breakpoints must be strictly increasing with gaps >= 1e-12");
      }
    }
  }
  set_active(active);
}

PartitionMap PartitionMap::uniform(Interval domain, int n) {
  if (n < 1) throw Error("uniform partitioning needs n >= 1");
  PartitionMap p(domain);
  if (domain.width() <= kMinGap * n) return p;
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(domain.lo + domain.width() * k / n);
  t.back() = domain.hi;
  return PartitionMap(std::move(t));
}

Interval PartitionMap::partition(int k) const {
  if (k < 0 || k >= size()) throw Error("partition index out of range");
  return {breakpoints_[static_cast<std::size_t>(k)], breakpoints_[static_cast<std::size_t>(k) + 1]};
}

void PartitionMap::set_active(int k) {
  if (k < 0 || k >= size()) throw Error("active partition out of range");
  active_ = k;
}

int PartitionMap::locate(double x) const {
  if (size() == 1) return 0;
  const auto first = breakpoints_.begin() + 1;
  const auto last = breakpoints_.end() - 1;
  return static_cast<int>(std::lower_bound(first, last, x) - first);
}

bool PartitionMap::insert(double t) {
  const int k = locate(t);
  const double lo = breakpoints_[static_cast<std::size_t>(k)];
  const double hi = breakpoints_[static_cast<std::size_t>(k) + 1];
  if (!(t - lo >= kMinGap && hi - t >= kMinGap)) return false;
  breakpoints_.insert(breakpoints_.begin() + k + 1, t);
  if (active_ > k) ++active_;
  return true;
}

// ---------------------------------------------------------------------------
// Elementary envelopes
// ---------------------------------------------------------------------------

std::array<LinearRow, 4> mccormick_bilinear(Interval bi, Interval bj, int z, int xi, int xj) {
  if (!bi.finite() || !bj.finite()) throw Error("McCormick envelope needs finite bounds");
  auto row = [&](double ci, double cj, Relation rel, double rhs) {
    LinearRow r{{{z, 1.0}, {xi, -ci}, {xj, -cj}}, rel, rhs};
    canonicalize(r.coeffs);
    return r;
  };
  // z >= li xj + lj xi - li lj ; z >= ui xj + uj xi - ui uj
  // z <= li xj + uj xi - li uj ; z <= ui xj + lj xi - ui lj
  return {row(bj.lo, bi.lo, Relation::ge, -bi.lo * bj.lo), row(bj.hi, bi.hi, Relation::ge, -bi.hi * bj.hi),
          row(bj.hi, bi.lo, Relation::le, -bi.lo * bj.hi), row(bj.lo, bi.hi, Relation::le, -bi.hi * bj.lo)};
}

std::array<LinearRow, 3> mccormick_binary(const MilpProblem& p, int yi, int yj, int z) {
  auto check = [&](int c) {
    const bool integer = std::find(p.integer_columns.begin(), p.integer_columns.end(), c) != p.integer_columns.end();
    if (!integer || p.lp.col_lower[static_cast<std::size_t>(c)] < 0.0 || p.lp.col_upper[static_cast<std::size_t>(c)] > 1.0) {
      throw Error("column " + std::to_string(c) + " is not binary");
    }
  };
  check(yi);
  check(yj);
  return {LinearRow{{{z, 1.0}, {yi, -1.0}, {yj, -1.0}}, Relation::ge, -1.0},
          LinearRow{{{z, 1.0}, {yi, -1.0}}, Relation::le, 0.0}, LinearRow{{{z, 1.0}, {yj, -1.0}}, Relation::le, 0.0}};
}

std::vector<GroupedLink> group_lexicographic(const MultilinearTerm& term, const std::vector<Interval>& bounds,
                                             int next_id) {
  if (term.degree() < 2) throw Error("grouping needs a term of degree >= 2");
  std::vector<GroupedLink> links;
  int left = term.key[0];
  Interval lb = bounds[static_cast<std::size_t>(left)];
  for (std::size_t i = 1; i < term.key.size(); ++i) {
    const int right = term.key[i];
    const Interval rb = bounds[static_cast<std::size_t>(right)];
    GroupedLink link;
    link.left = left;
    link.right = right;
    link.out = i + 1 == term.key.size() ? term.aux : next_id++;
    link.bounds = left == right ? square(lb) : product(lb, rb);
    links.push_back(link);
    left = link.out;
    lb = link.bounds;
  }
  return links;
}

const char* to_string(RelaxMode m) {
  switch (m) {
    case RelaxMode::MC: return "MC";
    case RelaxMode::UTMC: return "UTMC";
    case RelaxMode::DTMC: return "DTMC";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

namespace {

struct LinExpr {
  SparseRow row;
  double constant = 0.0;

  static LinExpr column(int c) { return {{{c, 1.0}}, 0.0}; }
  static LinExpr value(double v) { return {{}, v}; }

  void add(double coef, const LinExpr& e) {
    if (coef == 0.0) return;
    for (const auto& [c, v] : e.row) row.emplace_back(c, coef * v);
    constant += coef * e.constant;
  }
};

struct Piece {
  Interval part;
  int selector = -1;  // -1: the constant 1
};

class Builder {
 public:
  Builder(const Model& model, const PartitionMaps& pmaps, RelaxMode mode, const RelaxOptions& opt)
      : model_(model), opt_(opt) {
    r_.oa_tol = opt.oa_tol;
    const int n = model.num_variables();
    for (int v = 0; v < n; ++v) {
      const auto& var = model.variables[static_cast<std::size_t>(v)];
      add_column(var.lower, var.upper, {ColumnDef::Kind::model, v, -1, -1}, var.is_binary());
      r_.var_map.push_back(v);
    }
    for (const auto& [v, pm] : pmaps) {
      if (v < 0 || v >= n) throw Error("partition map for unknown variable " + std::to_string(v));
      const auto& var = model.variables[static_cast<std::size_t>(v)];
      if (var.is_binary() || model.is_aux(v)) continue;
      const Interval d = pm.domain();
      const double tol = 1e-9 * std::max(1.0, std::max(std::abs(var.lower), std::abs(var.upper)));
      if (std::abs(d.lo - var.lower) > tol || std::abs(d.hi - var.upper) > tol) {
        throw Error("partition map of '" + var.name + "' does not match its bounds");
      }
      if (mode == RelaxMode::MC && pm.size() != 1) throw Error("MC relaxation needs single-partition maps");
      r_.pmaps[v] = pm;
    }
    for (int v : model.term_variables()) {
      if (!r_.pmaps.contains(v)) {
        const auto& var = model.variables[static_cast<std::size_t>(v)];
        r_.pmaps[v] = PartitionMap(var.bounds());
      }
    }
    for (const auto& t : model.terms) {
      r_.aux_map[t.key] = t.aux;
      for (int f : t.key) ++term_count_[f];
    }
  }

  RelaxedMILP build() {
    for (const auto& t : model_.terms) emit_term(t);
    for (const auto& c : model_.constraints) r_.milp.lp.add_row(c.row);
    r_.milp.lp.objective.assign(static_cast<std::size_t>(r_.milp.lp.num_cols()), 0.0);
    for (const auto& [c, v] : model_.objective) r_.milp.lp.objective[static_cast<std::size_t>(c)] += v;
    r_.objective_constant = model_.objective_constant;
    if (!r_.monomials.empty()) {
      auto monomials = r_.monomials;
      const double tol = r_.oa_tol;
      r_.milp.cut_callback = [monomials, tol](const std::vector<double>& p) {
        RelaxedMILP view;
        view.monomials = monomials;
        view.oa_tol = tol;
        return view.generate_cuts(p);
      };
    }
    return std::move(r_);
  }

 private:
  int add_column(double lo, double hi, ColumnDef def, bool integer = false) {
    const int c = r_.milp.lp.add_column(lo, hi, 0.0);
    if (integer) r_.milp.integer_columns.push_back(c);
    r_.columns.push_back(def);
    bounds_.push_back({lo, hi});
    binary_like_.push_back(integer && lo >= 0.0 && hi <= 1.0);
    return c;
  }

  void add_row(LinExpr lhs, Relation rel, double rhs) {
    canonicalize(lhs.row);
    if (lhs.row.empty()) return;
    r_.milp.lp.add_row({std::move(lhs.row), rel, rhs - lhs.constant});
  }

  Interval bounds(int c) const { return bounds_[static_cast<std::size_t>(c)]; }

  bool binary_like(int c) const { return binary_like_[static_cast<std::size_t>(c)]; }

  // Partitioned operand: an original continuous variable with M >= 2.
  bool partitioned(int c) const {
    if (c >= model_.num_variables()) return false;
    auto it = r_.pmaps.find(c);
    return it != r_.pmaps.end() && it->second.size() >= 2;
  }

  void emit_term(const MultilinearTerm& t) {
    int left = t.key[0];
    std::vector<int> prefix{left};
    for (std::size_t i = 1; i < t.key.size(); ++i) {
      const int right = t.key[i];
      prefix.push_back(right);
      int out;
      if (auto it = r_.aux_map.find(prefix); it != r_.aux_map.end()) {
        out = it->second;
      } else {
        const Interval b = left == right ? square(bounds(left)) : product(bounds(left), bounds(right));
        out = add_column(b.lo, b.hi, {ColumnDef::Kind::intermediate, left, right, -1});
        r_.aux_map[prefix] = out;
      }
      if (emitted_.insert(out).second) emit_link(left, right, out);
      left = out;
    }
  }

  void set_out_bounds(int out, Interval b, bool binary) {
    Interval cur = bounds(out);
    Interval nb{std::max(cur.lo, b.lo), std::min(cur.hi, b.hi)};
    if (nb.lo > nb.hi) nb = b;
    bounds_[static_cast<std::size_t>(out)] = nb;
    r_.milp.lp.col_lower[static_cast<std::size_t>(out)] = nb.lo;
    r_.milp.lp.col_upper[static_cast<std::size_t>(out)] = nb.hi;
    binary_like_[static_cast<std::size_t>(out)] = binary;
  }

  void emit_link(int l, int r, int out) {
    const bool bl = binary_like(l);
    const bool br = binary_like(r);
    const Interval b = l == r ? square(bounds(l)) : product(bounds(l), bounds(r));
    set_out_bounds(out, b, bl && br);
    if (l == r && bl) {
      LinExpr e = LinExpr::column(out);
      e.add(-1.0, LinExpr::column(l));
      add_row(e, Relation::eq, 0.0);
      return;
    }
    if (bl && br) {
      // BMC: z >= yi + yj - 1, z <= yi, z <= yj.
      LinExpr ge = LinExpr::column(out);
      ge.add(-1.0, LinExpr::column(l));
      ge.add(-1.0, LinExpr::column(r));
      add_row(ge, Relation::ge, -1.0);
      for (int y : {l, r}) {
        LinExpr le = LinExpr::column(out);
        le.add(-1.0, LinExpr::column(y));
        add_row(le, Relation::le, 0.0);
      }
      return;
    }
    if (bl || br) {
      for (auto& row : mccormick_bilinear(bounds(l), bounds(r), out, l, r)) {
        canonicalize(row.coeffs);
        r_.milp.lp.add_row(row);
      }
      return;
    }
    if (l == r) {
      emit_monomial(l, out);
      return;
    }
    bool use_l = partitioned(l);
    bool use_r = partitioned(r);
    if (opt_.single_partition_per_link && use_l && use_r) {
      const int cl = term_count_[l];
      const int cr = term_count_[r];
      if (cr > cl || (cr == cl && r < l)) use_l = false;
      else use_r = false;
    }
    emit_piecewise(l, use_l, r, use_r, out, true);
  }

  void emit_monomial(int x, int out) {
    const bool use = partitioned(x);
    if (opt_.monomial == MonomialForm::mccormick) {
      emit_piecewise(x, use, x, use, out, true);
      return;
    }
    emit_piecewise(x, use, x, use, out, false);
    // Seed tangents so the first relaxation is bounded below.
    std::set<double> points;
    const int per = std::max(2, opt_.seed_tangents_per_partition);
    for (const auto& pc : pieces(x, use)) {
      for (int s = 0; s < per; ++s) points.insert(pc.part.lo + pc.part.width() * s / (per - 1));
      points.insert(pc.part.hi);
    }
    for (double t : points) {
      LinExpr e = LinExpr::column(out);
      e.add(-2.0 * t, LinExpr::column(x));
      add_row(e, Relation::ge, -t * t);
    }
    r_.monomials.push_back({x, out});
  }

  std::vector<Piece> pieces(int c, bool use) {
    if (!use) return {{bounds(c), -1}};
    const auto& sel = selectors(c);
    const auto& pm = r_.pmaps.at(c);
    std::vector<Piece> out;
    for (int k = 0; k < pm.size(); ++k) out.push_back({pm.partition(k), sel[static_cast<std::size_t>(k)]});
    return out;
  }

  const std::vector<int>& selectors(int v) {
    auto it = r_.selector_map.find(v);
    if (it != r_.selector_map.end()) return it->second;
    const auto& pm = r_.pmaps.at(v);
    std::vector<int> sel;
    for (int k = 0; k < pm.size(); ++k) {
      sel.push_back(add_column(0.0, 1.0, {ColumnDef::Kind::selector, v, -1, k}, true));
    }
    r_.selector_binaries += pm.size();
    LinExpr sum, lower = LinExpr::column(v), upper = LinExpr::column(v);
    for (int k = 0; k < pm.size(); ++k) {
      const auto part = pm.partition(k);
      sum.add(1.0, LinExpr::column(sel[static_cast<std::size_t>(k)]));
      lower.add(-part.lo, LinExpr::column(sel[static_cast<std::size_t>(k)]));
      upper.add(-part.hi, LinExpr::column(sel[static_cast<std::size_t>(k)]));
    }
    add_row(sum, Relation::eq, 1.0);
    add_row(lower, Relation::ge, 0.0);
    add_row(upper, Relation::le, 0.0);
    return r_.selector_map[v] = sel;
  }

  // y_{v,k} * x_c, disaggregated: sum_k w_k = x_c, lo_k y_k <= w_k <= hi_k y_k.
  LinExpr selector_times(int v, const Piece& piece, int k, int c) {
    if (piece.selector < 0) return LinExpr::column(c);
    const auto key = std::make_pair(v, c);
    auto it = sel_products_.find(key);
    if (it == sel_products_.end()) {
      const auto& sel = selectors(v);
      const auto& pm = r_.pmaps.at(v);
      std::vector<int> w;
      LinExpr sum;
      for (int m = 0; m < pm.size(); ++m) {
        const Interval b = c == v ? pm.partition(m) : bounds(c);
        const int y = sel[static_cast<std::size_t>(m)];
        const int col = add_column(std::min(0.0, b.lo), std::max(0.0, b.hi), {ColumnDef::Kind::selector_product, y, c, -1});
        w.push_back(col);
        LinExpr lo = LinExpr::column(col);
        lo.add(-b.lo, LinExpr::column(y));
        add_row(lo, Relation::ge, 0.0);
        LinExpr hi = LinExpr::column(col);
        hi.add(-b.hi, LinExpr::column(y));
        add_row(hi, Relation::le, 0.0);
        sum.add(1.0, LinExpr::column(col));
      }
      sum.add(-1.0, LinExpr::column(c));
      add_row(sum, Relation::eq, 0.0);
      it = sel_products_.emplace(key, std::move(w)).first;
    }
    return LinExpr::column(it->second[static_cast<std::size_t>(k)]);
  }

  // Entry (k, m) of y_l y_r^T.
  LinExpr selector_pair(int l, const Piece& pl, int k, int r, const Piece& pr, int m) {
    if (pl.selector < 0 && pr.selector < 0) return LinExpr::value(1.0);
    if (pl.selector < 0) return LinExpr::column(pr.selector);
    if (pr.selector < 0) return LinExpr::column(pl.selector);
    if (l == r) return k == m ? LinExpr::column(pl.selector) : LinExpr::value(0.0);
    if (l > r) return selector_pair(r, pr, m, l, pl, k);
    const auto key = std::make_pair(l, r);
    auto it = sel_pairs_.find(key);
    if (it == sel_pairs_.end()) {
      const auto& sl = selectors(l);
      const auto& sr = selectors(r);
      const int ml = static_cast<int>(sl.size());
      const int mr = static_cast<int>(sr.size());
      std::vector<int> ycols;
      for (int a = 0; a < ml; ++a) {
        for (int b = 0; b < mr; ++b) {
          const int col = add_column(0.0, 1.0, {ColumnDef::Kind::selector_pair, sl[static_cast<std::size_t>(a)],
                                                sr[static_cast<std::size_t>(b)], -1});
          ycols.push_back(col);
          r_.product_binary_map[{l, a, r, b}] = col;
        }
      }
      r_.product_binaries += ml * mr;
      auto y = [&](int a, int b) { return ycols[static_cast<std::size_t>(a * mr + b)]; };
      if (opt_.bmc_product_rows) {
        for (int a = 0; a < ml; ++a) {
          for (int b = 0; b < mr; ++b) {
            LinExpr ge = LinExpr::column(y(a, b));
            ge.add(-1.0, LinExpr::column(sl[static_cast<std::size_t>(a)]));
            ge.add(-1.0, LinExpr::column(sr[static_cast<std::size_t>(b)]));
            add_row(ge, Relation::ge, -1.0);
            LinExpr l1 = LinExpr::column(y(a, b));
            l1.add(-1.0, LinExpr::column(sl[static_cast<std::size_t>(a)]));
            add_row(l1, Relation::le, 0.0);
            LinExpr l2 = LinExpr::column(y(a, b));
            l2.add(-1.0, LinExpr::column(sr[static_cast<std::size_t>(b)]));
            add_row(l2, Relation::le, 0.0);
          }
        }
      } else {
        // Row and column sums of y_l y_r^T reproduce the selectors.
        for (int a = 0; a < ml; ++a) {
          LinExpr e;
          for (int b = 0; b < mr; ++b) e.add(1.0, LinExpr::column(y(a, b)));
          e.add(-1.0, LinExpr::column(sl[static_cast<std::size_t>(a)]));
          add_row(e, Relation::eq, 0.0);
        }
        for (int b = 0; b < mr; ++b) {
          LinExpr e;
          for (int a = 0; a < ml; ++a) e.add(1.0, LinExpr::column(y(a, b)));
          e.add(-1.0, LinExpr::column(sr[static_cast<std::size_t>(b)]));
          add_row(e, Relation::eq, 0.0);
        }
      }
      it = sel_pairs_.emplace(key, std::move(ycols)).first;
    }
    const int mr = static_cast<int>(selectors(r).size());
    return LinExpr::column(it->second[static_cast<std::size_t>(k * mr + m)]);
  }

  // Piecewise McCormick rows with x^l = sum lo_k y_k and x^u = sum hi_k y_k.
  void emit_piecewise(int l, bool use_l, int r, bool use_r, int out, bool under) {
    const auto pl = pieces(l, use_l);
    const auto pr = pieces(r, use_r);
    auto bound_of = [](const Piece& p, bool upper) { return upper ? p.part.hi : p.part.lo; };
    // (upper_l, upper_r, relation)
    struct Form {
      bool ul;
      bool ur;
      Relation rel;
    };
    std::vector<Form> forms;
    if (under) {
      forms.push_back({false, false, Relation::ge});
      forms.push_back({true, true, Relation::ge});
    }
    forms.push_back({false, true, Relation::le});
    if (l != r) forms.push_back({true, false, Relation::le});
    for (const auto& f : forms) {
      LinExpr e = LinExpr::column(out);
      for (std::size_t k = 0; k < pl.size(); ++k) {
        e.add(-bound_of(pl[k], f.ul), selector_times(l, pl[k], static_cast<int>(k), r));
      }
      for (std::size_t m = 0; m < pr.size(); ++m) {
        e.add(-bound_of(pr[m], f.ur), selector_times(r, pr[m], static_cast<int>(m), l));
      }
      for (std::size_t k = 0; k < pl.size(); ++k) {
        for (std::size_t m = 0; m < pr.size(); ++m) {
          const double c = bound_of(pl[k], f.ul) * bound_of(pr[m], f.ur);
          if (c == 0.0) continue;
          if (l == r && use_l && k != m) continue;
          e.add(c, selector_pair(l, pl[k], static_cast<int>(k), r, pr[m], static_cast<int>(m)));
        }
      }
      add_row(e, f.rel, 0.0);
    }
  }

  const Model& model_;
  RelaxOptions opt_;
  RelaxedMILP r_;
  std::vector<Interval> bounds_;
  std::vector<bool> binary_like_;
  std::set<int> emitted_;
  std::map<int, int> term_count_;
  std::map<std::pair<int, int>, std::vector<int>> sel_products_;
  std::map<std::pair<int, int>, std::vector<int>> sel_pairs_;
};

}  // namespace

RelaxedMILP build_relaxation(const Model& model, const PartitionMaps& pmaps, RelaxMode mode, const RelaxOptions& opt) {
  return Builder(model, pmaps, mode, opt).build();
}

std::vector<double> RelaxedMILP::lift(const std::vector<double>& model_point) const {
  std::vector<double> v(columns.size(), 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& d = columns[c];
    switch (d.kind) {
      case ColumnDef::Kind::model: v[c] = model_point[static_cast<std::size_t>(d.a)]; break;
      case ColumnDef::Kind::intermediate:
      case ColumnDef::Kind::selector_product:
      case ColumnDef::Kind::selector_pair:
        v[c] = v[static_cast<std::size_t>(d.a)] * v[static_cast<std::size_t>(d.b)];
        break;
      case ColumnDef::Kind::selector:
        v[c] = pmaps.at(d.a).locate(v[static_cast<std::size_t>(d.a)]) == d.k ? 1.0 : 0.0;
        break;
    }
  }
  return v;
}

std::vector<LinearRow> RelaxedMILP::generate_cuts(const std::vector<double>& point) const {
  std::vector<LinearRow> cuts;
  for (const auto& m : monomials) {
    const double x = point[static_cast<std::size_t>(m.x)];
    const double z = point[static_cast<std::size_t>(m.z)];
    if (z < x * x - oa_tol * std::max(1.0, x * x)) {
      cuts.push_back({{{m.z, 1.0}, {m.x, -2.0 * x}}, Relation::ge, -x * x});
      canonicalize(cuts.back().coeffs);
    }
  }
  return cuts;
}

std::vector<double> RelaxedMILP::project(const std::vector<double>& point) const {
  std::vector<double> out(var_map.size());
  for (std::size_t v = 0; v < var_map.size(); ++v) out[v] = point[static_cast<std::size_t>(var_map[v])];
  return out;
}

Lemma1Regions lemma1_regions(const PartitionMap& pmap, int tangents_per_partition) {
  Model m;
  const Interval d = pmap.domain();
  m.variables.push_back({"x", VarKind::continuous, d.lo, d.hi});
  const Interval sq = square(d);
  m.variables.push_back({"(x^2)", VarKind::continuous, sq.lo, sq.hi});
  m.terms.push_back({{0, 0}, 1});
  const PartitionMaps maps{{0, pmap}};
  Lemma1Regions out;
  RelaxOptions a;
  a.seed_tangents_per_partition = std::max(2, tangents_per_partition);
  out.a = build_relaxation(m, maps, RelaxMode::DTMC, a);
  out.a.milp.cut_callback = nullptr;
  out.a.monomials.clear();
  RelaxOptions b;
  b.monomial = MonomialForm::mccormick;
  out.b = build_relaxation(m, maps, RelaxMode::DTMC, b);
  return out;
}

Interval relaxation_range(const RelaxedMILP& r, const std::vector<std::pair<int, double>>& fixed, int z) {
  MilpProblem p = r.milp;
  for (const auto& [c, v] : fixed) {
    p.lp.col_lower[static_cast<std::size_t>(c)] = v;
    p.lp.col_upper[static_cast<std::size_t>(c)] = v;
  }
  Interval out{kInf, -kInf};
  for (double sense : {1.0, -1.0}) {
    p.lp.objective.assign(static_cast<std::size_t>(p.lp.num_cols()), 0.0);
    p.lp.objective[static_cast<std::size_t>(z)] = sense;
    const auto sol = solve_milp(p, kInf);
    if (sol.status != MilpStatus::optimal) return {kInf, -kInf};
    (sense > 0 ? out.lo : out.hi) = sense * sol.objective;
  }
  return out;
}

}  // namespace polypart
