#include "polypart/testkit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <omp.h>

namespace polypart::testkit {

const char* to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::dense_grid: return "dense_grid";
    case OracleMethod::binary_enumeration: return "binary_enumeration";
    case OracleMethod::vertex_enumeration: return "vertex_enumeration";
  }
  return "?";
}

OracleResult oracle_lp_vertices(const LinearProgram& lp, double feas_tol) {
  const int n = lp.num_cols();
  const int m = lp.num_rows();
  if (n > 10) throw Error("vertex enumeration is limited to 10 columns");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(lp.col_lower[static_cast<std::size_t>(j)]) ||
        !std::isfinite(lp.col_upper[static_cast<std::size_t>(j)])) {
      throw Error("vertex enumeration needs finite column bounds");
    }
  }
  // Candidate hyperplanes: rows, then lower and upper column bounds.
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> rhs;
  for (const auto& row : lp.rows) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    for (const auto& [c, v] : row.coeffs) a(c) += v;
    normals.push_back(a);
    rhs.push_back(row.rhs);
  }
  for (int j = 0; j < n; ++j) {
    for (double b : {lp.col_lower[static_cast<std::size_t>(j)], lp.col_upper[static_cast<std::size_t>(j)]}) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a(j) = 1.0;
      normals.push_back(a);
      rhs.push_back(b);
    }
  }
  OracleResult res;
  res.method = OracleMethod::vertex_enumeration;
  const int h = static_cast<int>(normals.size());
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  auto feasible = [&](const std::vector<double>& x) {
    for (int j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (x[sj] < lp.col_lower[sj] - feas_tol * std::max(1.0, std::abs(lp.col_lower[sj]))) return false;
      if (x[sj] > lp.col_upper[sj] + feas_tol * std::max(1.0, std::abs(lp.col_upper[sj]))) return false;
    }
    for (int i = 0; i < m; ++i) {
      const auto& row = lp.rows[static_cast<std::size_t>(i)];
      if (violation(row, x) > feas_tol * std::max(1.0, std::abs(row.rhs))) return false;
    }
    return true;
  };
  if (n == 0) {
    std::vector<double> x;
    if (feasible(x)) {
      res.feasible = true;
      res.optimum = 0.0;
    }
    return res;
  }
  while (true) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) {
      a.row(r) = normals[static_cast<std::size_t>(pick[static_cast<std::size_t>(r)])].transpose();
      b(r) = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(r)])];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() == n) {
      const Eigen::VectorXd sol = lu.solve(b);
      std::vector<double> x(sol.data(), sol.data() + n);
      ++res.evaluations;
      if (feasible(x)) {
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += lp.objective[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        if (obj < res.optimum) {
          res.optimum = obj;
          res.argmin = x;
          res.feasible = true;
        }
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == h - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
  }
  return res;
}

OracleResult oracle_milp_enumerate(const MilpProblem& p) {
  const auto k = p.integer_columns.size();
  if (k > 20) throw Error("binary enumeration is limited to 20 integer columns");
  SimplexSolver solver(p.lp);
  OracleResult res;
  res.method = OracleMethod::binary_enumeration;
  for (unsigned long long mask = 0; mask < (1ULL << k); ++mask) {
    bool ok = true;
    for (std::size_t s = 0; s < k; ++s) {
      const int c = p.integer_columns[s];
      const double v = (mask >> s) & 1ULL ? 1.0 : 0.0;
      if (v < p.lp.col_lower[static_cast<std::size_t>(c)] || v > p.lp.col_upper[static_cast<std::size_t>(c)]) ok = false;
      solver.set_bounds(c, v, v);
    }
    if (!ok) continue;
    ++res.evaluations;
    const auto lp = solver.solve();
    if (lp.status == LpStatus::unbounded) {
      res.feasible = true;
      res.optimum = -kInf;
      return res;
    }
    if (lp.status != LpStatus::optimal) continue;
    if (lp.objective < res.optimum) {
      res.optimum = lp.objective;
      res.argmin = lp.point;
      res.feasible = true;
    }
  }
  return res;
}

namespace {

struct GridSetup {
  std::vector<int> cont;
  std::vector<int> bins;
  std::vector<Interval> box;
};

GridSetup grid_setup(const Model& model) {
  GridSetup g;
  for (int v : model.original_variables()) {
    const auto& var = model.variables[static_cast<std::size_t>(v)];
    if (var.is_binary()) {
      g.bins.push_back(v);
    } else {
      if (!var.bounds().finite()) throw Error("oracle needs finite bounds on '" + var.name + "'");
      g.cont.push_back(v);
      g.box.push_back(var.bounds());
    }
  }
  if (g.cont.size() > 4) throw Error("oracle is limited to 4 continuous variables");
  if (g.bins.size() > 10) throw Error("oracle is limited to 10 binaries");
  return g;
}

struct Candidate {
  double value = kInf;
  long long index = -1;

  bool operator<(const Candidate& o) const { return value != o.value ? value < o.value : index < o.index; }
};

// Point `idx` of a grid: binary mask in the high part, grid cell in the low.
class GridScan {
 public:
  GridScan(const Model& model, const GridSetup& g, std::vector<Interval> box, int per_dim,
           unsigned long long fixed_mask, bool enumerate_bins, double feas_tol)
      : model_(model), g_(g), box_(std::move(box)), per_dim_(per_dim), fixed_mask_(fixed_mask),
        enumerate_bins_(enumerate_bins), feas_tol_(feas_tol) {
    cells_ = 1;
    for (std::size_t d = 0; d < g_.cont.size(); ++d) cells_ *= per_dim_;
    masks_ = enumerate_bins_ ? (1LL << g_.bins.size()) : 1;
  }

  long long size() const { return cells_ * masks_; }

  unsigned long long mask_of(long long idx) const {
    return enumerate_bins_ ? static_cast<unsigned long long>(idx / cells_) : fixed_mask_;
  }

  void point_at(long long idx, std::vector<double>& x) const {
    x.assign(model_.variables.size(), 0.0);
    const auto mask = mask_of(idx);
    long long cell = idx % cells_;
    for (std::size_t d = 0; d < g_.cont.size(); ++d) {
      const long long c = cell % per_dim_;
      cell /= per_dim_;
      const auto& b = box_[d];
      const double t = per_dim_ == 1 ? 0.5 : static_cast<double>(c) / (per_dim_ - 1);
      x[static_cast<std::size_t>(g_.cont[d])] = per_dim_ == 1 ? b.lo + 0.5 * b.width() : b.lo + t * b.width();
      if (c == per_dim_ - 1) x[static_cast<std::size_t>(g_.cont[d])] = b.hi;
    }
    for (std::size_t s = 0; s < g_.bins.size(); ++s) {
      x[static_cast<std::size_t>(g_.bins[s])] = (mask >> s) & 1ULL ? 1.0 : 0.0;
    }
    complete_point(model_, x);
  }

  // Objective at idx, or +inf when infeasible beyond tolerance.
  double value_at(long long idx, std::vector<double>& x) const {
    point_at(idx, x);
    if (max_violation(model_, x) > feas_tol_) return kInf;
    return objective_value(model_, x);
  }

 private:
  const Model& model_;
  const GridSetup& g_;
  std::vector<Interval> box_;
  int per_dim_;
  unsigned long long fixed_mask_;
  bool enumerate_bins_;
  double feas_tol_;
  long long cells_ = 1;
  long long masks_ = 1;
};

constexpr std::size_t kKeep = 8;

void keep_best(std::vector<Candidate>& best, Candidate c) {
  if (!std::isfinite(c.value)) return;
  if (best.size() == kKeep && !(c < best.back())) return;
  best.insert(std::upper_bound(best.begin(), best.end(), c), c);
  if (best.size() > kKeep) best.pop_back();
}

std::vector<Candidate> scan_serial(const GridScan& scan) {
  std::vector<Candidate> best;
  std::vector<double> x;
  for (long long i = 0; i < scan.size(); ++i) keep_best(best, {scan.value_at(i, x), i});
  return best;
}

std::vector<Candidate> scan_parallel(const GridScan& scan) {
  std::vector<Candidate> best;
#pragma omp parallel
  {
    std::vector<Candidate> local;
    std::vector<double> x;
#pragma omp for schedule(static) nowait
    for (long long i = 0; i < scan.size(); ++i) keep_best(local, {scan.value_at(i, x), i});
#pragma omp critical
    for (const auto& c : local) keep_best(best, c);
  }
  return best;
}

OracleResult oracle_grid(const Model& model, const GridOptions& opt, bool parallel) {
  const GridSetup g = grid_setup(model);
  OracleResult res;
  res.method = g.cont.empty() ? OracleMethod::binary_enumeration : OracleMethod::dense_grid;
  const int per_dim = g.cont.empty() ? 1 : std::max(2, opt.grid_per_dim);
  auto scan_fn = parallel ? scan_parallel : scan_serial;

  GridScan coarse(model, g, g.box, per_dim, 0, true, opt.feas_tol);
  res.evaluations += coarse.size();
  std::vector<double> x;
  struct Seed {
    unsigned long long mask;
    std::vector<double> center;
  };
  std::vector<Seed> seeds;
  for (const auto& c : scan_fn(coarse)) {
    coarse.point_at(c.index, x);
    std::vector<double> center;
    for (int v : g.cont) center.push_back(x[static_cast<std::size_t>(v)]);
    seeds.push_back({coarse.mask_of(c.index), center});
    if (c.value < res.optimum) {
      res.optimum = c.value;
      res.argmin = x;
      res.feasible = true;
    }
  }
  std::vector<double> spacing;
  for (const auto& b : g.box) spacing.push_back(b.width() / (per_dim - 1));
  res.grid_spacing = spacing.empty() ? 0.0 : *std::max_element(spacing.begin(), spacing.end());
  if (g.cont.empty()) return res;

  // Each seed is refined independently; its best cell recenters the next grid.
  double finest = res.grid_spacing;
  for (auto& seed : seeds) {
    std::vector<double> h = spacing;
    for (int r = 0; r < opt.refinements; ++r) {
      std::vector<Interval> box;
      for (std::size_t d = 0; d < g.cont.size(); ++d) {
        const auto& full = g.box[d];
        box.push_back({std::max(full.lo, seed.center[d] - 2.0 * h[d]), std::min(full.hi, seed.center[d] + 2.0 * h[d])});
        h[d] = box.back().width() / (per_dim - 1);
      }
      GridScan fine(model, g, box, per_dim, seed.mask, false, opt.feas_tol);
      res.evaluations += fine.size();
      const auto best = scan_fn(fine);
      if (best.empty()) break;
      fine.point_at(best.front().index, x);
      for (std::size_t d = 0; d < g.cont.size(); ++d) seed.center[d] = x[static_cast<std::size_t>(g.cont[d])];
      if (best.front().value < res.optimum) {
        res.optimum = best.front().value;
        res.argmin = x;
      }
      for (double v : h) finest = std::min(finest, v);
    }
  }
  res.grid_spacing = finest;
  return res;
}

}  // namespace

OracleResult oracle_minlp(const Model& model, const GridOptions& opt) { return oracle_grid(model, opt, true); }

OracleResult oracle_minlp_serial(const Model& model, const GridOptions& opt) {
  return oracle_grid(model, opt, false);
}

std::vector<std::vector<double>> feasible_samples(const Model& model, int grid_per_dim, double cutoff,
                                                  double feas_tol) {
  const GridSetup g = grid_setup(model);
  GridScan scan(model, g, g.box, g.cont.empty() ? 1 : std::max(2, grid_per_dim), 0, true, feas_tol);
  std::vector<std::vector<double>> out;
  std::vector<double> x;
  for (long long i = 0; i < scan.size(); ++i) {
    const double v = scan.value_at(i, x);
    if (std::isfinite(v) && v <= cutoff) out.push_back(x);
  }
  return out;
}

namespace {

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

GeneratedInstance gen_random_instance(std::uint64_t seed, const InstanceShape& shape) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); };
  auto coef = [&] {
    double c = round_to(uni(-3.0, 3.0), 0.25);
    return c == 0.0 ? 1.0 : c;
  };

  GeneratedInstance inst;
  RawModel& raw = inst.raw;
  const int nc = shape.continuous;
  const int nb = shape.binaries;
  std::vector<double> anchor;
  for (int i = 0; i < nc; ++i) {
    double lo = shape.nonnegative ? round_to(uni(0.0, shape.box / 2), 0.5) : round_to(uni(-shape.box, shape.box / 2), 0.5);
    double width = round_to(uni(1.0, shape.box), 0.5);
    raw.variables.push_back({"x" + std::to_string(i + 1), VarKind::continuous, lo, lo + width});
    anchor.push_back(uni(lo, lo + width));
  }
  for (int i = 0; i < nb; ++i) {
    raw.variables.push_back({"b" + std::to_string(i + 1), VarKind::binary, 0.0, 1.0});
    anchor.push_back(pick(2));
  }

  // Pool of nonlinear products.
  std::vector<std::vector<std::pair<int, int>>> products;
  auto add_product = [&](std::vector<std::pair<int, int>> f) {
    Monomial m{1.0, f};
    Expr e{{m}, 0.0};
    canonicalize(e);
    if (e.terms.empty()) return;
    for (const auto& p : products) {
      if (p == e.terms.front().factors) return;
    }
    products.push_back(e.terms.front().factors);
  };
  for (int k = 0; k < shape.bilinear && nc + nb >= 2; ++k) {
    int i = pick(nc + nb);
    int j = pick(nc + nb);
    for (int guard = 0; j == i && guard < 20; ++guard) j = pick(nc + nb);
    if (i == j) continue;
    add_product({{i, 1}, {j, 1}});
  }
  for (int k = 0; k < shape.quadratic && nc > 0; ++k) add_product({{pick(nc), 2}});
  for (int k = 0; k < shape.higher && nc > 0; ++k) {
    const int deg = 3 + pick(2);
    std::vector<std::pair<int, int>> f;
    if (pick(3) == 0) {
      f.push_back({pick(nc), deg});
    } else {
      for (int d = 0; d < deg; ++d) f.push_back({pick(nc), 1});
    }
    add_product(f);
  }

  auto eval = [&](const Expr& e) { return evaluate(e, anchor); };
  auto random_expr = [&](bool all_products) {
    Expr e;
    for (std::size_t p = 0; p < products.size(); ++p) {
      if (all_products || pick(2) == 0) e.terms.push_back({coef(), products[p]});
    }
    for (int i = 0; i < nc + nb; ++i) {
      if (pick(2) == 0) e.terms.push_back({coef(), {{i, 1}}});
    }
    canonicalize(e);
    return e;
  };

  raw.objective = random_expr(true);
  for (int c = 0; c < shape.constraints; ++c) {
    Expr e = random_expr(false);
    if (e.terms.empty()) e.terms.push_back({1.0, {{pick(nc + nb), 1}}});
    const bool ge = pick(2) == 0;
    const double at = eval(e);
    const double slack = round_to(uni(0.0, 1.0), 0.125);
    raw.constraints.push_back({"c" + std::to_string(c + 1), e, ge ? Relation::ge : Relation::le,
                               ge ? std::floor((at - slack) * 8) / 8 : std::ceil((at + slack) * 8) / 8});
  }

  // Shift the objective so it stays >= 1 on the box.
  Interval range{raw.objective.constant, raw.objective.constant};
  for (const auto& m : raw.objective.terms) {
    Interval t{m.coef, m.coef};
    for (const auto& [v, p] : m.factors) {
      const auto& var = raw.variables[static_cast<std::size_t>(v)];
      Interval f = var.bounds();
      Interval pw{1.0, 1.0};
      for (int k = 0; k < p; ++k) pw = product(pw, f);
      if (p % 2 == 0) pw.lo = std::max(pw.lo, 0.0);
      t = product(t, pw);
    }
    range.lo += t.lo;
    range.hi += t.hi;
  }
  raw.objective.constant += std::ceil(1.0 - range.lo);

  inst.model = normalize(raw);
  inst.anchor = anchor;
  inst.anchor.resize(inst.model.variables.size(), 0.0);
  complete_point(inst.model, inst.anchor);
  return inst;
}

LinearProgram gen_random_lp(std::uint64_t seed, int n, int m) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
  LinearProgram lp;
  std::vector<double> anchor;
  for (int j = 0; j < n; ++j) {
    const double lo = std::round(uni(-5.0, 0.0));
    const double hi = lo + 1.0 + std::round(uni(0.0, 6.0));
    lp.add_column(lo, hi, std::round(uni(-5.0, 5.0)));
    anchor.push_back(uni(lo, hi));
  }
  const bool anchored = pick(5) != 0;
  for (int i = 0; i < m; ++i) {
    LinearRow row;
    for (int j = 0; j < n; ++j) {
      if (pick(3) != 0) row.coeffs.emplace_back(j, std::round(uni(-5.0, 5.0)));
    }
    canonicalize(row.coeffs);
    const int r = pick(10);
    row.rel = r < 5 ? Relation::le : (r < 9 ? Relation::ge : Relation::eq);
    const double at = anchored ? dot(row.coeffs, anchor) : uni(-10.0, 10.0);
    if (row.rel == Relation::le) row.rhs = std::ceil(at + uni(0.0, 3.0));
    else if (row.rel == Relation::ge) row.rhs = std::floor(at - uni(0.0, 3.0));
    else row.rhs = at;
    lp.add_row(row);
  }
  return lp;
}

MilpProblem gen_random_milp(std::uint64_t seed, int binaries, int continuous, int rows) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int k) { return std::uniform_int_distribution<int>(0, k - 1)(rng); };
  MilpProblem p;
  std::vector<double> anchor;
  for (int j = 0; j < binaries; ++j) {
    p.integer_columns.push_back(p.lp.add_column(0.0, 1.0, std::round(uni(-10.0, 10.0))));
    anchor.push_back(pick(2));
  }
  for (int j = 0; j < continuous; ++j) {
    const double lo = std::round(uni(-4.0, 0.0));
    const double hi = lo + 1.0 + std::round(uni(0.0, 5.0));
    p.lp.add_column(lo, hi, std::round(uni(-5.0, 5.0)) + 0.5 * pick(2));
    anchor.push_back(uni(lo, hi));
  }
  const int n = binaries + continuous;
  const bool anchored = pick(8) != 0;
  for (int i = 0; i < rows; ++i) {
    LinearRow row;
    for (int j = 0; j < n; ++j) {
      if (pick(2) == 0) row.coeffs.emplace_back(j, std::round(uni(-6.0, 6.0)));
    }
    canonicalize(row.coeffs);
    row.rel = pick(4) == 0 ? Relation::ge : Relation::le;
    const double at = anchored ? dot(row.coeffs, anchor) : uni(-6.0, 6.0);
    row.rhs = row.rel == Relation::le ? std::ceil(at + uni(0.0, 2.0)) : std::floor(at - uni(0.0, 2.0));
    p.lp.add_row(row);
  }
  return p;
}

}  // namespace polypart::testkit
