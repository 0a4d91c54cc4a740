#include "polypart/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace polypart {

int LinearProgram::add_column(double lower, double upper, double cost) {
  objective.push_back(cost);
  col_lower.push_back(lower);
  col_upper.push_back(upper);
  return num_cols() - 1;
}

int LinearProgram::add_row(LinearRow row) {
  rows.push_back(std::move(row));
  return num_rows() - 1;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
    case LpStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

namespace {

Interval logical_bounds(const LinearRow& row) {
  switch (row.rel) {
    case Relation::le: return {-kInf, row.rhs};
    case Relation::ge: return {row.rhs, kInf};
    case Relation::eq: return {row.rhs, row.rhs};
  }
  return {-kInf, kInf};
}

double pow2_round(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  return std::exp2(std::round(std::log2(v)));
}

}  // namespace

// Geometric-mean equilibration, a few alternating passes, rounded to powers
// of two so scaling itself is exact.
void SimplexSolver::compute_column_scales(const std::vector<LinearRow>& rows) {
  col_scale_.assign(static_cast<std::size_t>(n_), 1.0);
  std::vector<double> rs(rows.size(), 1.0);
  for (int pass = 0; pass < 6; ++pass) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double lo = kInf, hi = 0.0;
      for (const auto& [c, v] : rows[i].coeffs) {
        const double a = std::abs(v) * col_scale_[static_cast<std::size_t>(c)];
        if (a == 0.0) continue;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      rs[i] = hi > 0.0 ? 1.0 / std::sqrt(lo * hi) : 1.0;
    }
    std::vector<double> lo(static_cast<std::size_t>(n_), kInf), hi(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [c, v] : rows[i].coeffs) {
        const double a = std::abs(v) * rs[i];
        if (a == 0.0) continue;
        auto cc = static_cast<std::size_t>(c);
        lo[cc] = std::min(lo[cc], a);
        hi[cc] = std::max(hi[cc], a);
      }
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_); ++j) {
      col_scale_[j] = hi[j] > 0.0 ? 1.0 / std::sqrt(lo[j] * hi[j]) : 1.0;
    }
  }
  for (auto& c : col_scale_) c = std::clamp(pow2_round(c), 0x1p-40, 0x1p40);
}

SimplexSolver::SimplexSolver(LinearProgram lp, SimplexOptions options)
    : lp_(std::move(lp)), opt_(options) {
  n_ = lp_.num_cols();
  m_ = 0;
  cols_.assign(static_cast<std::size_t>(n_), {});
  compute_column_scales(lp_.rows);
  lo_.resize(static_cast<std::size_t>(n_));
  hi_.resize(static_cast<std::size_t>(n_));
  cost_.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    lo_[jj] = lp_.col_lower[jj] / col_scale_[jj];
    hi_[jj] = lp_.col_upper[jj] / col_scale_[jj];
    cost_[jj] = lp_.objective[jj] * col_scale_[jj];
  }
  status_.assign(static_cast<std::size_t>(n_), BasisStatus::at_lower);
  pos_.assign(static_cast<std::size_t>(n_), -1);
  const auto rows = std::move(lp_.rows);
  lp_.rows.clear();
  for (const auto& r : rows) add_row(r);
}

void SimplexSolver::set_bounds(int col, double lower, double upper) {
  lp_.col_lower[static_cast<std::size_t>(col)] = lower;
  lp_.col_upper[static_cast<std::size_t>(col)] = upper;
  lo_[static_cast<std::size_t>(col)] = lower / col_scale_[static_cast<std::size_t>(col)];
  hi_[static_cast<std::size_t>(col)] = upper / col_scale_[static_cast<std::size_t>(col)];
}

void SimplexSolver::set_objective(std::vector<double> objective) {
  lp_.objective = std::move(objective);
  for (int j = 0; j < n_; ++j) {
    cost_[static_cast<std::size_t>(j)] = lp_.objective[static_cast<std::size_t>(j)] * col_scale_[static_cast<std::size_t>(j)];
  }
}

void SimplexSolver::add_row(const LinearRow& row) {
  const int i = m_++;
  SparseRow coeffs = row.coeffs;
  canonicalize(coeffs);
  double lo = kInf, hi = 0.0;
  for (const auto& [col, v] : coeffs) {
    const double a = std::abs(v) * col_scale_[static_cast<std::size_t>(col)];
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double rs = hi > 0.0 ? std::clamp(pow2_round(1.0 / std::sqrt(lo * hi)), 0x1p-40, 0x1p40) : 1.0;
  row_scale_.push_back(rs);
  for (const auto& [col, v] : coeffs) {
    cols_[static_cast<std::size_t>(col)].emplace_back(i, v * rs * col_scale_[static_cast<std::size_t>(col)]);
  }
  lp_.rows.push_back({coeffs, row.rel, row.rhs});
  const Interval b = logical_bounds(row);
  lo_.push_back(b.lo * rs);
  hi_.push_back(b.hi * rs);
  cost_.push_back(0.0);
  status_.push_back(BasisStatus::basic);
  pos_.push_back(static_cast<int>(head_.size()));
  head_.push_back(n_ + i);
  x_.resize(static_cast<std::size_t>(total()), 0.0);
  factored_ = false;
}

double SimplexSolver::tol_for(double bound) const {
  return opt_.feas_tol * std::max(1.0, std::abs(bound));
}

void SimplexSolver::load_cold_basis() {
  head_.resize(static_cast<std::size_t>(m_));
  pos_.assign(static_cast<std::size_t>(total()), -1);
  for (int j = 0; j < n_; ++j) status_[static_cast<std::size_t>(j)] = BasisStatus::at_lower;
  for (int i = 0; i < m_; ++i) {
    head_[static_cast<std::size_t>(i)] = n_ + i;
    pos_[static_cast<std::size_t>(n_ + i)] = i;
    status_[static_cast<std::size_t>(n_ + i)] = BasisStatus::basic;
  }
  factored_ = false;
}

bool SimplexSolver::load_warm_basis(const Basis& warm) {
  const int warm_rows = static_cast<int>(warm.head.size());
  if (static_cast<int>(warm.status.size()) != n_ + warm_rows || warm_rows > m_) return false;
  std::vector<int> head(warm.head);
  std::vector<BasisStatus> status(warm.status);
  // Rows appended since the basis was taken enter with their logicals basic.
  for (int i = warm_rows; i < m_; ++i) {
    head.push_back(n_ + i);
    status.push_back(BasisStatus::basic);
  }
  int basic_count = 0;
  for (auto s : status) basic_count += s == BasisStatus::basic;
  if (basic_count != m_) return false;
  for (int h : head) {
    if (h < 0 || h >= total() || status[static_cast<std::size_t>(h)] != BasisStatus::basic) return false;
  }
  if (factored_ && head == head_) {
    status_ = std::move(status);
    return true;
  }
  head_ = std::move(head);
  status_ = std::move(status);
  pos_.assign(static_cast<std::size_t>(total()), -1);
  for (int i = 0; i < m_; ++i) pos_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = i;
  factored_ = false;
  return true;
}

void SimplexSolver::normalize_nonbasic() {
  for (int j = 0; j < total(); ++j) {
    auto& s = status_[static_cast<std::size_t>(j)];
    if (s == BasisStatus::basic) continue;
    const double lo = lo_[static_cast<std::size_t>(j)];
    const double hi = hi_[static_cast<std::size_t>(j)];
    const bool lo_f = std::isfinite(lo);
    const bool hi_f = std::isfinite(hi);
    if (s == BasisStatus::at_upper && !hi_f) s = lo_f ? BasisStatus::at_lower : BasisStatus::free_zero;
    if (s == BasisStatus::at_lower && !lo_f) s = hi_f ? BasisStatus::at_upper : BasisStatus::free_zero;
    if (s == BasisStatus::free_zero && (lo_f || hi_f)) s = lo_f ? BasisStatus::at_lower : BasisStatus::at_upper;
    if (lo == hi) s = BasisStatus::at_lower;
    double& x = x_[static_cast<std::size_t>(j)];
    switch (s) {
      case BasisStatus::at_lower: x = lo; break;
      case BasisStatus::at_upper: x = hi; break;
      default: x = 0.0; break;
    }
  }
}

// B = [structural columns | -e_r for basic logicals]. Only the square block
// of structural columns on rows without a basic logical needs inverting.
bool SimplexSolver::refactor() { return factor_once(true); }

// Swaps structural columns that are linearly dependent on the rest of the
// basis for the logicals of the rows they leave uncovered.
void SimplexSolver::repair_basis(const std::vector<int>& struct_pos, const std::vector<int>& free_rows) {
  const std::size_t k = struct_pos.size();
  std::vector<int> row_slot(static_cast<std::size_t>(m_), -1);
  for (std::size_t t = 0; t < free_rows.size(); ++t) row_slot[static_cast<std::size_t>(free_rows[t])] = static_cast<int>(t);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(free_rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t s = 0; s < k; ++s) {
    for (const auto& [r, v] : cols_[static_cast<std::size_t>(head_[static_cast<std::size_t>(struct_pos[s])])]) {
      const int slot = row_slot[static_cast<std::size_t>(r)];
      if (slot >= 0) a(slot, static_cast<Eigen::Index>(s)) = v;
    }
  }
  const double amax = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  std::vector<char> row_used(free_rows.size(), 0), col_used(k, 0);
  for (std::size_t step = 0; step < k; ++step) {
    Eigen::Index bi = -1, bj = -1;
    double best = 1e-9 * std::max(1.0, amax);
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (col_used[static_cast<std::size_t>(j)]) continue;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (row_used[static_cast<std::size_t>(i)]) continue;
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    row_used[static_cast<std::size_t>(bi)] = 1;
    col_used[static_cast<std::size_t>(bj)] = 1;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (row_used[static_cast<std::size_t>(i)] || a(i, bj) == 0.0) continue;
      a.row(i) -= (a(i, bj) / a(bi, bj)) * a.row(bi);
    }
  }
  std::size_t next_row = 0;
  for (std::size_t s = 0; s < k; ++s) {
    if (col_used[s]) continue;
    while (next_row < free_rows.size() && row_used[next_row]) ++next_row;
    if (next_row >= free_rows.size()) break;
    row_used[next_row] = 1;
    const int p = struct_pos[s];
    const auto out = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
    const int logical = n_ + free_rows[next_row];
    const double x = x_[out];
    const bool lo_f = std::isfinite(lo_[out]);
    const bool hi_f = std::isfinite(hi_[out]);
    if (lo_f && (!hi_f || std::abs(x - lo_[out]) <= std::abs(hi_[out] - x))) {
      status_[out] = BasisStatus::at_lower;
      x_[out] = lo_[out];
    } else if (hi_f) {
      status_[out] = BasisStatus::at_upper;
      x_[out] = hi_[out];
    } else {
      status_[out] = BasisStatus::free_zero;
      x_[out] = 0.0;
    }
    pos_[out] = -1;
    head_[static_cast<std::size_t>(p)] = logical;
    pos_[static_cast<std::size_t>(logical)] = p;
    status_[static_cast<std::size_t>(logical)] = BasisStatus::basic;
  }
}

bool SimplexSolver::factor_once(bool allow_repair) {
  const auto m = static_cast<std::size_t>(m_);
  binv_.assign(m * m, 0.0);
  pivots_since_refactor_ = 0;
  if (m_ == 0) {
    factored_ = true;
    return true;
  }
  std::vector<int> struct_pos;
  std::vector<int> row_free(m, 1);  // 1 if no basic logical covers the row
  for (int p = 0; p < m_; ++p) {
    const int h = head_[static_cast<std::size_t>(p)];
    if (h >= n_) {
      row_free[static_cast<std::size_t>(h - n_)] = 0;
    } else {
      struct_pos.push_back(p);
    }
  }
  std::vector<int> free_rows;
  std::vector<int> row_slot(m, -1);
  for (int r = 0; r < m_; ++r) {
    if (row_free[static_cast<std::size_t>(r)]) {
      row_slot[static_cast<std::size_t>(r)] = static_cast<int>(free_rows.size());
      free_rows.push_back(r);
    }
  }
  const auto k = struct_pos.size();
  if (free_rows.size() != k) return false;
  bool repaired = false;

  Eigen::MatrixXd kinv;
  if (k > 0) {
    Eigen::MatrixXd kmat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t s = 0; s < k; ++s) {
      const int col = head_[static_cast<std::size_t>(struct_pos[s])];
      for (const auto& [r, v] : cols_[static_cast<std::size_t>(col)]) {
        const int slot = row_slot[static_cast<std::size_t>(r)];
        if (slot >= 0) kmat(slot, static_cast<Eigen::Index>(s)) = v;
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kmat);
    const auto& lum = lu.matrixLU();
    double dmax = 0.0;
    double dmin = kInf;
    for (Eigen::Index i = 0; i < lum.rows(); ++i) {
      dmax = std::max(dmax, std::abs(lum(i, i)));
      dmin = std::min(dmin, std::abs(lum(i, i)));
    }
    if (!(dmin > 1e-11 * std::max(1.0, dmax))) {
      if (!allow_repair) return false;
      repair_basis(struct_pos, free_rows);
      repaired = true;
    } else {
      kinv = lu.inverse();
    }
  }
  if (repaired) return factor_once(false);
  // Structural positions: rows of K^{-1} on the free rows.
  for (std::size_t s = 0; s < k; ++s) {
    double* row = &binv_[static_cast<std::size_t>(struct_pos[s]) * m];
    for (std::size_t t = 0; t < k; ++t) row[free_rows[t]] = kinv(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
  }
  // Logical positions: u_logical(r) = B[r, S] u_S - b_r.
  std::vector<int> logical_slot(m, -1);
  std::vector<int> logical_pos;
  for (int p = 0; p < m_; ++p) {
    const int h = head_[static_cast<std::size_t>(p)];
    if (h >= n_) {
      logical_slot[static_cast<std::size_t>(h - n_)] = static_cast<int>(logical_pos.size());
      logical_pos.push_back(p);
    }
  }
  if (k > 0 && !logical_pos.empty()) {
    Eigen::MatrixXd bl = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(logical_pos.size()), static_cast<Eigen::Index>(k));
    bool any = false;
    for (std::size_t s = 0; s < k; ++s) {
      const int col = head_[static_cast<std::size_t>(struct_pos[s])];
      for (const auto& [r, v] : cols_[static_cast<std::size_t>(col)]) {
        const int slot = logical_slot[static_cast<std::size_t>(r)];
        if (slot >= 0) {
          bl(slot, static_cast<Eigen::Index>(s)) = v;
          any = true;
        }
      }
    }
    if (any) {
      const Eigen::MatrixXd prod = bl * kinv;
      for (std::size_t l = 0; l < logical_pos.size(); ++l) {
        double* row = &binv_[static_cast<std::size_t>(logical_pos[l]) * m];
        for (std::size_t t = 0; t < k; ++t) row[free_rows[t]] = prod(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t));
      }
    }
  }
  for (std::size_t l = 0; l < logical_pos.size(); ++l) {
    const int r = head_[static_cast<std::size_t>(logical_pos[l])] - n_;
    binv_[static_cast<std::size_t>(logical_pos[l]) * m + static_cast<std::size_t>(r)] = -1.0;
  }
  factored_ = true;
  return true;
}

void SimplexSolver::compute_basic_values() {
  const auto m = static_cast<std::size_t>(m_);
  std::vector<double> rhs(m, 0.0);  // N x_N
  for (int j = 0; j < total(); ++j) {
    if (status_[static_cast<std::size_t>(j)] == BasisStatus::basic) continue;
    const double xj = x_[static_cast<std::size_t>(j)];
    if (xj == 0.0) continue;
    if (j < n_) {
      for (const auto& [r, v] : cols_[static_cast<std::size_t>(j)]) rhs[static_cast<std::size_t>(r)] += v * xj;
    } else {
      rhs[static_cast<std::size_t>(j - n_)] -= xj;
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    const double* row = &binv_[p * m];
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += row[r] * rhs[r];
    x_[static_cast<std::size_t>(head_[p])] = -acc;
  }
}

void SimplexSolver::column_times_binv(int j, std::vector<double>& alpha) const {
  const auto m = static_cast<std::size_t>(m_);
  alpha.assign(m, 0.0);
  if (j >= n_) {
    const auto r = static_cast<std::size_t>(j - n_);
    for (std::size_t p = 0; p < m; ++p) alpha[p] = -binv_[p * m + r];
    return;
  }
  for (const auto& [r, v] : cols_[static_cast<std::size_t>(j)]) {
    const auto rr = static_cast<std::size_t>(r);
    for (std::size_t p = 0; p < m; ++p) alpha[p] += binv_[p * m + rr] * v;
  }
}

double SimplexSolver::dot_column(int j, const std::vector<double>& y) const {
  if (j >= n_) return -y[static_cast<std::size_t>(j - n_)];
  double s = 0.0;
  for (const auto& [r, v] : cols_[static_cast<std::size_t>(j)]) s += y[static_cast<std::size_t>(r)] * v;
  return s;
}

SimplexSolver::Outcome SimplexSolver::iterate() {
  const auto m = static_cast<std::size_t>(m_);
  const int max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : 50 * (m_ + n_) + 10000;
  std::vector<double> cb(m), y(m), alpha;
  int degenerate = 0;
  bool bland = false;
  for (int iter = 0; iter < max_iter; ++iter, ++iterations_) {
    if (pivots_since_refactor_ >= opt_.refactor_every) {
      if (!refactor()) return Outcome::numerical;
      compute_basic_values();
    }
    // Phase selection: composite phase 1 while any basic variable is out of bounds.
    bool phase1 = false;
    for (std::size_t p = 0; p < m; ++p) {
      const auto b = static_cast<std::size_t>(head_[p]);
      const double x = x_[b];
      if (x < lo_[b] - tol_for(lo_[b])) {
        cb[p] = -1.0;
        phase1 = true;
      } else if (x > hi_[b] + tol_for(hi_[b])) {
        cb[p] = 1.0;
        phase1 = true;
      } else {
        cb[p] = 0.0;
      }
    }
    if (!phase1) {
      for (std::size_t p = 0; p < m; ++p) cb[p] = cost_[static_cast<std::size_t>(head_[p])];
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      if (cb[p] == 0.0) continue;
      const double* row = &binv_[p * m];
      for (std::size_t r = 0; r < m; ++r) y[r] += cb[p] * row[r];
    }
    // Pricing.
    int enter = -1;
    double best = 0.0;
    double enter_d = 0.0;
    for (int j = 0; j < total(); ++j) {
      const auto s = status_[static_cast<std::size_t>(j)];
      if (s == BasisStatus::basic) continue;
      if (lo_[static_cast<std::size_t>(j)] == hi_[static_cast<std::size_t>(j)]) continue;
      const double c = phase1 ? 0.0 : cost_[static_cast<std::size_t>(j)];
      const double d = c - dot_column(j, y);
      bool eligible = false;
      if (s == BasisStatus::at_lower) eligible = d < -opt_.opt_tol;
      else if (s == BasisStatus::at_upper) eligible = d > opt_.opt_tol;
      else eligible = std::abs(d) > opt_.opt_tol;
      if (!eligible) continue;
      if (bland) {
        enter = j;
        enter_d = d;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = j;
        enter_d = d;
      }
    }
    if (enter < 0) return phase1 ? Outcome::infeasible : Outcome::optimal;

    const double dir = enter_d < 0.0 ? 1.0 : -1.0;
    column_times_binv(enter, alpha);
    const auto q = static_cast<std::size_t>(enter);
    const double range = std::isfinite(lo_[q]) && std::isfinite(hi_[q]) ? hi_[q] - lo_[q] : kInf;
    // Harris two-pass ratio test: pass 1 finds the largest step allowed with
    // bounds relaxed by the feasibility tolerance, pass 2 picks the largest
    // pivot among the rows blocking within that step.
    struct Cand {
      std::size_t p;
      double target;
      double t;
      double a;
    };
    std::vector<Cand> cands;
    double theta_relaxed = range;
    for (std::size_t p = 0; p < m; ++p) {
      const double a = alpha[p];
      if (std::abs(a) <= opt_.pivot_tol) continue;
      const double rate = -dir * a;
      const auto b = static_cast<std::size_t>(head_[p]);
      const double x = x_[b];
      const bool below = x < lo_[b] - tol_for(lo_[b]);
      const bool above = x > hi_[b] + tol_for(hi_[b]);
      double target;
      if (rate < 0.0) {
        if (above) target = hi_[b];
        else if (below) continue;
        else target = lo_[b];
      } else {
        if (below) target = lo_[b];
        else if (above) continue;
        else target = hi_[b];
      }
      if (!std::isfinite(target)) continue;
      const double slack = rate < 0.0 ? -tol_for(target) : tol_for(target);
      theta_relaxed = std::min(theta_relaxed, std::max(0.0, (target + slack - x) / rate));
      cands.push_back({p, target, std::max(0.0, (target - x) / rate), a});
    }
    double theta = kInf;
    int leave = -1;
    double leave_target = 0.0;
    if (range <= theta_relaxed) {
      theta = range;
    } else {
      for (const auto& c : cands) {
        if (c.t > theta_relaxed) continue;
        bool take = leave < 0;
        if (!take) {
          take = bland ? head_[c.p] < head_[static_cast<std::size_t>(leave)]
                       : std::abs(c.a) > std::abs(alpha[static_cast<std::size_t>(leave)]);
        }
        if (take) {
          leave = static_cast<int>(c.p);
          leave_target = c.target;
          theta = c.t;
        }
      }
    }
    if (!std::isfinite(theta)) return phase1 ? Outcome::numerical : Outcome::unbounded;

    // Move.
    x_[q] += dir * theta;
    for (std::size_t p = 0; p < m; ++p) {
      if (alpha[p] != 0.0) x_[static_cast<std::size_t>(head_[p])] += -dir * alpha[p] * theta;
    }
    if (theta <= 1e-12) {
      if (++degenerate > opt_.bland_after) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    if (leave < 0) {
      status_[q] = status_[q] == BasisStatus::at_lower ? BasisStatus::at_upper : BasisStatus::at_lower;
      x_[q] = status_[q] == BasisStatus::at_lower ? lo_[q] : hi_[q];
      continue;
    }
    const auto r = static_cast<std::size_t>(leave);
    const auto out = static_cast<std::size_t>(head_[r]);
    x_[out] = leave_target;
    status_[out] = (leave_target == lo_[out]) ? BasisStatus::at_lower : BasisStatus::at_upper;
    pos_[out] = -1;
    head_[r] = enter;
    pos_[q] = leave;
    status_[q] = BasisStatus::basic;
    // Eta update of the explicit inverse.
    const double piv = alpha[r];
    double* prow = &binv_[r * m];
    for (std::size_t c = 0; c < m; ++c) prow[c] /= piv;
    for (std::size_t p = 0; p < m; ++p) {
      if (p == r || alpha[p] == 0.0) continue;
      const double f = alpha[p];
      double* row = &binv_[p * m];
      for (std::size_t c = 0; c < m; ++c) {
        if (prow[c] != 0.0) row[c] -= f * prow[c];
      }
    }
    ++pivots_since_refactor_;
  }
  return Outcome::iteration_limit;
}

LpSolution SimplexSolver::finish(Outcome outcome, int iterations, bool rejected) {
  LpSolution sol;
  sol.iterations = iterations;
  sol.warm_start_rejected = rejected;
  switch (outcome) {
    case Outcome::optimal: sol.status = LpStatus::optimal; break;
    case Outcome::infeasible: sol.status = LpStatus::infeasible; break;
    case Outcome::unbounded: sol.status = LpStatus::unbounded; break;
    case Outcome::iteration_limit: sol.status = LpStatus::iteration_limit; break;
    case Outcome::numerical: sol.status = LpStatus::numerical_error; break;
  }
  sol.point.assign(x_.begin(), x_.begin() + n_);
  for (int j = 0; j < n_; ++j) sol.point[static_cast<std::size_t>(j)] *= col_scale_[static_cast<std::size_t>(j)];
  sol.objective = 0.0;
  for (int j = 0; j < n_; ++j) sol.objective += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  const auto m = static_cast<std::size_t>(m_);
  sol.duals.assign(m, 0.0);
  if (sol.status == LpStatus::optimal) {
    for (std::size_t p = 0; p < m; ++p) {
      const double c = cost_[static_cast<std::size_t>(head_[p])];
      if (c == 0.0) continue;
      for (std::size_t r = 0; r < m; ++r) sol.duals[r] += c * binv_[p * m + r];
    }
    for (std::size_t r = 0; r < m; ++r) sol.duals[r] *= row_scale_[r];
  }
  sol.basis.head = head_;
  sol.basis.status = status_;
  return sol;
}

bool SimplexSolver::residuals_ok() const {
  const auto m = static_cast<std::size_t>(m_);
  std::vector<double> lhs(m, 0.0), scale(m, 1.0);
  for (int j = 0; j < n_; ++j) {
    const double xj = x_[static_cast<std::size_t>(j)];
    for (const auto& [r, v] : cols_[static_cast<std::size_t>(j)]) {
      const double t = v * xj;
      lhs[static_cast<std::size_t>(r)] += t;
      scale[static_cast<std::size_t>(r)] = std::max(scale[static_cast<std::size_t>(r)], std::abs(t));
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double s = x_[static_cast<std::size_t>(n_) + i];
    if (std::abs(lhs[i] - s) > opt_.feas_tol * std::max(scale[i], std::abs(s))) return false;
  }
  for (int p = 0; p < m_; ++p) {
    const auto b = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
    if (x_[b] < lo_[b] - 10 * tol_for(lo_[b]) || x_[b] > hi_[b] + 10 * tol_for(hi_[b])) return false;
  }
  return true;
}

LpSolution SimplexSolver::run(bool rejected) {
  iterations_ = 0;
  Outcome out = Outcome::numerical;
  bool fresh = false;  // an infeasibility verdict is only trusted right after refactoring
  for (int attempt = 0; attempt < 4; ++attempt) {
    out = iterate();
    fresh = fresh && pivots_since_refactor_ == 0;
    if (out != Outcome::optimal && out != Outcome::infeasible) break;
    if (out == Outcome::optimal ? residuals_ok() : fresh) break;
    // Drift in the updated inverse: refactor and continue from this basis.
    if (!refactor()) {
      out = Outcome::numerical;
      break;
    }
    compute_basic_values();
    fresh = true;
    out = Outcome::numerical;
  }
  return finish(out, iterations_, rejected);
}

LpSolution SimplexSolver::solve() {
  load_cold_basis();
  normalize_nonbasic();
  if (!refactor()) return finish(Outcome::numerical, 0, false);
  compute_basic_values();
  return run(false);
}

LpSolution SimplexSolver::solve(const Basis& warm) {
  bool rejected = false;
  if (!load_warm_basis(warm)) {
    rejected = true;
    load_cold_basis();
  }
  normalize_nonbasic();
  if (!factored_ && !refactor()) {
    rejected = true;
    load_cold_basis();
    normalize_nonbasic();
    if (!refactor()) return finish(Outcome::numerical, 0, true);
  }
  compute_basic_values();
  return run(rejected);
}

LpSolution solve_lp(const LinearProgram& lp) {
  SimplexSolver solver(lp);
  return solver.solve();
}

LpSolution solve_lp_with_basis(const LinearProgram& lp, const Basis& warm) {
  SimplexSolver solver(lp);
  return solver.solve(warm);
}

}  // namespace polypart
