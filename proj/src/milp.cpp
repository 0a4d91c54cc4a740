#include "polypart/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>

namespace polypart {

const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::infeasible: return "infeasible";
    case MilpStatus::time_limit: return "time_limit";
    case MilpStatus::unbounded: return "unbounded";
    case MilpStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

int branch_select(const std::vector<double>& point, const std::vector<int>& integer_columns, double int_tol) {
  int best = -1;
  double best_dist = kInf;
  for (int c : integer_columns) {
    const double v = point[static_cast<std::size_t>(c)];
    const double frac = v - std::floor(v);
    if (std::min(frac, 1.0 - frac) <= int_tol) continue;
    const double dist = std::abs(frac - 0.5);
    if (dist < best_dist - 1e-12 || (dist <= best_dist + 1e-12 && c < best)) {
      best = c;
      best_dist = std::min(dist, best_dist);
    }
  }
  return best;
}

namespace {

struct BoundChange {
  int col;
  double lo;
  double hi;
};

struct Node {
  long long id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const std::unique_ptr<Node>& a, const std::unique_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound < b->bound;
    if (a->depth != b->depth) return a->depth > b->depth;
    return a->id < b->id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& p, const MilpOptions& opt)
      : p_(p), opt_(opt), solver_(p.lp), start_(std::chrono::steady_clock::now()) {
    for (int c : p_.integer_columns) {
      base_lo_.push_back(p_.lp.col_lower[static_cast<std::size_t>(c)]);
      base_hi_.push_back(p_.lp.col_upper[static_cast<std::size_t>(c)]);
    }
    col_slot_.assign(static_cast<std::size_t>(p_.lp.num_cols()), -1);
    for (std::size_t s = 0; s < p_.integer_columns.size(); ++s) {
      col_slot_[static_cast<std::size_t>(p_.integer_columns[s])] = static_cast<int>(s);
    }
    incumbent_ = opt_.cutoff;
  }

  MilpSolution run() {
    auto root = std::make_unique<Node>();
    root->id = next_id_++;
    open_.insert(std::move(root));
    std::unique_ptr<Node> dive;
    MilpStatus stop = MilpStatus::optimal;
    while (dive || !open_.empty()) {
      if (elapsed() > opt_.time_limit) {
        if (dive) open_.insert(std::move(dive));
        stop = MilpStatus::time_limit;
        break;
      }
      std::unique_ptr<Node> node;
      if (dive) {
        node = std::move(dive);
      } else {
        node = std::move(open_.extract(open_.begin()).value());
      }
      if (node->bound >= incumbent_ - gap_tol()) continue;
      ++nodes_;
      const auto result = process(*node);
      if (result == Result::unbounded) {
        MilpSolution sol;
        sol.status = MilpStatus::unbounded;
        sol.nodes_explored = nodes_;
        sol.cuts_added = cuts_added_;
        return sol;
      }
      if (result == Result::branched) {
        auto [down, up] = std::move(children_);
        if (static_cast<long long>(open_.size()) >= opt_.node_cap) {
          dive = std::move(up);
          open_.insert(std::move(down));
        } else {
          open_.insert(std::move(down));
          open_.insert(std::move(up));
        }
      }
      if (opt_.trace) opt_.trace({nodes_, current_lower_bound(dive.get()), incumbent_});
    }
    MilpSolution sol;
    sol.nodes_explored = nodes_;
    sol.cuts_added = cuts_added_;
    sol.best_bound = std::min(current_lower_bound(nullptr), lost_bound_);
    if (!best_point_.empty()) {
      sol.point = best_point_;
      sol.objective = incumbent_;
    }
    if (stop == MilpStatus::time_limit) {
      sol.status = MilpStatus::time_limit;
    } else if (best_point_.empty()) {
      sol.status = lost_any_ ? MilpStatus::numerical_error : MilpStatus::infeasible;
    } else {
      sol.status = lost_any_ && lost_bound_ < incumbent_ - gap_tol() ? MilpStatus::numerical_error : MilpStatus::optimal;
    }
    if (sol.status == MilpStatus::optimal) sol.best_bound = std::min(sol.best_bound, sol.objective);
    return sol;
  }

 private:
  enum class Result { pruned, integral, branched, unbounded };

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  double gap_tol() const {
    return std::isfinite(incumbent_) ? opt_.rel_gap * std::max(1.0, std::abs(incumbent_)) : 0.0;
  }

  double current_lower_bound(const Node* extra) const {
    double lb = incumbent_;
    if (!open_.empty()) lb = std::min(lb, (*open_.begin())->bound);
    if (extra) lb = std::min(lb, extra->bound);
    return lb;
  }

  void apply_bounds(const Node& node) {
    for (std::size_t s = 0; s < p_.integer_columns.size(); ++s) {
      solver_.set_bounds(p_.integer_columns[s], base_lo_[s], base_hi_[s]);
    }
    for (const auto& ch : node.changes) solver_.set_bounds(ch.col, ch.lo, ch.hi);
  }

  LpSolution solve_lp(const Basis* basis) {
    LpSolution lp = basis ? solver_.solve(*basis) : solver_.solve();
    if (lp.status == LpStatus::numerical_error || lp.status == LpStatus::iteration_limit) {
      lp = solver_.solve();
    }
    return lp;
  }

  Result process(Node& node) {
    apply_bounds(node);
    const Basis* basis = node.basis ? node.basis.get() : nullptr;
    LpSolution lp;
    int rounds = 0;
    while (true) {
      lp = solve_lp(basis);
      if (lp.status == LpStatus::infeasible) return Result::pruned;
      // Integer columns are bounded, so an unbounded node LP means an unbounded MILP.
      if (lp.status == LpStatus::unbounded) return Result::unbounded;
      if (lp.status != LpStatus::optimal) {
        lost_bound_ = std::min(lost_bound_, node.bound);
        lost_any_ = true;
        return Result::pruned;
      }
      if (lp.objective >= incumbent_ - gap_tol()) return Result::pruned;
      const int frac = branch_select(lp.point, p_.integer_columns, opt_.int_tol);
      if (p_.cut_callback) {
        const int cap = frac < 0 ? opt_.cut_rounds_integral : opt_.cut_rounds_fractional;
        if (rounds < cap) {
          auto cuts = p_.cut_callback(lp.point);
          if (!cuts.empty()) {
            for (const auto& c : cuts) solver_.add_row(c);
            cuts_added_ += static_cast<int>(cuts.size());
            ++rounds;
            last_basis_ = lp.basis;
            basis = &last_basis_;
            continue;
          }
        } else if (frac < 0) {
          // Candidate never came clean; keep its bound so optimality is not claimed.
          lost_bound_ = std::min(lost_bound_, std::max(node.bound, lp.objective));
          lost_any_ = true;
          return Result::pruned;
        }
      }
      if (frac < 0) {
        incumbent_ = lp.objective;
        best_point_ = lp.point;
        for (int c : p_.integer_columns) {
          auto& v = best_point_[static_cast<std::size_t>(c)];
          v = std::round(v);
        }
        return Result::integral;
      }
      const double bound = std::max(node.bound, lp.objective);
      auto shared = std::make_shared<const Basis>(std::move(lp.basis));
      const double v = lp.point[static_cast<std::size_t>(frac)];
      const int slot = col_slot_[static_cast<std::size_t>(frac)];
      double lo = base_lo_[static_cast<std::size_t>(slot)];
      double hi = base_hi_[static_cast<std::size_t>(slot)];
      for (const auto& ch : node.changes) {
        if (ch.col == frac) {
          lo = ch.lo;
          hi = ch.hi;
        }
      }
      auto make_child = [&](double clo, double chi) {
        auto child = std::make_unique<Node>();
        child->id = next_id_++;
        child->depth = node.depth + 1;
        child->bound = bound;
        child->changes = node.changes;
        std::erase_if(child->changes, [&](const BoundChange& c) { return c.col == frac; });
        child->changes.push_back({frac, clo, chi});
        child->basis = shared;
        return child;
      };
      children_ = {make_child(lo, std::floor(v)), make_child(std::ceil(v), hi)};
      return Result::branched;
    }
  }

  const MilpProblem& p_;
  const MilpOptions& opt_;
  SimplexSolver solver_;
  std::chrono::steady_clock::time_point start_;
  std::vector<double> base_lo_, base_hi_;
  std::vector<int> col_slot_;
  std::set<std::unique_ptr<Node>, NodeOrder> open_;
  std::pair<std::unique_ptr<Node>, std::unique_ptr<Node>> children_;
  Basis last_basis_;
  std::vector<double> best_point_;
  double incumbent_ = kInf;
  double lost_bound_ = kInf;
  bool lost_any_ = false;
  long long next_id_ = 0;
  long long nodes_ = 0;
  int cuts_added_ = 0;
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opt) {
  for (int c : p.integer_columns) {
    if (c < 0 || c >= p.lp.num_cols()) throw Error("integer column out of range");
  }
  BranchAndBound bb(p, opt);
  return bb.run();
}

MilpSolution solve_milp(const MilpProblem& p, double time_limit) {
  MilpOptions opt;
  opt.time_limit = time_limit;
  return solve_milp(p, opt);
}

}  // namespace polypart
