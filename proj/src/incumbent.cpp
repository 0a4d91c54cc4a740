#include "polypart/incumbent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace polypart {

namespace {

using Clock = std::chrono::steady_clock;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double power(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

double eval(const Expr& e, const std::vector<double>& x) {
  double s = e.constant;
  for (const auto& m : e.terms) {
    double p = m.coef;
    for (const auto& [v, k] : m.factors) p *= power(x[static_cast<std::size_t>(v)], k);
    s += p;
  }
  return s;
}

void gradient(const Expr& e, const std::vector<double>& x, std::vector<double>& g) {
  std::fill(g.begin(), g.end(), 0.0);
  for (const auto& m : e.terms) {
    for (std::size_t a = 0; a < m.factors.size(); ++a) {
      const auto [u, pu] = m.factors[a];
      double d = m.coef * pu * power(x[static_cast<std::size_t>(u)], pu - 1);
      for (std::size_t b = 0; b < m.factors.size(); ++b) {
        if (b != a) d *= power(x[static_cast<std::size_t>(m.factors[b].first)], m.factors[b].second);
      }
      g[static_cast<std::size_t>(u)] += d;
    }
  }
}

// Adds w * Hessian(e) into h, indexed through pos (original -> row, -1 = fixed).
void hessian_add(const Expr& e, const std::vector<double>& x, double w, const std::vector<int>& pos, MatrixXd& h) {
  if (w == 0.0) return;
  for (const auto& m : e.terms) {
    const auto& f = m.factors;
    for (std::size_t a = 0; a < f.size(); ++a) {
      const int ra = pos[static_cast<std::size_t>(f[a].first)];
      if (ra < 0) continue;
      for (std::size_t b = 0; b < f.size(); ++b) {
        const int rb = pos[static_cast<std::size_t>(f[b].first)];
        if (rb < 0) continue;
        double d = m.coef;
        if (a == b) {
          if (f[a].second < 2) continue;
          d *= f[a].second * (f[a].second - 1) * power(x[static_cast<std::size_t>(f[a].first)], f[a].second - 2);
        } else {
          d *= f[a].second * power(x[static_cast<std::size_t>(f[a].first)], f[a].second - 1);
          d *= f[b].second * power(x[static_cast<std::size_t>(f[b].first)], f[b].second - 1);
        }
        for (std::size_t c = 0; c < f.size(); ++c) {
          if (c != a && c != b) d *= power(x[static_cast<std::size_t>(f[c].first)], f[c].second);
        }
        h(ra, rb) += w * d;
      }
    }
  }
}

class LocalSolver {
 public:
  LocalSolver(const Model& model, double feas_tol, int max_iter)
      : model_(model), raw_(to_raw(model)), feas_tol_(feas_tol), max_iter_(max_iter) {
    k_ = static_cast<int>(raw_.variables.size());
    pos_.assign(static_cast<std::size_t>(k_), -1);
    for (int v = 0; v < k_; ++v) {
      const auto& var = raw_.variables[static_cast<std::size_t>(v)];
      lo_.push_back(var.lower);
      hi_.push_back(var.upper);
      if (!var.is_binary()) {
        pos_[static_cast<std::size_t>(v)] = static_cast<int>(cont_.size());
        cont_.push_back(v);
      }
    }
    for (std::size_t i = 0; i < raw_.constraints.size(); ++i) {
      if (raw_.constraints[i].rel != Relation::eq) slack_of_.push_back(static_cast<int>(i));
    }
    for (const auto& c : raw_.constraints) {
      double s = std::max(1.0, std::abs(c.rhs));
      for (const auto& m : c.expr.terms) s = std::max(s, std::abs(m.coef));
      w_.push_back(1.0 / s);
    }
  }

  int num_originals() const { return k_; }

  std::vector<double> full(const std::vector<double>& x) const {
    std::vector<double> p(model_.variables.size(), 0.0);
    std::copy(x.begin(), x.end(), p.begin());
    complete_point(model_, p);
    return p;
  }

  bool is_feasible(const std::vector<double>& x) const { return check_feasible(model_, full(x), feas_tol_); }
  double objective(const std::vector<double>& x) const { return objective_value(model_, full(x)); }

  // Interior point run from x (binaries stay fixed), then restoration.
  // Returns whether x ends feasible.
  bool improve(std::vector<double>& x) {
    std::vector<double> y = x;
    interior_point(y);
    restore(y);
    if (is_feasible(y)) {
      x = std::move(y);
      return true;
    }
    restore(x);
    return is_feasible(x);
  }

  std::vector<double> sample(std::mt19937_64& rng, int start) const {
    std::vector<double> x(static_cast<std::size_t>(k_));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int v = 0; v < k_; ++v) {
      const auto j = static_cast<std::size_t>(v);
      double lo = lo_[j], hi = hi_[j];
      if (!std::isfinite(lo) && !std::isfinite(hi)) {
        lo = -10.0;
        hi = 10.0;
      } else if (!std::isfinite(lo)) {
        lo = hi - 10.0 * std::max(1.0, std::abs(hi));
      } else if (!std::isfinite(hi)) {
        hi = lo + 10.0 * std::max(1.0, std::abs(lo));
      }
      const double r = u(rng);
      if (raw_.variables[j].is_binary()) {
        x[j] = start == 0 ? 0.0 : (start == 1 ? 1.0 : (r < 0.5 ? 0.0 : 1.0));
      } else {
        x[j] = start == 0 ? 0.5 * (lo + hi) : lo + r * (hi - lo);
      }
    }
    return x;
  }

 private:
  // Iterate layout: continuous originals, then one slack per inequality.
  // Constraint i reads s_i (c_i - b_i) + sign * slack = 0 with slack >= 0.
  struct State {
    VectorXd v, lam, zl, zu;
  };

  std::vector<double> unpack(const VectorXd& v, const std::vector<double>& base) const {
    std::vector<double> x = base;
    for (std::size_t j = 0; j < cont_.size(); ++j) x[static_cast<std::size_t>(cont_[j])] = v(static_cast<Eigen::Index>(j));
    return x;
  }

  void interior_point(std::vector<double>& x0) {
    const auto n = static_cast<Eigen::Index>(cont_.size());
    const auto ns = static_cast<Eigen::Index>(slack_of_.size());
    const auto nv = n + ns;
    const auto m = static_cast<Eigen::Index>(raw_.constraints.size());
    if (n == 0) return;
    const auto& cons = raw_.constraints;

    VectorXd lo(nv), hi(nv);
    for (Eigen::Index j = 0; j < n; ++j) {
      lo(j) = lo_[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
      hi(j) = hi_[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
    }
    for (Eigen::Index j = n; j < nv; ++j) {
      lo(j) = 0.0;
      hi(j) = kInf;
    }
    std::vector<Eigen::Index> slack_col(cons.size(), -1);
    std::vector<double> sign(cons.size(), 0.0);
    for (std::size_t s = 0; s < slack_of_.size(); ++s) {
      const auto i = static_cast<std::size_t>(slack_of_[s]);
      slack_col[i] = n + static_cast<Eigen::Index>(s);
      sign[i] = cons[i].rel == Relation::le ? 1.0 : -1.0;
    }

    // Push x strictly inside its bounds.
    for (Eigen::Index j = 0; j < n; ++j) {
      auto& xv = x0[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
      const double l = lo(j), u = hi(j);
      if (std::isfinite(l) && std::isfinite(u)) {
        const double p = std::min({1e-2 * std::max(1.0, std::abs(l)), 1e-2 * std::max(1.0, std::abs(u)), 0.49 * (u - l)});
        xv = std::clamp(xv, l + p, u - p);
      } else if (std::isfinite(l)) {
        xv = std::max(xv, l + 1e-2 * std::max(1.0, std::abs(l)));
      } else if (std::isfinite(u)) {
        xv = std::min(xv, u - 1e-2 * std::max(1.0, std::abs(u)));
      }
    }

    // Gradient-based scaling at the start point.
    std::vector<double> g(static_cast<std::size_t>(k_));
    gradient(raw_.objective, x0, g);
    double gmax = 0.0;
    for (int v : cont_) gmax = std::max(gmax, std::abs(g[static_cast<std::size_t>(v)]));
    const double sf = std::min(1.0, 100.0 / std::max(gmax, 1e-300));
    std::vector<double> sc(cons.size());
    for (std::size_t i = 0; i < cons.size(); ++i) {
      gradient(cons[i].expr, x0, g);
      double cm = 0.0;
      for (int v : cont_) cm = std::max(cm, std::abs(g[static_cast<std::size_t>(v)]));
      sc[i] = std::min(1.0, 100.0 / std::max(cm, 1e-300));
    }

    State st;
    st.v.resize(nv);
    for (Eigen::Index j = 0; j < n; ++j) st.v(j) = x0[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
    for (std::size_t i = 0; i < cons.size(); ++i) {
      if (slack_col[i] < 0) continue;
      const double r = sc[i] * (eval(cons[i].expr, x0) - cons[i].rhs);
      st.v(slack_col[i]) = std::max(-sign[i] * r, 1e-2);
    }
    st.lam = VectorXd::Zero(m);
    st.zl = VectorXd::Zero(nv);
    st.zu = VectorXd::Zero(nv);
    for (Eigen::Index j = 0; j < nv; ++j) {
      if (std::isfinite(lo(j))) st.zl(j) = 1.0;
      if (std::isfinite(hi(j))) st.zu(j) = 1.0;
    }

    const std::vector<double> base = x0;
    auto fval = [&](const VectorXd& v) { return sf * eval(raw_.objective, unpack(v, base)); };
    auto hval = [&](const VectorXd& v) {
      const auto x = unpack(v, base);
      VectorXd h(m);
      for (std::size_t i = 0; i < cons.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        h(ii) = sc[i] * (eval(cons[i].expr, x) - cons[i].rhs);
        if (slack_col[i] >= 0) h(ii) += sign[i] * v(slack_col[i]);
      }
      return h;
    };
    auto barrier = [&](const VectorXd& v, double mu) {
      double b = 0.0;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::isfinite(lo(j))) b -= mu * std::log(v(j) - lo(j));
        if (std::isfinite(hi(j))) b -= mu * std::log(hi(j) - v(j));
      }
      return b;
    };

    const double tol = 1e-9;
    double mu = 0.1;
    double nu = 1.0;
    double delta_last = 0.0;
    VectorXd best_v = st.v;
    double best_score = kInf;
    for (int iter = 0; iter < max_iter_; ++iter) {
      const auto x = unpack(st.v, base);
      VectorXd gf = VectorXd::Zero(nv);
      gradient(raw_.objective, x, g);
      for (Eigen::Index j = 0; j < n; ++j) gf(j) = sf * g[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
      MatrixXd jac = MatrixXd::Zero(m, nv);
      for (std::size_t i = 0; i < cons.size(); ++i) {
        gradient(cons[i].expr, x, g);
        const auto ii = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < n; ++j) jac(ii, j) = sc[i] * g[static_cast<std::size_t>(cont_[static_cast<std::size_t>(j)])];
        if (slack_col[i] >= 0) jac(ii, slack_col[i]) = sign[i];
      }
      const VectorXd h = hval(st.v);
      VectorXd dl(nv), du(nv);
      for (Eigen::Index j = 0; j < nv; ++j) {
        dl(j) = std::isfinite(lo(j)) ? st.v(j) - lo(j) : kInf;
        du(j) = std::isfinite(hi(j)) ? hi(j) - st.v(j) : kInf;
      }
      auto kkt_error = [&](double mu_) {
        const VectorXd r = gf + jac.transpose() * st.lam - st.zl + st.zu;
        double comp = 0.0;
        for (Eigen::Index j = 0; j < nv; ++j) {
          if (std::isfinite(dl(j))) comp = std::max(comp, std::abs(dl(j) * st.zl(j) - mu_));
          if (std::isfinite(du(j))) comp = std::max(comp, std::abs(du(j) * st.zu(j) - mu_));
        }
        const auto cnt = static_cast<double>(m + 2 * nv);
        const double sd = std::max(100.0, (st.lam.lpNorm<1>() + st.zl.lpNorm<1>() + st.zu.lpNorm<1>()) / cnt) / 100.0;
        const double scc = std::max(100.0, (st.zl.lpNorm<1>() + st.zu.lpNorm<1>()) / (2.0 * static_cast<double>(nv))) / 100.0;
        return std::max({r.lpNorm<Eigen::Infinity>() / sd, m > 0 ? h.lpNorm<Eigen::Infinity>() : 0.0, comp / scc});
      };
      const double e0 = kkt_error(0.0);
      const double primal = m > 0 ? h.lpNorm<Eigen::Infinity>() : 0.0;
      if (primal <= 1e-8 && e0 < best_score) {
        best_score = e0;
        best_v = st.v;
      }
      if (e0 <= tol) break;
      while (mu > tol / 10.0 && kkt_error(mu) <= 10.0 * mu) mu = std::max(tol / 10.0, std::min(0.2 * mu, std::pow(mu, 1.5)));

      MatrixXd w = MatrixXd::Zero(nv, nv);
      {
        MatrixXd hx = MatrixXd::Zero(n, n);
        hessian_add(raw_.objective, x, sf, pos_, hx);
        for (std::size_t i = 0; i < cons.size(); ++i) {
          hessian_add(cons[i].expr, x, sc[i] * st.lam(static_cast<Eigen::Index>(i)), pos_, hx);
        }
        w.topLeftCorner(n, n) = hx;
      }
      VectorXd sigma = VectorXd::Zero(nv);
      VectorXd rb = -gf - jac.transpose() * st.lam;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::isfinite(dl(j))) {
          sigma(j) += st.zl(j) / dl(j);
          rb(j) += mu / dl(j);
        }
        if (std::isfinite(du(j))) {
          sigma(j) += st.zu(j) / du(j);
          rb(j) -= mu / du(j);
        }
      }
      // Inertia correction: the reduced Hessian on null(J) must be positive
      // definite; rank-deficient J gets a small dual regularization.
      MatrixXd hreg = w;
      hreg.diagonal() += sigma;
      Eigen::Index rank = 0;
      MatrixXd z;
      if (m == 0) {
        z = MatrixXd::Identity(nv, nv);
      } else {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(jac.transpose());
        qr.setThreshold(1e-10);
        rank = qr.rank();
        const MatrixXd q = qr.householderQ();
        z = q.rightCols(nv - rank);
      }
      const double delta_c = rank < m ? 1e-8 * std::pow(mu, 0.25) : 0.0;
      const MatrixXd red = z.transpose() * hreg * z;
      double delta_w = 0.0;
      bool ok = false;
      for (int attempt = 0; attempt < 80; ++attempt) {
        MatrixXd r = red;
        r.diagonal().array() += delta_w;
        Eigen::LLT<MatrixXd> llt(r);
        if (llt.info() == Eigen::Success && (r.size() == 0 || llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-10)) {
          ok = true;
          break;
        }
        if (delta_w == 0.0) {
          delta_w = delta_last == 0.0 ? 1e-4 : std::max(1e-20, delta_last / 3.0);
        } else {
          delta_w *= delta_last == 0.0 ? 100.0 : 8.0;
        }
        if (delta_w > 1e40) break;
      }
      if (!ok) break;
      if (delta_w > 0.0) delta_last = delta_w;
      MatrixXd kkt = MatrixXd::Zero(nv + m, nv + m);
      kkt.topLeftCorner(nv, nv) = hreg;
      kkt.topLeftCorner(nv, nv).diagonal().array() += delta_w;
      kkt.topRightCorner(nv, m) = jac.transpose();
      kkt.bottomLeftCorner(m, nv) = jac;
      kkt.bottomRightCorner(m, m).diagonal().array() -= delta_c;
      const Eigen::PartialPivLU<MatrixXd> lu(kkt);
      auto kkt_solve = [&](const VectorXd& top, const VectorXd& bottom) {
        VectorXd rhs(nv + m);
        rhs << top, bottom;
        return VectorXd(lu.solve(rhs));
      };
      const VectorXd sol = kkt_solve(rb, -h);
      if (!sol.allFinite()) break;
      VectorXd dv = sol.head(nv);
      const VectorXd dlam = sol.tail(m);
      const double tau = std::max(0.99, 1.0 - mu);
      auto max_step = [&](const VectorXd& d) {
        double a = 1.0;
        for (Eigen::Index j = 0; j < nv; ++j) {
          if (std::isfinite(dl(j)) && d(j) < 0.0) a = std::min(a, -tau * dl(j) / d(j));
          if (std::isfinite(du(j)) && d(j) > 0.0) a = std::min(a, tau * du(j) / d(j));
        }
        return a;
      };
      // l1 merit of the barrier problem.
      const double hn = m > 0 ? h.lpNorm<1>() : 0.0;
      VectorXd gphi = gf;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::isfinite(dl(j))) gphi(j) -= mu / dl(j);
        if (std::isfinite(du(j))) gphi(j) += mu / du(j);
      }
      const double lin = gphi.dot(dv);
      const double curv = std::max(0.0, dv.dot(w * dv) + dv.dot(sigma.cwiseProduct(dv)));
      if (hn > 0.0) nu = std::max(nu, (lin + 0.5 * curv) / (0.9 * hn) + 1e-6);
      auto merit = [&](const VectorXd& v) {
        return fval(v) + barrier(v, mu) + (m > 0 ? nu * hval(v).lpNorm<1>() : 0.0);
      };
      const double phi0 = fval(st.v) + barrier(st.v, mu) + nu * hn;
      const double slope = std::min(lin - nu * hn, 0.0);
      double alpha = max_step(dv);
      bool accepted = false;
      VectorXd trial;
      for (int ls = 0; ls < 50; ++ls) {
        trial = st.v + alpha * dv;
        const double phi = merit(trial);
        if (std::isfinite(phi) && phi <= phi0 + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        if (ls == 0 && m > 0 && hval(trial).lpNorm<1>() >= hn) {
          // Second-order correction on the full step.
          const VectorXd soc = kkt_solve(rb, -(alpha * h + hval(trial))).head(nv);
          const double a2 = max_step(soc);
          const VectorXd t2 = st.v + a2 * soc;
          const double p2 = merit(t2);
          if (std::isfinite(p2) && p2 <= phi0 + 1e-4 * alpha * slope) {
            trial = t2;
            dv = soc;
            alpha = a2;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
      double az = 1.0;
      VectorXd dzl = VectorXd::Zero(nv), dzu = VectorXd::Zero(nv);
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::isfinite(dl(j))) dzl(j) = mu / dl(j) - st.zl(j) - st.zl(j) / dl(j) * dv(j);
        if (std::isfinite(du(j))) dzu(j) = mu / du(j) - st.zu(j) + st.zu(j) / du(j) * dv(j);
        if (dzl(j) < 0.0) az = std::min(az, -tau * st.zl(j) / dzl(j));
        if (dzu(j) < 0.0) az = std::min(az, -tau * st.zu(j) / dzu(j));
      }
      st.v = trial;
      st.lam += alpha * dlam;
      st.zl += az * dzl;
      st.zu += az * dzu;
      for (Eigen::Index j = 0; j < nv; ++j) {
        if (std::isfinite(lo(j))) {
          const double d = st.v(j) - lo(j);
          st.zl(j) = std::clamp(st.zl(j), mu / (1e10 * d), 1e10 * mu / d);
        }
        if (std::isfinite(hi(j))) {
          const double d = hi(j) - st.v(j);
          st.zu(j) = std::clamp(st.zu(j), mu / (1e10 * d), 1e10 * mu / d);
        }
      }
    }
    const double primal_end = m > 0 ? hval(st.v).lpNorm<Eigen::Infinity>() : 0.0;
    x0 = unpack(primal_end <= 1e-8 || !std::isfinite(best_score) ? st.v : best_v, base);
  }

  // Least-norm Gauss-Newton steps onto violated or tight constraints,
  // aiming slightly inside inequalities.
  void restore(std::vector<double>& x) const {
    const auto& cons = raw_.constraints;
    std::vector<double> g(static_cast<std::size_t>(k_));
    for (int it = 0; it < 30; ++it) {
      if (cont_.empty() || is_feasible(x)) return;
      std::vector<std::pair<int, double>> rows;
      for (std::size_t i = 0; i < cons.size(); ++i) {
        const double val = eval(cons[i].expr, x);
        const double margin = 1e-11 / w_[i];
        const double b = cons[i].rhs;
        if (cons[i].rel == Relation::eq) {
          rows.emplace_back(static_cast<int>(i), val - b);
        } else if (cons[i].rel == Relation::le && val > b - margin) {
          rows.emplace_back(static_cast<int>(i), val - (b - margin));
        } else if (cons[i].rel == Relation::ge && val < b + margin) {
          rows.emplace_back(static_cast<int>(i), val - (b + margin));
        }
      }
      if (rows.empty()) return;
      MatrixXd jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cont_.size()));
      VectorXd r(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t a = 0; a < rows.size(); ++a) {
        gradient(cons[static_cast<std::size_t>(rows[a].first)].expr, x, g);
        for (std::size_t j = 0; j < cont_.size(); ++j) {
          jac(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = g[static_cast<std::size_t>(cont_[j])];
        }
        r(static_cast<Eigen::Index>(a)) = rows[a].second;
      }
      const VectorXd d = jac.completeOrthogonalDecomposition().solve(-r);
      if (!d.allFinite()) return;
      for (std::size_t j = 0; j < cont_.size(); ++j) {
        const auto v = static_cast<std::size_t>(cont_[j]);
        x[v] = std::clamp(x[v] + d(static_cast<Eigen::Index>(j)), lo_[v], hi_[v]);
      }
    }
  }

  const Model& model_;
  RawModel raw_;
  double feas_tol_;
  int max_iter_;
  int k_ = 0;
  std::vector<int> cont_, pos_, slack_of_;
  std::vector<double> lo_, hi_, w_;
};

}  // namespace

Incumbent find_incumbent(const Model& model, const IncumbentOptions& opt) {
  const auto t0 = Clock::now();
  LocalSolver solver(model, opt.feas_tol, opt.max_iterations);
  std::mt19937_64 rng(opt.seed);
  std::vector<double> best;
  double best_f = kInf;
  for (int s = 0; s < opt.starts; ++s) {
    if (std::chrono::duration<double>(Clock::now() - t0).count() > opt.budget_seconds) break;
    std::vector<double> x = solver.sample(rng, s);
    if (!solver.improve(x)) continue;
    const double f = solver.objective(x);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  if (best.empty()) throw Error("no feasible point found; supply an incumbent");
  Incumbent inc;
  inc.point = solver.full(best);
  inc.objective_value = objective_value(model, inc.point);
  return inc;
}

std::vector<double> local_improve(const Model& model, const std::vector<double>& point, double feas_tol) {
  LocalSolver solver(model, feas_tol, 300);
  std::vector<double> x(point.begin(), point.begin() + solver.num_originals());
  const bool was_feasible = check_feasible(model, point, feas_tol);
  const double f0 = objective_value(model, point);
  if (!solver.improve(x)) return point;
  const auto p = solver.full(x);
  if (was_feasible && objective_value(model, p) > f0) return point;
  return p;
}

}  // namespace polypart
