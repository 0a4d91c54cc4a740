#include <cmath>

#include "doctest.h"
#include "polypart/simplex.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

namespace {

LinearRow row(SparseRow c, Relation rel, double rhs) { return {std::move(c), rel, rhs}; }

// Objective from duals and reduced costs at an optimal basis.
double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  const int n = lp.num_cols();
  std::vector<double> d(lp.objective);
  double obj = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) {
    const double y = sol.duals[static_cast<std::size_t>(i)];
    obj += y * lp.rows[static_cast<std::size_t>(i)].rhs;
    for (const auto& [c, v] : lp.rows[static_cast<std::size_t>(i)].coeffs) d[static_cast<std::size_t>(c)] -= y * v;
  }
  for (int j = 0; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    if (d[sj] > 0) obj += d[sj] * lp.col_lower[sj];
    else if (d[sj] < 0) obj += d[sj] * lp.col_upper[sj];
  }
  return obj;
}

bool duals_have_right_sign(const LinearProgram& lp, const LpSolution& sol) {
  for (int i = 0; i < lp.num_rows(); ++i) {
    const double y = sol.duals[static_cast<std::size_t>(i)];
    const auto rel = lp.rows[static_cast<std::size_t>(i)].rel;
    if (rel == Relation::le && y > 1e-7) return false;
    if (rel == Relation::ge && y < -1e-7) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("simple optimum") {
  LinearProgram lp;
  lp.add_column(0, 1, -1);
  lp.add_column(0, 1, -1);
  lp.add_row(row({{0, 1}, {1, 1}}, Relation::le, 1));
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.point[0] + sol.point[1] == doctest::Approx(1.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("infeasible") {
  LinearProgram lp;
  lp.add_column(-kInf, kInf, 1);
  lp.add_row(row({{0, 1}}, Relation::ge, 2));
  lp.add_row(row({{0, 1}}, Relation::le, 1));
  CHECK(solve_lp(lp).status == LpStatus::infeasible);
}

TEST_CASE("unbounded") {
  LinearProgram lp;
  lp.add_column(-kInf, kInf, -1);
  lp.add_row(row({{0, 1}}, Relation::ge, 0));
  CHECK(solve_lp(lp).status == LpStatus::unbounded);
}

TEST_CASE("free variable and equality rows") {
  // min x + 2y  s.t. x - y = 1, x + y >= 3, y free
  LinearProgram lp;
  lp.add_column(0, kInf, 1);
  lp.add_column(-kInf, kInf, 2);
  lp.add_row(row({{0, 1}, {1, -1}}, Relation::eq, 1));
  lp.add_row(row({{0, 1}, {1, 1}}, Relation::ge, 3));
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.point[0] == doctest::Approx(2.0));
  CHECK(sol.point[1] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(4.0));
}

TEST_CASE("degenerate duplicate rows terminate") {
  LinearProgram lp;
  for (int j = 0; j < 4; ++j) lp.add_column(0, kInf, -1.0 - j);
  for (int k = 0; k < 6; ++k) lp.add_row(row({{0, 1}, {1, 1}, {2, 1}, {3, 1}}, Relation::le, 0));
  lp.add_row(row({{0, 1}, {1, 2}, {2, 3}, {3, 4}}, Relation::le, 0));
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("warm start after a cut matches cold solve") {
  LinearProgram lp;
  lp.add_column(0, 4, -1);
  lp.add_column(0, 4, -1);
  lp.add_row(row({{0, 1}, {1, 2}}, Relation::le, 6));
  SimplexSolver solver(lp);
  const auto first = solver.solve();
  REQUIRE(first.status == LpStatus::optimal);
  const LinearRow cut = row({{0, 1}, {1, 1}}, Relation::le, 4.5);
  solver.add_row(cut);
  const auto warm = solver.solve(first.basis);
  lp.add_row(cut);
  const auto cold = solve_lp(lp);
  REQUIRE(warm.status == LpStatus::optimal);
  CHECK_FALSE(warm.warm_start_rejected);
  CHECK(warm.objective == doctest::Approx(cold.objective));
}

TEST_CASE("incompatible basis falls back to a cold start") {
  LinearProgram lp;
  lp.add_column(0, 1, -1);
  lp.add_row(row({{0, 1}}, Relation::le, 0.5));
  Basis bad;
  bad.head = {0, 1, 2};
  bad.status.assign(7, BasisStatus::basic);
  const auto sol = solve_lp_with_basis(lp, bad);
  CHECK(sol.warm_start_rejected);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-0.5));
}

TEST_CASE("random LPs agree with vertex enumeration") {
  int optimal = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const int n = 1 + static_cast<int>(seed % 6);
    const int m = 1 + static_cast<int>((seed / 6) % 6);
    const auto lp = testkit::gen_random_lp(seed, n, m);
    const auto oracle = testkit::oracle_lp_vertices(lp);
    const auto sol = solve_lp(lp);
    CAPTURE(seed);
    if (!oracle.feasible) {
      CHECK(sol.status == LpStatus::infeasible);
      continue;
    }
    REQUIRE(sol.status == LpStatus::optimal);
    ++optimal;
    CHECK(std::abs(sol.objective - oracle.optimum) <= 1e-7 * (1 + std::abs(oracle.optimum)));
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += lp.objective[static_cast<std::size_t>(j)] * sol.point[static_cast<std::size_t>(j)];
    CHECK(std::abs(obj - sol.objective) <= 1e-9 * (1 + std::abs(obj)));
    for (const auto& r : lp.rows) CHECK(violation(r, sol.point) <= 1e-7 * std::max(1.0, std::abs(r.rhs)));
    CHECK(std::abs(dual_objective(lp, sol) - sol.objective) <= 1e-7 * (1 + std::abs(sol.objective)));
    CHECK(duals_have_right_sign(lp, sol));
  }
  CHECK(optimal > 80);
}

TEST_CASE("larger random LPs agree with vertex enumeration") {
  for (std::uint64_t seed = 500; seed < 505; ++seed) {
    const auto lp = testkit::gen_random_lp(seed, 8, 8);
    const auto oracle = testkit::oracle_lp_vertices(lp);
    const auto sol = solve_lp(lp);
    CAPTURE(seed);
    if (!oracle.feasible) {
      CHECK(sol.status == LpStatus::infeasible);
      continue;
    }
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(std::abs(sol.objective - oracle.optimum) <= 1e-7 * (1 + std::abs(oracle.optimum)));
  }
}

TEST_CASE("warm starts from a parent node match cold solves") {
  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto lp = testkit::gen_random_lp(seed + 1000, 5, 5);
    SimplexSolver solver(lp);
    const auto parent = solver.solve();
    if (parent.status != LpStatus::optimal) continue;
    // Child: tighten one column around its fractional value.
    const int j = static_cast<int>(seed % 5);
    const double v = parent.point[static_cast<std::size_t>(j)];
    const double hi = std::floor(v) >= lp.col_lower[static_cast<std::size_t>(j)] ? std::floor(v) : v;
    solver.set_bounds(j, lp.col_lower[static_cast<std::size_t>(j)], hi);
    lp.col_upper[static_cast<std::size_t>(j)] = hi;
    const auto warm = solver.solve(parent.basis);
    const auto cold = solve_lp(lp);
    CAPTURE(seed);
    CHECK(warm.status == cold.status);
    if (cold.status == LpStatus::optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
      ++matched;
    }
  }
  CHECK(matched > 40);
}

TEST_CASE("concurrent solves on distinct workspaces") {
  std::vector<LinearProgram> lps;
  for (std::uint64_t s = 0; s < 32; ++s) lps.push_back(testkit::gen_random_lp(s + 77, 6, 6));
  std::vector<double> serial(lps.size()), parallel(lps.size());
  for (std::size_t i = 0; i < lps.size(); ++i) serial[i] = solve_lp(lps[i]).objective;
#pragma omp parallel for
  for (int i = 0; i < static_cast<int>(lps.size()); ++i) parallel[static_cast<std::size_t>(i)] = solve_lp(lps[static_cast<std::size_t>(i)]).objective;
  CHECK(serial == parallel);
}
