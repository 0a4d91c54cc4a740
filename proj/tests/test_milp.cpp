#include <cmath>

#include "doctest.h"
#include "polypart/milp.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

TEST_CASE("branch_select") {
  CHECK(branch_select({0.1, 0.5, 0.9}, {0, 1, 2}) == 1);
  CHECK(branch_select({0.4, 0.6}, {0, 1}) == 0);
  CHECK(branch_select({0.6, 0.4}, {0, 1}) == 0);
  CHECK(branch_select({1.0, 0.3, 0.0}, {0, 1, 2}) == 1);
  CHECK(branch_select({1.0, 0.0}, {0, 1}) == -1);
  CHECK(branch_select({1.0 - 1e-8}, {0}) == -1);
}

TEST_CASE("two binaries, one knapsack row") {
  MilpProblem p;
  p.lp.add_column(0, 1, -1);
  p.lp.add_column(0, 1, -1);
  p.lp.add_row({{{0, 1}, {1, 1}}, Relation::le, 1});
  p.integer_columns = {0, 1};
  const auto sol = solve_milp(p, 10.0);
  REQUIRE(sol.status == MilpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
}

TEST_CASE("knapsack matches enumeration") {
  // min -(3a+4b+5c) s.t. 2a+3b+4c <= 5: best is a+b (weight 5, value 7).
  MilpProblem p;
  p.lp.add_column(0, 1, -3);
  p.lp.add_column(0, 1, -4);
  p.lp.add_column(0, 1, -5);
  p.lp.add_row({{{0, 2}, {1, 3}, {2, 4}}, Relation::le, 5});
  p.integer_columns = {0, 1, 2};
  const auto oracle = testkit::oracle_milp_enumerate(p);
  REQUIRE(oracle.feasible);
  CHECK(oracle.optimum == doctest::Approx(-7.0));
  const auto sol = solve_milp(p, 10.0);
  REQUIRE(sol.status == MilpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-7.0));
  CHECK(sol.point[0] == 1.0);
  CHECK(sol.point[1] == 1.0);
  CHECK(sol.point[2] == 0.0);
}

TEST_CASE("infeasible root") {
  MilpProblem p;
  p.lp.add_column(0, 1, 1);
  p.lp.add_row({{{0, 1}}, Relation::ge, 2});
  p.integer_columns = {0};
  CHECK(solve_milp(p, 10.0).status == MilpStatus::infeasible);
}

TEST_CASE("integer infeasible despite feasible LP") {
  MilpProblem p;
  p.lp.add_column(0, 1, 0);
  p.lp.add_column(0, 1, 0);
  p.lp.add_row({{{0, 1}, {1, 1}}, Relation::eq, 1});
  p.lp.add_row({{{0, 1}, {1, -1}}, Relation::eq, 0});
  p.integer_columns = {0, 1};
  CHECK(solve_milp(p, 10.0).status == MilpStatus::infeasible);
}

TEST_CASE("random MILPs match enumeration") {
  int feasible = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int nb = 2 + static_cast<int>(seed % 9);
    const int nc = static_cast<int>(seed % 5);
    const auto p = testkit::gen_random_milp(seed, nb, nc, 2 + static_cast<int>(seed % 4));
    const auto oracle = testkit::oracle_milp_enumerate(p);
    const auto sol = solve_milp(p, 30.0);
    CAPTURE(seed);
    if (!oracle.feasible) {
      CHECK(sol.status == MilpStatus::infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(sol.status == MilpStatus::optimal);
    CHECK(std::abs(sol.objective - oracle.optimum) <= 1e-6 * std::max(1.0, std::abs(oracle.optimum)));
    CHECK(sol.best_bound <= sol.objective + 1e-9 * (1 + std::abs(sol.objective)));
    for (int c : p.integer_columns) CHECK(sol.point[static_cast<std::size_t>(c)] == std::round(sol.point[static_cast<std::size_t>(c)]));
  }
  CHECK(feasible > 40);
}

TEST_CASE("lower bound is nondecreasing and incumbent nonincreasing") {
  for (std::uint64_t seed = 200; seed < 215; ++seed) {
    auto p = testkit::gen_random_milp(seed, 12, 3, 4);
    std::vector<MilpTrace> trace;
    MilpOptions opt;
    opt.trace = [&](const MilpTrace& t) { trace.push_back(t); };
    const auto sol = solve_milp(p, opt);
    CAPTURE(seed);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i].lower_bound >= trace[i - 1].lower_bound - 1e-9 * (1 + std::abs(trace[i - 1].lower_bound)));
      CHECK(trace[i].incumbent <= trace[i - 1].incumbent);
    }
    if (sol.status == MilpStatus::optimal) CHECK(sol.best_bound == doctest::Approx(sol.objective));
  }
}

TEST_CASE("cut callback: outer approximation of a parabola") {
  // min t - x  s.t. t >= x^2 (lazy), x in [-2, 2], plus a binary that shifts x.
  MilpProblem p;
  const int x = p.lp.add_column(-2, 2, -1);
  const int t = p.lp.add_column(-10, 10, 1);
  const int b = p.lp.add_column(0, 1, 0.3);
  p.lp.add_row({{{x, 1}, {b, -1}}, Relation::le, 0.25});  // x <= 0.25 + b
  p.integer_columns = {b};
  auto cuts = [=](const std::vector<double>& pt) {
    std::vector<LinearRow> out;
    const double xv = pt[static_cast<std::size_t>(x)];
    if (pt[static_cast<std::size_t>(t)] < xv * xv - 1e-9) out.push_back({{{t, 1}, {x, -2 * xv}}, Relation::ge, -xv * xv});
    return out;
  };
  p.cut_callback = cuts;
  const auto sol = solve_milp(p, 10.0);
  REQUIRE(sol.status == MilpStatus::optimal);
  // b=0: x=0.25 -> 0.0625-0.25 = -0.1875; b=1: x=0.5 -> -0.25+0.3 = 0.05.
  CHECK(sol.objective == doctest::Approx(-0.1875).epsilon(1e-6));
  CHECK(cuts(sol.point).empty());
  CHECK(sol.cuts_added > 0);
}

TEST_CASE("time limit reports bound and status") {
  auto p = testkit::gen_random_milp(7, 12, 4, 5);
  const auto sol = solve_milp(p, 0.0);
  CHECK(sol.status == MilpStatus::time_limit);
  CHECK(sol.best_bound == -kInf);
}

TEST_CASE("cutoff prunes everything above it") {
  MilpProblem p;
  p.lp.add_column(0, 1, 1);
  p.lp.add_row({{{0, 1}}, Relation::ge, 0.5});
  p.integer_columns = {0};
  MilpOptions opt;
  opt.cutoff = 0.5;
  CHECK(solve_milp(p, opt).status == MilpStatus::infeasible);
}
