#include <cmath>
#include <utility>

#include "doctest.h"
#include "polypart/driver.hpp"
#include "polypart/parser.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

namespace {

Model from_text(const char* text) { return normalize(parse(text)); }

const char* kBilinear = "var x >= 0 <= 8; var y >= 0 <= 8; min x*y; s.t. c: x + y >= 4;";
const char* kHyperbola = "# optimum 4\nvar x >= 0.5 <= 8; var y >= 0.5 <= 8; min x + y; s.t. c: x*y >= 4;";

bool nondecreasing(const SolveReport& r, double rel = 1e-9) {
  for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
    const double a = r.trajectory[i - 1].lower_bound, b = r.trajectory[i].lower_bound;
    if (b < a - rel * std::max(1.0, std::abs(a))) return false;
  }
  return true;
}

nlohmann::json without_timing(const SolveReport& r, const Model& m) {
  auto j = to_json(r, m);
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("mode names") {
  for (auto m : {SolveMode::MC, SolveMode::UTMC, SolveMode::DTMC, SolveMode::CP_DTMC, SolveMode::TCP_DTMC}) {
    CHECK(parse_solve_mode(to_string(m)) == m);
  }
  CHECK(parse_solve_mode("TCP_DTMC") == SolveMode::TCP_DTMC);
  CHECK_THROWS_AS(parse_solve_mode("bb"), Error);
}

TEST_CASE("defaults") {
  SolverConfig c;
  CHECK(c.time_limit == 3600.0);
  CHECK(c.eps == 0.001);
  CHECK(c.tol_imp == 0.001);
  CHECK(c.tighten.tol == 0.01);
  CHECK(c.delta == 4.0);
  CHECK(c.utmc_n == 10);
}

TEST_CASE("incumbent search") {
  SUBCASE("feasible and not below the optimum") {
    const Model m = from_text(kBilinear);
    const auto inc = find_incumbent(m);
    CHECK(check_feasible(m, inc.point, 1e-7));
    CHECK(inc.objective_value >= -1e-9);
  }
  SUBCASE("no constraints") {
    const Model m = from_text("var x >= 0 <= 1; var y >= 0 <= 1; min x*y - x - y;");
    CHECK(find_incumbent(m).objective_value == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("infeasible model") {
    const Model m = from_text("var x >= 0 <= 10; min x; s.t. a: x >= 5; s.t. b: x <= 1;");
    CHECK_THROWS_AS(find_incumbent(m), Error);
  }
  SUBCASE("deterministic for a seed") {
    const Model m = from_text(kHyperbola);
    IncumbentOptions o;
    o.seed = 7;
    CHECK(find_incumbent(m, o).point == find_incumbent(m, o).point);
  }
  SUBCASE("matches the grid oracle on random instances") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      testkit::InstanceShape sh;
      sh.continuous = 2 + static_cast<int>(seed % 2);
      sh.binaries = static_cast<int>(seed % 2);
      sh.bilinear = 2;
      sh.quadratic = 1;
      sh.constraints = 2;
      const auto g = testkit::gen_random_instance(seed, sh);
      const auto o = testkit::oracle_minlp(g.model);
      REQUIRE(o.feasible);
      const auto inc = find_incumbent(g.model);
      CAPTURE(seed);
      CHECK(check_feasible(g.model, inc.point, 1e-7));
      const double tol = 1e-3 * std::max(1.0, std::abs(o.optimum));
      CHECK(inc.objective_value <= o.optimum + tol);
    }
  }
}

TEST_CASE("gap and contraction metrics") {
  CHECK(gap_percent(10, 8).value == doctest::Approx(25.0));
  CHECK(gap_percent(3.5, 3.5).value == 0.0);
  CHECK(gap_percent(58.384, 58.384).value == 0.0);
  const auto g = gap_percent(2.0, 0.0);
  CHECK(g.absolute);
  CHECK(g.value == 2.0);
  CHECK(bc_percent({0}, {10}, {0}, {10}) == 0.0);
  CHECK(bc_percent({0, 0}, {10, 4}, {0, 1}, {5, 3}) == doctest::Approx(100.0));
  CHECK(bc_percent({0}, {10}, {4}, {6}) == doctest::Approx(400.0));
  CHECK(std::isinf(bc_percent({0}, {10}, {5}, {5})));
}

TEST_CASE("dtmc converges on the hyperbola") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.mode = SolveMode::DTMC;
  const auto r = solve(m, c);
  CHECK(nondecreasing(r));
  CHECK(r.lower_bound <= 4.0 + 1e-9);
  CHECK(r.gap_vs_reference);
  CHECK(r.gap.value <= 0.01);
  CHECK(r.iterations <= 20);
  CHECK(r.incumbent_value == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("dtmc on min xy with x + y >= 4") {
  // Optimum 0 (e.g. x = 0, y = 4).
  const Model m = from_text(kBilinear);
  const auto o = testkit::oracle_minlp(m);
  REQUIRE(o.optimum == doctest::Approx(0.0).epsilon(1e-9));
  SolverConfig c;
  const auto r = solve(m, c);
  CHECK(r.iterations <= 20);
  CHECK(r.lower_bound >= o.optimum - 1e-4);
  CHECK(r.lower_bound <= o.optimum + 1e-9);
  CHECK(r.gap.absolute);
}

TEST_CASE("pure binary model is exact in one iteration") {
  const Model m = from_text("bin a; bin b; bin c; min a*b - 2*b*c + a - c; s.t. k: a + b + c >= 2;");
  const auto o = testkit::oracle_minlp(m);
  SolverConfig c;
  const auto r = solve(m, c);
  REQUIRE(r.trajectory.size() == 1);
  CHECK(r.trajectory[0].partitions == 0);
  CHECK(r.lower_bound == doctest::Approx(o.optimum).epsilon(1e-9));
  CHECK(r.status == SolveStatus::converged_bound);
}

TEST_CASE("single-pass modes") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.mode = SolveMode::MC;
  const auto mc = solve(m, c);
  CHECK(mc.status == SolveStatus::single_pass);
  CHECK(mc.binaries_added == 0);
  CHECK(mc.iterations == 1);
  c.mode = SolveMode::UTMC;
  for (int n : {2, 3, 5}) {
    c.utmc_n = n;
    const auto u = solve(m, c);
    CHECK(u.binaries_added == 2 * n + n * n);
    CHECK(u.lower_bound >= mc.lower_bound - 1e-9);
    CHECK(u.lower_bound <= 4.0 + 1e-9);
  }
}

TEST_CASE("tightening modes report contraction") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.mode = SolveMode::CP_DTMC;
  const auto cp = solve(m, c);
  REQUIRE(cp.tightening);
  CHECK(cp.bc_percent > 0.0);
  c.mode = SolveMode::TCP_DTMC;
  c.delta = 8.0;
  const auto tcp = solve(m, c);
  REQUIRE(tcp.tightening);
  CHECK(tcp.bc_percent >= cp.bc_percent - 1e-9);
  CHECK(tcp.tightening->round_selectors.front() == 6);
  for (const auto* r : {&cp, &tcp}) {
    CHECK(nondecreasing(*r));
    CHECK(r->lower_bound <= 4.0 + 1e-9);
    CHECK(r->gap.value <= 0.01);
  }
}

TEST_CASE("partition criterion ends the loop") {
  const Model m = from_text(kHyperbola);
  for (auto [delta, eps] : {std::pair{3.0, 0.05}, {4.0, 0.01}, {10.0, 0.01}}) {
    SolverConfig c;
    c.delta = delta;
    c.eps = eps;
    c.stop_on_improvement = false;
    c.stop_on_bound = false;
    const auto r = solve(m, c);
    CAPTURE(delta);
    CHECK((r.status == SolveStatus::converged_partition || r.status == SolveStatus::global_optimum));
    CHECK(r.stop_reason == "partition");
    CHECK(nondecreasing(r));
  }
}

TEST_CASE("lower bounds are valid and nondecreasing on random instances") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    testkit::InstanceShape sh;
    sh.continuous = 2;
    sh.binaries = static_cast<int>(seed % 2);
    sh.bilinear = 2;
    sh.quadratic = 1;
    sh.constraints = 2;
    const auto g = testkit::gen_random_instance(seed, sh);
    const auto o = testkit::oracle_minlp(g.model);
    SolverConfig c;
    c.time_limit = 60;
    const auto r = solve(g.model, c);
    CAPTURE(seed);
    CHECK(nondecreasing(r));
    const double tol = 1e-6 * std::max(1.0, std::abs(o.optimum));
    for (const auto& it : r.trajectory) {
      CHECK(it.lower_bound <= o.optimum + tol);
      CHECK(it.lower_bound <= r.incumbent_value + tol);
    }
  }
}

TEST_CASE("supplied incumbents") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.mode = SolveMode::MC;
  c.incumbent = std::vector<double>{2.0, 4.0};
  const auto r = solve(m, c);
  CHECK(r.incumbent_value == 6.0);
  c.incumbent = std::vector<double>{1.0, 1.0};
  CHECK_THROWS_AS(solve(m, c), Error);
  c.incumbent = std::vector<double>{1.0};
  CHECK_THROWS_AS(solve(m, c), Error);
}

TEST_CASE("unbounded term variable is rejected") {
  CHECK_THROWS_AS(from_text("var x >= 0; var y >= 0 <= 1; min x*y; s.t. c: x + y >= 1;"), Error);
}

TEST_CASE("time limit") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.time_limit = 0.0;
  const auto r = solve(m, c);
  CHECK(r.status == SolveStatus::time_limit);
  CHECK(r.trajectory.empty());
}

TEST_CASE("reports are deterministic apart from timing") {
  const Model m = from_text(kHyperbola);
  for (auto mode : {SolveMode::DTMC, SolveMode::TCP_DTMC, SolveMode::UTMC}) {
    SolverConfig c;
    c.mode = mode;
    c.seed = 3;
    const auto a = without_timing(solve(m, c), m).dump();
    const auto b = without_timing(solve(m, c), m).dump();
    CHECK(a == b);
  }
}

TEST_CASE("json layout") {
  const Model m = from_text(kHyperbola);
  SolverConfig c;
  c.mode = SolveMode::CP_DTMC;
  auto r = solve(m, c);
  r.instance = "hyp";
  const auto j = to_json(r, m);
  CHECK(j["instance"] == "hyp");
  CHECK(j["mode"] == "cp-dtmc");
  CHECK(j["reference_optimum"] == 4.0);
  CHECK(j["trajectory"].size() == r.trajectory.size());
  CHECK(j["timing"]["iterations"].size() == r.trajectory.size());
  CHECK(j["tightening"]["variables"].size() == 2);
  CHECK(j["incumbent"]["point"].contains("x"));
  CHECK(!j["trajectory"][0].contains("seconds"));
}
