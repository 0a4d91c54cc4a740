#include <cmath>
#include <random>

#include "doctest.h"
#include "polypart/parser.hpp"
#include "polypart/relaxation.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

namespace {

Model from_text(const char* text) { return normalize(parse(text)); }

// Range of z allowed by the four McCormick rows at a point, evaluated directly.
Interval envelope_at(Interval bi, Interval bj, double xi, double xj) {
  const auto rows = mccormick_bilinear(bi, bj, 0, 1, 2);
  Interval out{-kInf, kInf};
  for (const auto& r : rows) {
    double zc = 0.0, rest = 0.0;
    for (const auto& [c, v] : r.coeffs) {
      if (c == 0) zc = v;
      if (c == 1) rest += v * xi;
      if (c == 2) rest += v * xj;
    }
    const double bound = (r.rhs - rest) / zc;
    if (r.rel == Relation::ge) out.lo = std::max(out.lo, bound);
    else out.hi = std::min(out.hi, bound);
  }
  return out;
}

double row_scale(const LinearRow& r, const std::vector<double>& p) {
  double s = std::abs(r.rhs);
  for (const auto& [c, v] : r.coeffs) s += std::abs(v * p[static_cast<std::size_t>(c)]);
  return 1.0 + s;
}

bool satisfies_all_rows(const RelaxedMILP& r, const std::vector<double>& p, double tol) {
  for (const auto& row : r.milp.lp.rows) {
    if (violation(row, p) > tol * row_scale(row, p)) return false;
  }
  for (int c = 0; c < r.milp.lp.num_cols(); ++c) {
    const auto sc = static_cast<std::size_t>(c);
    const double s = tol * std::max(1.0, std::abs(p[sc]));
    if (p[sc] < r.milp.lp.col_lower[sc] - s || p[sc] > r.milp.lp.col_upper[sc] + s) return false;
  }
  return true;
}

double relaxation_optimum(const RelaxedMILP& r) {
  const auto sol = solve_milp(r.milp, kInf);
  REQUIRE(sol.status == MilpStatus::optimal);
  return sol.objective + r.objective_constant;
}

}  // namespace

TEST_CASE("partition map basics") {
  PartitionMap p({0, 1, 5, 8});
  CHECK(p.size() == 3);
  CHECK(p.locate(1.0) == 0);
  CHECK(p.locate(7.0) == 2);
  CHECK(p.locate(0.0) == 0);
  CHECK(p.locate(8.0) == 2);
  CHECK(p.locate(1.0000001) == 1);
  CHECK(PartitionMap(Interval{2, 6}).locate(3) == 0);
  CHECK_THROWS(PartitionMap({0, 1, 1, 2}));
  CHECK_THROWS(PartitionMap({0, 1}, 1));
  CHECK_NOTHROW(PartitionMap(Interval{3, 3}));
  p.set_active(1);
  CHECK(p.insert(3.0));
  CHECK(p.breakpoints() == std::vector<double>{0, 1, 3, 5, 8});
  CHECK(p.active() == 1);
  CHECK_FALSE(p.insert(3.0));
  CHECK_FALSE(p.insert(8.0));
  const auto u = PartitionMap::uniform({0, 1}, 4);
  CHECK(u.breakpoints() == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
}

TEST_CASE("McCormick envelope values") {
  CHECK(envelope_at({0, 1}, {0, 1}, 0.5, 0.5) == Interval{0, 0.5});
  CHECK(envelope_at({-1, 1}, {-1, 1}, 0, 0) == Interval{-1, 1});
  const Interval fixed = envelope_at({2, 2}, {-3, 5}, 2, 1.5);
  CHECK(fixed.lo == doctest::Approx(3.0));
  CHECK(fixed.hi == doctest::Approx(3.0));
  CHECK_THROWS(mccormick_bilinear({0, kInf}, {0, 1}, 0, 1, 2));
}

TEST_CASE("McCormick brackets the product on the box") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 500; ++k) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Interval bi{std::min(a, b), std::max(a, b)};
    const Interval bj{std::min(c, d), std::max(c, d)};
    const double xi = bi.lo + (bi.hi - bi.lo) * std::uniform_real_distribution<double>(0, 1)(rng);
    const double xj = bj.lo + (bj.hi - bj.lo) * std::uniform_real_distribution<double>(0, 1)(rng);
    const Interval e = envelope_at(bi, bj, xi, xj);
    CHECK(e.lo <= xi * xj + 1e-9);
    CHECK(e.hi >= xi * xj - 1e-9);
  }
}

TEST_CASE("BMC is exact on binary points") {
  MilpProblem p;
  p.lp.add_column(0, 1);
  p.lp.add_column(0, 1);
  p.lp.add_column(0, 1);
  p.integer_columns = {0, 1};
  const auto rows = mccormick_binary(p, 0, 1, 2);
  for (int a = 0; a <= 1; ++a) {
    for (int b = 0; b <= 1; ++b) {
      for (double z : {0.0, 0.5, 1.0}) {
        bool ok = true;
        for (const auto& r : rows) ok = ok && violation(r, {double(a), double(b), z}) <= 0;
        CHECK(ok == (z == a * b));
      }
    }
  }
  CHECK_THROWS(mccormick_binary(p, 0, 2, 1));
}

TEST_CASE("lexicographic grouping") {
  const std::vector<Interval> b{{0, 2}, {0, 2}, {-1, 1}, {1, 2}, {0, 0}};
  const auto links = group_lexicographic({{0, 1, 2, 3}, 4}, b, 10);
  REQUIRE(links.size() == 3);
  CHECK(links[0].left == 0);
  CHECK(links[0].right == 1);
  CHECK(links[0].out == 10);
  CHECK(links[0].bounds == Interval{0, 4});
  CHECK(links[1].left == 10);
  CHECK(links[1].right == 2);
  CHECK(links[1].out == 11);
  CHECK(links[1].bounds == Interval{-4, 4});
  CHECK(links[2].left == 11);
  CHECK(links[2].out == 4);
  CHECK(group_lexicographic({{0, 1}, 4}, b, 10).size() == 1);
}

TEST_CASE("single-partition block reduces to plain McCormick") {
  const auto m = from_text("var x >= -1 <= 3; var y >= 0 <= 4; min x*y;");
  const auto r = build_relaxation(m, {}, RelaxMode::MC);
  CHECK(r.binaries_added() == 0);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const double x = std::uniform_real_distribution<double>(-1, 3)(rng);
    const double y = std::uniform_real_distribution<double>(0, 4)(rng);
    const Interval got = relaxation_range(r, {{0, x}, {1, y}}, 2);
    const Interval want = envelope_at({-1, 3}, {0, 4}, x, y);
    CHECK(got.lo == doctest::Approx(want.lo));
    CHECK(got.hi == doctest::Approx(want.hi));
  }
}

TEST_CASE("piecewise block uses the selected partition's envelope") {
  const auto m = from_text("var xi >= 0 <= 4; var xj >= 0 <= 4; min xi*xj;");
  const PartitionMaps maps{{0, PartitionMap({0, 2, 4})}};
  const auto r = build_relaxation(m, maps, RelaxMode::DTMC);
  const Interval got = relaxation_range(r, {{0, 1.0}, {1, 3.0}}, 2);
  const Interval want = envelope_at({0, 2}, {0, 4}, 1.0, 3.0);
  CHECK(want == Interval{2, 4});
  CHECK(got.lo == doctest::Approx(want.lo));
  CHECK(got.hi == doctest::Approx(want.hi));
}

TEST_CASE("grid points admit the exact product") {
  const auto m = from_text("var x >= -2 <= 3; var y >= 1 <= 5; min x*y;");
  const PartitionMaps maps{{0, PartitionMap({-2, 0, 1, 3})}, {1, PartitionMap({1, 2.5, 5})}};
  const auto r = build_relaxation(m, maps, RelaxMode::DTMC);
  for (double x : {-2.0, 0.0, 1.0, 3.0}) {
    for (double y : {1.0, 2.5, 5.0}) {
      const Interval got = relaxation_range(r, {{0, x}, {1, y}}, 2);
      CHECK(got.lo == doctest::Approx(x * y));
      CHECK(got.hi == doctest::Approx(x * y));
    }
  }
}

TEST_CASE("piecewise quadratic block") {
  const auto m = from_text("var x >= 0 <= 2; min x^2;");
  const auto r1 = build_relaxation(m, {}, RelaxMode::MC);
  REQUIRE(r1.monomials.size() == 1);
  const Interval at1 = relaxation_range(r1, {{0, 1.0}}, 1);
  CHECK(at1.lo == doctest::Approx(1.0));
  CHECK(at1.hi == doctest::Approx(2.0));

  const PartitionMaps maps{{0, PartitionMap({0, 0.5, 1.25, 2})}};
  const auto r3 = build_relaxation(m, maps, RelaxMode::DTMC);
  for (double t : {0.0, 0.5, 1.25, 2.0}) {
    const Interval at = relaxation_range(r3, {{0, t}}, 1);
    CHECK(at.lo == doctest::Approx(t * t));
    CHECK(at.hi == doctest::Approx(t * t));
  }

  const auto cuts = r1.generate_cuts({1.0, 0.5});
  REQUIRE(cuts.size() == 1);
  CHECK(cuts[0].coeffs == SparseRow{{0, -2.0}, {1, 1.0}});
  CHECK(cuts[0].rel == Relation::ge);
  CHECK(cuts[0].rhs == -1.0);
  CHECK(violation(cuts[0], {1.0, 0.5}) == doctest::Approx(0.5));
  CHECK(r1.generate_cuts({1.0, 1.0}).empty());
}

TEST_CASE("secant-tangent region is strictly tighter at x = 0.5") {
  const auto reg = lemma1_regions(PartitionMap({0, 1, 2}));
  const Interval a = relaxation_range(reg.a, {{reg.x, 0.5}}, reg.z);
  const Interval b = relaxation_range(reg.b, {{reg.x, 0.5}}, reg.z);
  CHECK(b.lo == doctest::Approx(0.0));
  CHECK(a.lo >= 0.249);
  CHECK(a.lo <= 0.25 + 1e-9);
  CHECK(a.hi == doctest::Approx(b.hi));
  const Interval a1 = relaxation_range(reg.a, {{reg.x, 1.0}}, reg.z);
  const Interval b1 = relaxation_range(reg.b, {{reg.x, 1.0}}, reg.z);
  CHECK(a1.lo == doctest::Approx(1.0));
  CHECK(a1.hi == doctest::Approx(1.0));
  CHECK(b1.lo == doctest::Approx(1.0));
  CHECK(b1.hi == doctest::Approx(1.0));
}

TEST_CASE("MC lower bound on min x*y, x+y >= 4") {
  const auto m = from_text("var x >= 0 <= 8; var y >= 0 <= 8; min x*y; s.t. c1: x + y >= 4;");
  const auto r = build_relaxation(m, {}, RelaxMode::MC);
  // Envelope minimum over the feasible region, by sampling.
  double best = kInf;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const double x = 8.0 * i / 400, y = 8.0 * j / 400;
      if (x + y < 4 - 1e-12) continue;
      best = std::min(best, envelope_at({0, 8}, {0, 8}, x, y).lo);
    }
  }
  CHECK(relaxation_optimum(r) == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("binary bookkeeping") {
  const auto m = from_text("var x >= 0 <= 8; var y >= 0 <= 8; min x*y; s.t. c1: x + y >= 4;");
  for (int n : {2, 3, 10}) {
    const PartitionMaps maps{{0, PartitionMap::uniform({0, 8}, n)}, {1, PartitionMap::uniform({0, 8}, n)}};
    const auto r = build_relaxation(m, maps, RelaxMode::UTMC);
    CHECK(r.selector_binaries == 2 * n);
    CHECK(r.product_binaries == n * n);
    CHECK(r.binaries_added() == 2 * n + n * n);
  }
  const auto bin = from_text("bin a; bin b; bin c; min a*b - b*c;");
  const auto rb = build_relaxation(bin, {}, RelaxMode::DTMC);
  CHECK(rb.binaries_added() == 0);
  CHECK(relaxation_optimum(rb) == doctest::Approx(-1.0));
}

TEST_CASE("one partitioned variable per link") {
  const auto m = from_text("var x >= 0 <= 4; var y >= 0 <= 4; var w >= 0 <= 4; min x*y + y*w; s.t. c: x + y + w >= 3;");
  const PartitionMaps maps{{0, PartitionMap::uniform({0, 4}, 3)}, {1, PartitionMap::uniform({0, 4}, 3)},
                           {2, PartitionMap::uniform({0, 4}, 3)}};
  RelaxOptions opt;
  opt.single_partition_per_link = true;
  const auto r = build_relaxation(m, maps, RelaxMode::DTMC, opt);
  // y appears in both terms, so only y is partitioned.
  CHECK(r.selector_map.size() == 1);
  CHECK(r.selector_map.begin()->first == 1);
  CHECK(r.product_binaries == 0);
  const auto full = build_relaxation(m, maps, RelaxMode::DTMC);
  CHECK(relaxation_optimum(full) >= relaxation_optimum(r) - 1e-9);
}

TEST_CASE("BMC and row-sum linearization of selector pairs agree") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 3;
    shape.bilinear = 3;
    shape.quadratic = 1;
    shape.constraints = 2;
    const auto inst = testkit::gen_random_instance(seed, shape);
    PartitionMaps maps;
    for (int v : inst.model.term_variables()) {
      const auto& var = inst.model.variables[static_cast<std::size_t>(v)];
      maps[v] = PartitionMap::uniform(var.bounds(), 2 + static_cast<int>(seed % 3));
    }
    RelaxOptions bmc;
    bmc.bmc_product_rows = true;
    const double a = relaxation_optimum(build_relaxation(inst.model, maps, RelaxMode::UTMC));
    const double b = relaxation_optimum(build_relaxation(inst.model, maps, RelaxMode::UTMC, bmc));
    CAPTURE(seed);
    CHECK(a == doctest::Approx(b).epsilon(1e-7));
  }
}

TEST_CASE("lifted feasible points satisfy every row and generate no cuts") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 3;
    shape.binaries = static_cast<int>(seed % 2);
    shape.bilinear = 2;
    shape.quadratic = 1;
    shape.higher = 1;
    shape.constraints = 1;
    const auto inst = testkit::gen_random_instance(seed, shape);
    PartitionMaps maps;
    for (int v : inst.model.term_variables()) {
      const auto& var = inst.model.variables[static_cast<std::size_t>(v)];
      maps[v] = PartitionMap::uniform(var.bounds(), 1 + static_cast<int>((seed + v) % 4));
    }
    const auto r = build_relaxation(inst.model, maps, RelaxMode::DTMC);
    const auto pts = testkit::feasible_samples(inst.model, 9, kInf);
    CAPTURE(seed);
    for (const auto& p : pts) {
      const auto lifted = r.lift(p);
      CHECK(satisfies_all_rows(r, lifted, 1e-7));
      CHECK(r.generate_cuts(lifted).empty());
    }
  }
}

TEST_CASE("refining a partition never lowers the bound") {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 2 + static_cast<int>(seed % 2);
    shape.bilinear = 2;
    shape.quadratic = static_cast<int>(seed % 2);
    shape.constraints = 2;
    const auto inst = testkit::gen_random_instance(seed, shape);
    PartitionMaps maps;
    for (int v : inst.model.term_variables()) maps[v] = PartitionMap(inst.model.variables[static_cast<std::size_t>(v)].bounds());
    double prev = relaxation_optimum(build_relaxation(inst.model, maps, RelaxMode::DTMC));
    for (int step = 0; step < 5; ++step) {
      auto it = maps.begin();
      std::advance(it, static_cast<long>(rng() % maps.size()));
      const Interval d = it->second.domain();
      it->second.insert(d.lo + d.width() * std::uniform_real_distribution<double>(0.05, 0.95)(rng));
      const double next = relaxation_optimum(build_relaxation(inst.model, maps, RelaxMode::DTMC));
      CAPTURE(seed);
      CHECK(next >= prev - 1e-7 * (1 + std::abs(prev)));
      prev = next;
    }
  }
}

TEST_CASE("degree-4 chains and shared prefixes") {
  const auto m = from_text("var a >= 0 <= 2; var b >= 1 <= 2; var c >= -1 <= 1; var d >= 1 <= 3; min a*b*c*d + a*b*c; s.t. k: a^4 <= 10;");
  const auto r = build_relaxation(m, {}, RelaxMode::MC);
  // a*b*c is a model term and also the prefix of a*b*c*d.
  int abc = -1;
  for (const auto& t : m.terms) {
    if (t.key == std::vector<int>{0, 1, 2}) abc = t.aux;
  }
  CHECK(r.aux_map.at({0, 1, 2}) == abc);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> p(m.variables.size());
    p[0] = std::uniform_real_distribution<double>(0, 1.5)(rng);
    p[1] = std::uniform_real_distribution<double>(1, 2)(rng);
    p[2] = std::uniform_real_distribution<double>(-1, 1)(rng);
    p[3] = std::uniform_real_distribution<double>(1, 3)(rng);
    complete_point(m, p);
    CHECK(satisfies_all_rows(r, r.lift(p), 1e-9));
  }
}
