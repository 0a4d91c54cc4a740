#include <cmath>
#include <random>

#include "doctest.h"
#include "polypart/model.hpp"
#include "polypart/parser.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

namespace {

Model from_text(const char* text) { return normalize(parse(text)); }

}  // namespace

TEST_CASE("bilinear objective becomes one term") {
  const auto m = from_text("var x1 >= 0 <= 1; var x2 >= 0 <= 2; var x3 >= 0 <= 3; min 3*x1*x2 + x3;");
  REQUIRE(m.terms.size() == 1);
  CHECK(m.terms[0].key == std::vector<int>{0, 1});
  const int z = m.terms[0].aux;
  CHECK(z == 3);
  CHECK(m.variables[3].lower == 0.0);
  CHECK(m.variables[3].upper == 2.0);
  CHECK(m.objective == SparseRow{{2, 1.0}, {3, 3.0}});
}

TEST_CASE("fourth power chains through a squared auxiliary") {
  const auto m = from_text("var x1 >= -1 <= 2; s.t. c: x1^4 <= 2;");
  REQUIRE(m.terms.size() == 2);
  const int w = m.terms[0].aux;
  CHECK(m.terms[0].key == std::vector<int>{0, 0});
  CHECK(m.terms[1].key == std::vector<int>{w, w});
  const int v = m.terms[1].aux;
  CHECK(m.constraints[0].row.coeffs == SparseRow{{v, 1.0}});
  CHECK(m.constraints[0].row.rhs == 2.0);
  // x^2 on [-1,2] is [0,4], not [-2,4].
  CHECK(m.variables[static_cast<std::size_t>(w)].lower == 0.0);
  CHECK(m.variables[static_cast<std::size_t>(w)].upper == 4.0);
  CHECK(m.variables[static_cast<std::size_t>(v)].upper == 16.0);
}

TEST_CASE("fifth power is (x^2)^2 * x") {
  const auto m = from_text("var x >= 0 <= 2; min x^5;");
  REQUIRE(m.terms.size() == 3);
  CHECK(m.terms[0].key == std::vector<int>{0, 0});
  CHECK(m.terms[1].key == std::vector<int>{1, 1});
  CHECK(m.terms[2].key == std::vector<int>{0, 2});
  CHECK(m.expand(m.terms[2].aux) == std::map<int, int>{{0, 5}});
  CHECK(m.variables[static_cast<std::size_t>(m.terms[2].aux)].upper == 32.0);
}

TEST_CASE("repeated factor is a monomial term") {
  const auto m = from_text("var x >= 0 <= 3; min x*x;");
  REQUIRE(m.terms.size() == 1);
  CHECK(m.terms[0].key == std::vector<int>{0, 0});
}

TEST_CASE("shared products reuse one auxiliary") {
  const auto m = from_text("var x >= 0 <= 1; var y >= 0 <= 1; min x*y; s.t. c: y*x + 2*x*y >= 0.5;");
  REQUIRE(m.terms.size() == 1);
  CHECK(m.constraints[0].row.coeffs == SparseRow{{2, 3.0}});
}

TEST_CASE("unbounded factor is rejected by name") {
  CHECK_THROWS_WITH_AS(from_text("var x >= 0; var y >= 0 <= 1; min x*y;"),
                       doctest::Contains("'x'"), ModelError);
  CHECK_NOTHROW(from_text("var x >= 0; min x;"));
}

TEST_CASE("term variables and originals") {
  const auto m = from_text("var x >= 0 <= 1; var y >= 0 <= 1; var u >= 0 <= 1; bin b; min x*y*b + u;");
  CHECK(m.term_variables() == std::vector<int>{0, 1});
  CHECK(m.original_variables() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("check_feasible") {
  const auto m = from_text("var x >= 0 <= 4; var y >= 0 <= 4; bin b; min x*y; s.t. c: x + b <= 10;");
  CHECK(check_feasible(m, {2, 3, 1, 6}, 1e-8));
  CHECK_FALSE(check_feasible(m, {2, 3, 1, 5.9}, 1e-8));
  CHECK_FALSE(check_feasible(m, {2, 3, 0.4, 6}, 1e-8));
  CHECK_FALSE(check_feasible(m, {5, 1, 0, 5}, 1e-8));
  CHECK_THROWS_AS(check_feasible(m, {2, 3}, 1e-8), std::invalid_argument);
}

TEST_CASE("normalize is idempotent through the raw form") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 3;
    shape.binaries = static_cast<int>(seed % 3);
    shape.bilinear = 2;
    shape.quadratic = 1;
    shape.higher = 1;
    shape.constraints = 2;
    const auto inst = testkit::gen_random_instance(seed, shape);
    const Model again = normalize(to_raw(inst.model));
    CAPTURE(seed);
    CHECK(again == inst.model);
  }
}

TEST_CASE("normalized objective equals the raw objective at lifted points") {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 3;
    shape.binaries = 1;
    shape.bilinear = 3;
    shape.quadratic = 1;
    shape.higher = 2;
    const auto inst = testkit::gen_random_instance(seed, shape);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(inst.model.variables.size(), 0.0);
      for (std::size_t i = 0; i < inst.raw.variables.size(); ++i) {
        const auto& v = inst.raw.variables[i];
        x[i] = v.is_binary() ? static_cast<double>(rng() % 2)
                             : std::uniform_real_distribution<double>(v.lower, v.upper)(rng);
      }
      complete_point(inst.model, x);
      const double raw = evaluate(inst.raw.objective, x);
      const double norm = objective_value(inst.model, x);
      CHECK(std::abs(raw - norm) <= 1e-12 * std::max(1.0, std::abs(raw)) * 10);
    }
  }
}

TEST_CASE("validate catches bad indices") {
  Model m;
  m.variables.push_back({"x", VarKind::continuous, 0, 1});
  m.constraints.push_back({"c", {{{3, 1.0}}, Relation::le, 1}});
  CHECK_THROWS_AS(validate(m), ModelError);
  Model t;
  t.variables.push_back({"x", VarKind::continuous, 0, 1});
  t.variables.push_back({"z", VarKind::continuous, 0, 1});
  t.terms.push_back({{0}, 1});
  CHECK_THROWS_AS(validate(t), ModelError);
}
