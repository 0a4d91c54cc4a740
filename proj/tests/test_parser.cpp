#include <random>

#include "doctest.h"
#include "polypart/parser.hpp"
#include "polypart/testkit.hpp"

using namespace polypart;

TEST_CASE("basic instance") {
  const auto m = parse("var x >= 0 <= 8; var y >= 0 <= 8; min x*y; s.t. c1: x + y >= 4;");
  REQUIRE(m.variables.size() == 2);
  CHECK(m.variables[0] == Variable{"x", VarKind::continuous, 0, 8});
  REQUIRE(m.objective.terms.size() == 1);
  CHECK(m.objective.terms[0].factors == std::vector<std::pair<int, int>>{{0, 1}, {1, 1}});
  REQUIRE(m.constraints.size() == 1);
  CHECK(m.constraints[0].rel == Relation::ge);
  CHECK(m.constraints[0].rhs == 4.0);
  CHECK_FALSE(m.reference_optimum.has_value());
}

TEST_CASE("binary declaration") {
  const auto m = parse("bin b;");
  REQUIRE(m.variables.size() == 1);
  CHECK(m.variables[0] == Variable{"b", VarKind::binary, 0, 1});
}

TEST_CASE("errors carry locations") {
  try {
    parse("var x >= 5 <= 1;");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 5);
    CHECK(std::string(e.what()).find("lower bound exceeds upper bound") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(parse("var x;\nvar x;"), doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_WITH_AS(parse("var x; min y;"), doctest::Contains("undeclared identifier 'y'"), ParseError);
  CHECK_THROWS_WITH_AS(parse("var x >= abc;"), doctest::Contains("non-numeric bound"), ParseError);
  CHECK_THROWS_WITH_AS(parse("var x; min x x;"), doctest::Contains("expected ';'"), ParseError);
  CHECK_THROWS_WITH_AS(parse("var x; min x^0.5;"), doctest::Contains("exponent"), ParseError);
  CHECK_THROWS_WITH_AS(parse("var x; s.t. c: x <= 1; s.t. c: x >= 0;"), doctest::Contains("duplicate constraint"),
                       ParseError);
}

TEST_CASE("max is negated into min, including the optimum annotation") {
  const auto m = parse("# optimum 12.5\nvar x >= 0 <= 5; max 2*x + 3;");
  CHECK(m.objective.terms[0].coef == -2.0);
  CHECK(m.objective.constant == -3.0);
  REQUIRE(m.reference_optimum.has_value());
  CHECK(*m.reference_optimum == -12.5);
}

TEST_CASE("constants fold into the right-hand side") {
  const auto m = parse("var x; s.t. c: 2*x + 3 - 1 <= 7;");
  CHECK(m.constraints[0].rhs == 5.0);
  CHECK(m.constraints[0].expr.constant == 0.0);
}

TEST_CASE("powers and products merge") {
  const auto m = parse("var x >= 0 <= 1; var y >= 0 <= 1; min x*y*x + 2*x^2*y - y*x;");
  REQUIRE(m.objective.terms.size() == 2);
  CHECK(m.objective.terms[0].coef == -1.0);
  CHECK(m.objective.terms[1].coef == 3.0);
  CHECK(m.objective.terms[1].factors == std::vector<std::pair<int, int>>{{0, 2}, {1, 1}});
}

TEST_CASE("writer formatting") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(7049.248022) == "7049.248022");
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(write(RawModel{}) == "# mlt 1\n");
  const auto m = parse("var x >= 0 <= 1; var y >= -2 <= 3; min 0.5*x*y; s.t. c1: x + y >= 4;");
  CHECK(write(m) ==
        "# mlt 1\n"
        "var x >= 0 <= 1;\n"
        "var y >= -2 <= 3;\n"
        "min 0.5*x*y;\n"
        "s.t. c1: x + y >= 4;\n");
}

TEST_CASE("round trip on the example") {
  const auto m = parse("var x >= 0 <= 8; var y >= 0 <= 8; min x*y; s.t. c1: x + y >= 4;");
  CHECK(parse(write(m)) == m);
}

TEST_CASE("round trip on random models") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    testkit::InstanceShape shape;
    shape.continuous = 1 + static_cast<int>(seed % 4);
    shape.binaries = static_cast<int>(seed % 3);
    shape.bilinear = static_cast<int>(seed % 4);
    shape.quadratic = static_cast<int>(seed % 2);
    shape.higher = static_cast<int>(seed % 3 == 0);
    shape.constraints = static_cast<int>(seed % 4);
    auto raw = testkit::gen_random_instance(seed, shape).raw;
    // Awkward coefficients exercise shortest round-trip formatting.
    for (auto& t : raw.objective.terms) t.coef *= std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    if (seed % 5 == 0) raw.reference_optimum = std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
    if (seed % 7 == 0) raw.variables[0].upper = kInf;
    CAPTURE(seed);
    CHECK(parse(write(raw)) == raw);
  }
}

TEST_CASE("normalized models write back to an equivalent instance") {
  const auto m = normalize(parse("var x >= 0 <= 2; var y >= 1 <= 3; min x^3*y; s.t. c: x*y <= 2;"));
  CHECK(normalize(parse(write(m))) == m);
}

TEST_CASE("fuzzed inputs parse or fail with a location") {
  const std::string alphabet = "varbinmx s.t.:;*^+-=<>#0123456789.e\n";
  std::mt19937_64 rng(11);
  int parsed = 0;
  for (int k = 0; k < 3000; ++k) {
    std::string text;
    const int len = static_cast<int>(rng() % 60);
    for (int i = 0; i < len; ++i) text += alphabet[rng() % alphabet.size()];
    if (k % 3 == 0) text = "var x >= 0 <= 1; var y;" + text;
    try {
      parse(text);
      ++parsed;
    } catch (const ParseError& e) {
      CHECK(e.line() >= 1);
      CHECK(e.column() >= 1);
    }
  }
  CHECK(parsed >= 0);
}
