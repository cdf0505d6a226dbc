#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "luk/logic.hpp"

using namespace luk;

namespace {

double ev(const std::string& text, std::vector<double> a) {
  return eval_formula(*parse_formula(text), a);
}

// Random formula over m variables, for differential tests against the
// reference connective definitions.
FormulaPtr random_formula(std::mt19937& rng, int m, int depth) {
  std::uniform_int_distribution<int> pick(0, depth == 0 ? 1 : 9);
  switch (pick(rng)) {
    case 0:
    case 1: {
      std::uniform_int_distribution<int> v(0, m - 1);
      return Formula::var(v(rng));
    }
    case 2:
      return Formula::constant(rng() & 1);
    case 3:
      return Formula::make(NodeKind::Not, random_formula(rng, m, depth - 1));
    default: {
      NodeKind ops[] = {NodeKind::Otimes, NodeKind::Oplus, NodeKind::Implies,
                        NodeKind::And,    NodeKind::Or,    NodeKind::Iff};
      std::uniform_int_distribution<int> o(0, 5);
      return Formula::make(ops[o(rng)], random_formula(rng, m, depth - 1),
                           random_formula(rng, m, depth - 1));
    }
  }
}

}  // namespace

TEST_CASE("connective semantics") {
  CHECK(ev("x0 * x1", {0.7, 0.6}) == doctest::Approx(0.3));
  CHECK(ev("x0 * x1", {0.3, 0.6}) == doctest::Approx(0.0));
  CHECK(ev("x0 + x1", {0.7, 0.6}) == doctest::Approx(1.0));
  CHECK(ev("x0 + x1", {0.3, 0.2}) == doctest::Approx(0.5));
  CHECK(ev("x0 -> x1", {0.7, 0.6}) == doctest::Approx(0.9));
  CHECK(ev("x0 -> x1", {0.3, 0.6}) == doctest::Approx(1.0));
  CHECK(ev("!x0", {0.25}) == doctest::Approx(0.75));
  CHECK(ev("x0 & x1", {0.7, 0.6}) == doctest::Approx(0.6));
  CHECK(ev("x0 | x1", {0.7, 0.6}) == doctest::Approx(0.7));
  CHECK(ev("x0 <-> x1", {0.7, 0.6}) == doctest::Approx(0.9));
  CHECK(ev("0", {}) == 0.0);
  CHECK(ev("1", {}) == 1.0);
}

TEST_CASE("parser precedence and associativity") {
  CHECK(format_formula(*parse_formula("x0 * x1 + x2")) == "x0 * x1 + x2");
  CHECK(format_formula(*parse_formula("(x0 + x1) * x2")) == "(x0 + x1) * x2");
  CHECK(format_formula(*parse_formula("!x0 * x1")) == "!x0 * x1");
  CHECK(format_formula(*parse_formula("!(x0 * x1)")) == "!(x0 * x1)");
  // -> is right-associative.
  auto f = parse_formula("x0 -> x1 -> x2");
  CHECK(f->right->kind == NodeKind::Implies);
  CHECK(format_formula(*f) == "x0 -> x1 -> x2");
  CHECK(format_formula(*parse_formula("(x0 -> x1) -> x2")) == "(x0 -> x1) -> x2");
  CHECK(format_formula(*parse_formula("x0 <-> x1 -> x2")) == "x0 <-> x1 -> x2");
}

TEST_CASE("format/parse round trip on random formulas") {
  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    auto f = random_formula(rng, 3, 4);
    auto g = parse_formula(format_formula(*f));
    CHECK(structurally_equal(*f, *g));
  }
}

TEST_CASE("named variables bind in first-occurrence order") {
  std::vector<std::string> names;
  auto f = parse_formula("rain -> (wet & rain)", names);
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "rain");
  CHECK(names[1] == "wet");
  CHECK(f->left->var_index == 0);
  CHECK(f->right->right->var_index == 0);
  // Identifiers and explicit x-indices may mix; x1 keeps its index.
  auto g = parse_formula("rain -> x1", names);
  CHECK(g->left->var_index == 0);
  CHECK(g->right->var_index == 1);
}

TEST_CASE("parse errors carry a position") {
  try {
    parse_formula("x0 * ");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 5);
  }
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("x0 x1"), ParseError);
  CHECK_THROWS_AS(parse_formula("(x0"), ParseError);
}

TEST_CASE("expand_derived is semantics-preserving and primitive-only") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    auto f = random_formula(rng, 3, 4);
    auto g = expand_derived(*f);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> a = {u(rng), u(rng), u(rng)};
      CHECK(eval_formula(*f, a) == doctest::Approx(eval_formula(*g, a)).epsilon(1e-12));
    }
  }
  auto g = expand_derived(*parse_formula("!x0 | (x1 <-> x2) + 1"));
  // Only Var, Const0, *, -> may remain.
  std::vector<const Formula*> stack = {g.get()};
  while (!stack.empty()) {
    const Formula* n = stack.back();
    stack.pop_back();
    bool primitive = n->kind == NodeKind::Var || n->kind == NodeKind::Const0 ||
                     n->kind == NodeKind::Otimes || n->kind == NodeKind::Implies;
    CHECK(primitive);
    if (n->left) stack.push_back(n->left.get());
    if (n->right) stack.push_back(n->right.get());
  }
}

TEST_CASE("truth subtable indexing: x0 is the fastest digit") {
  auto t = truth_subtable(*parse_formula("x0 -> x1"), 2);
  REQUIRE(t.size() == 9);
  // Row order: (0,0),(1/2,0),(1,0),(0,1/2),...
  CHECK(t.values[0] == doctest::Approx(1.0));
  CHECK(t.values[1] == doctest::Approx(0.5));
  CHECK(t.values[2] == doctest::Approx(0.0));
  CHECK(t.values[3] == doctest::Approx(1.0));
  CHECK(t.values[5] == doctest::Approx(0.5));
  CHECK(t.values[8] == doctest::Approx(1.0));
  auto p = t.point(5);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("grid budget is enforced") {
  CHECK(grid_size(3, 4) == 125);
  CHECK_THROWS_AS(grid_size(64, 100), std::overflow_error);
  CHECK_THROWS_AS(truth_subtable(*parse_formula("x0 * x31"), 4), std::overflow_error);
}

TEST_CASE("truth table csv round trip") {
  auto t = truth_subtable(*parse_formula("x0 <-> x1 * x2"), 3);
  std::stringstream ss;
  write_truth_table_csv(t, ss);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "x0,x1,x2,y");
  ss.seekg(0);
  auto back = read_truth_table_csv(ss);
  CHECK(back.arity == 3);
  CHECK(back.resolution == 3);
  REQUIRE(back.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(t.values[i]).epsilon(1e-10));
}
