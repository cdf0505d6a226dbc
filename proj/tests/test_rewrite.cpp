#include <doctest.h>

#include <cmath>
#include <random>

#include "luk/rewrite.hpp"

using namespace luk;

namespace {

bool grid_equal(const Evaluable& a, const Evaluable& b, int n) {
  return lambda_similarity(a, b, EvalMode::full_grid(n)).lambda < 1e-12;
}

bool candidate_matches(const std::vector<Candidate>& cands, const std::string& formula, int n) {
  auto f = as_evaluable(parse_formula(formula));
  for (const auto& c : cands) {
    Evaluable e{f.arity, [g = c.formula](const std::vector<double>& x) {
                  return eval_formula(*g, x);
                }};
    if (grid_equal(e, f, n)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("rule R split bounds") {
  // psi_0(-x0, x1, x2), separating x2.
  Neuron a{{-1.0, 1.0, 1.0}, 0.0};
  auto splits = rule_R_splits(a, 2);
  REQUIRE(splits.size() == 2);
  CHECK(splits[0].b0 == 0);
  CHECK(splits[0].b1 == 0);
  CHECK(splits[1].b0 == 1);
  CHECK(splits[1].b1 == -1);
  for (const auto& d : splits) {
    CHECK(d.b0 + d.b1 == 0);
    CHECK(d.b1 <= d.b0);
    CHECK(d.outer.weights == std::vector<double>{1.0, 1.0});
    CHECK(d.inner.weights == std::vector<double>{-1.0, 1.0, 0.0});
    NeuronClass inner = classify_neuron(d.inner).cls;
    NeuronClass outer = classify_neuron(d.outer).cls;
    CHECK(inner != NeuronClass::ConstantZero);
    CHECK(inner != NeuronClass::ConstantOne);
    CHECK(outer != NeuronClass::ConstantZero);
    CHECK(outer != NeuronClass::ConstantOne);
  }

  // psi_2(-x0, -x1, x2), separating x2: the single split (b0=2, b1=0).
  Neuron b{{-1.0, -1.0, 1.0}, 2.0};
  auto sb = rule_R_splits(b, 2);
  REQUIRE(sb.size() == 1);
  CHECK(sb[0].b0 == 2);
  CHECK(sb[0].b1 == 0);

  CHECK_THROWS_AS(rule_R_splits(Neuron{{1.0, 1.0}, -1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(rule_R_splits(Neuron{{0.0, 1.0, 1.0, 1.0}, 0.0}, 0), std::invalid_argument);
}

TEST_CASE("three-input closure contains the three known functions") {
  Neuron a{{-1.0, 1.0, 1.0}, 0.0};
  auto cands = decompositions(a, 64, 4);
  // Separating x2 gives two splits, x1 two more, x0 one: five distinct
  // functions in total (the x1/x2 separations are not symmetric).
  REQUIRE(cands.size() == 5);
  CHECK(candidate_matches(cands, "x2 + (!x0 * x1)", 4));
  CHECK(candidate_matches(cands, "x2 * (!x0 + x1)", 4));
  CHECK(candidate_matches(cands, "!x0 * (x1 + x2)", 4));
  for (const auto& c : cands) {
    CHECK(c.net.is_binary_castro());
    CHECK(std::holds_alternative<FormulaPtr>(network_to_formula(c.net)));
    CHECK(c.neuron_count == 2);
  }
}

TEST_CASE("representable wide neurons decompose into one equivalence class") {
  Neuron disj{{-1.0, -1.0, 1.0}, 2.0};  // !x0 + !x1 + x2
  auto cands = decompositions(disj, 64, 4);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].lambda == 0.0);
  CHECK(grid_equal(as_evaluable(cands[0].net),
                   as_evaluable(parse_formula("!x0 + !x1 + x2")), 4));
}

TEST_CASE("representability") {
  CHECK(is_representable(Neuron{{1.0, 1.0, 1.0}, -2.0}));
  CHECK_FALSE(is_representable(Neuron{{-1.0, 1.0, 1.0}, 0.0}));
  CHECK(is_representable(Neuron{{-1.0, -1.0, -1.0}, 4.0}));  // constant 1
  // Cross-check at small fan-in: representable iff the rule-R closure is a
  // single grid-equivalence class.
  for (double w0 : {-1.0, 1.0})
    for (double w1 : {-1.0, 1.0})
      for (double w2 : {-1.0, 1.0})
        for (int b = -2; b <= 3; ++b) {
          Neuron nr{{w0, w1, w2}, static_cast<double>(b)};
          auto cands = decompositions(nr, 64, 4);
          CHECK(is_representable(nr) == (cands.size() == 1));
        }
}

TEST_CASE("lambda values for the three-input neuron") {
  auto alpha = as_evaluable(parse_psi_literal("psi(0; -x0, x1, x2)"));
  auto beta = as_evaluable(parse_formula("x2 + (!x0 * x1)"));
  CHECK(lambda_similarity(alpha, beta, EvalMode::full_grid(1)).lambda ==
        doctest::Approx(0.125));
  CHECK(lambda_similarity(alpha, beta, EvalMode::full_grid(2)).lambda ==
        doctest::Approx(0.1296296).epsilon(1e-4));
  CHECK(lambda_similarity(alpha, alpha, EvalMode::full_grid(3)).lambda == 0.0);
  CHECK_THROWS_AS(
      lambda_similarity(alpha, as_evaluable(parse_formula("x0")), EvalMode::full_grid(1)),
      std::invalid_argument);
}

TEST_CASE("lambda is a pseudometric on random compiled formulas") {
  std::mt19937 rng(31);
  const char* pool[] = {"x0 * x1 + !x2", "x0 -> (x1 & x2)", "x0 | !x1 | x2",
                        "(x0 <-> x1) * x2", "!x0 + x1 * x2", "x0 * x1 * x2"};
  EvalMode mode = EvalMode::full_grid(2);
  for (int t = 0; t < 30; ++t) {
    std::uniform_int_distribution<int> pick(0, 5);
    auto a = as_evaluable(compile_formula(*parse_formula(pool[pick(rng)])));
    auto b = as_evaluable(compile_formula(*parse_formula(pool[pick(rng)])));
    auto c = as_evaluable(compile_formula(*parse_formula(pool[pick(rng)])));
    double ab = lambda_similarity(a, b, mode).lambda;
    double ba = lambda_similarity(b, a, mode).lambda;
    double ac = lambda_similarity(a, c, mode).lambda;
    double cb = lambda_similarity(c, b, mode).lambda;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(lambda_similarity(a, a, mode).lambda == 0.0);
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("dataset and monte carlo modes") {
  auto a = as_evaluable(parse_formula("x0 * x1"));
  auto b = as_evaluable(parse_formula("x0 & x1"));
  auto ds = EvalMode::dataset({{0.5, 0.5}, {1.0, 0.5}, {0.0, 0.0}});
  CHECK(lambda_similarity(a, b, ds).lambda == doctest::Approx(0.5 / 3.0));

  auto mc = EvalMode::monte_carlo(512, 99);
  double l1 = lambda_similarity(a, b, mc).lambda;
  double l2 = lambda_similarity(a, b, mc).lambda;
  CHECK(l1 == l2);  // seeded, reproducible
  CHECK(l1 > 0.0);
  CHECK(l1 < 0.5);
}

TEST_CASE("best approximation of the five-input neuron") {
  Neuron alpha{{-1.0, 1.0, -1.0, 1.0, -1.0}, 0.0};
  auto r1 = best_approximation(alpha, EvalMode::full_grid(1), 256);
  CHECK(r1.best.lambda == doctest::Approx(0.09375).epsilon(1e-9));
  CHECK(r1.best.net.is_binary_castro());
  CHECK(r1.lambdas.front() == r1.best.lambda);
  CHECK(std::is_sorted(r1.lambdas.begin(), r1.lambdas.end()));

  // beta_2 must be in the candidate set at every resolution.
  auto cands = decompositions(alpha, 256, 2);
  CHECK(candidate_matches(cands, "!x0 * (x1 * (!x2 * (x3 + !x4)))", 2));

  // Non-increasing best lambda in beam width.
  double prev = 1.0;
  for (int beam : {2, 8, 32, 128}) {
    double l = best_approximation(alpha, EvalMode::full_grid(2), beam).best.lambda;
    CHECK(l <= prev + 1e-12);
    prev = l;
  }
}

TEST_CASE("representable neurons approximate themselves") {
  Neuron conj{{1.0, 1.0, 1.0}, -2.0};
  auto r = best_approximation(conj, EvalMode::full_grid(2));
  CHECK(r.best.lambda == 0.0);
  CHECK(grid_equal(as_evaluable(r.best.net), as_evaluable(parse_formula("x0 * x1 * x2")), 3));
}

TEST_CASE("extraction of a fully representable network has zero stress") {
  auto net = compile_formula(*parse_formula("(x0 * x1) + !x2"));
  auto rep = extract_with_approximation(net, EvalMode::full_grid(2));
  CHECK(rep.lambda == 0.0);
  for (const auto& n : rep.neurons) {
    CHECK(n.lambda == 0.0);
    CHECK(n.kind != "unrepresentable");
  }
  CHECK(grid_equal(as_evaluable(net), as_evaluable(rep.formula), 4));
}

TEST_CASE("extraction approximates unrepresentable neurons") {
  Network net;
  net.arity = 3;
  net.layers.push_back(Layer{{Neuron{{-1.0, 1.0, 1.0}, 0.0}}});
  auto rep = extract_with_approximation(net, EvalMode::full_grid(2));
  REQUIRE(rep.neurons.size() == 1);
  CHECK(rep.neurons[0].kind == "unrepresentable");
  CHECK(rep.neurons[0].lambda == doctest::Approx(0.1296296).epsilon(1e-4));
  CHECK(rep.lambda == doctest::Approx(rep.neurons[0].lambda).epsilon(1e-9));
  CHECK(rep.neurons[0].candidates_explored == 5);

  auto json = rep.to_json();
  CHECK(json.find("\"unrepresentable\"") != std::string::npos);
  CHECK(json.find("full_grid(n=2)") != std::string::npos);
}
