#include "luk/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace luk {

// ---------------------------------------------------------------------------
// Evaluation sets.

EvalMode EvalMode::full_grid(int n) {
  EvalMode m;
  m.kind = Kind::FullGrid;
  m.resolution = n;
  return m;
}

EvalMode EvalMode::dataset(std::vector<std::vector<double>> pts) {
  EvalMode m;
  m.kind = Kind::Dataset;
  m.points = std::move(pts);
  return m;
}

EvalMode EvalMode::monte_carlo(int samples, uint64_t seed) {
  EvalMode m;
  m.kind = Kind::MonteCarlo;
  m.samples = samples;
  m.seed = seed;
  return m;
}

std::vector<std::vector<double>> EvalMode::sample_points(int arity, size_t budget) const {
  switch (kind) {
    case Kind::FullGrid: {
      size_t total = grid_size(arity, resolution, budget);
      std::vector<std::vector<double>> pts;
      pts.reserve(total);
      std::vector<int> d(arity, 0);
      for (size_t i = 0; i < total; ++i) {
        std::vector<double> p(arity);
        for (int j = 0; j < arity; ++j)
          p[j] = static_cast<double>(d[j]) / resolution;
        pts.push_back(std::move(p));
        int j = 0;
        while (j < arity && ++d[j] > resolution) d[j++] = 0;
      }
      return pts;
    }
    case Kind::Dataset:
      for (const auto& p : points)
        if (static_cast<int>(p.size()) != arity)
          throw std::invalid_argument("dataset point arity mismatch");
      return points;
    case Kind::MonteCarlo: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<std::vector<double>> pts(samples, std::vector<double>(arity));
      for (auto& p : pts)
        for (double& v : p) v = u(rng);
      return pts;
    }
  }
  throw std::logic_error("unknown eval mode");
}

std::string EvalMode::describe() const {
  std::ostringstream ss;
  switch (kind) {
    case Kind::FullGrid: ss << "full_grid(n=" << resolution << ")"; break;
    case Kind::Dataset: ss << "dataset(" << points.size() << " rows)"; break;
    case Kind::MonteCarlo: ss << "monte_carlo(" << samples << ", seed=" << seed << ")"; break;
  }
  return ss.str();
}

Evaluable as_evaluable(const Network& net) {
  auto owned = std::make_shared<Network>(net);
  return {owned->arity, [owned](const std::vector<double>& x) { return owned->forward(x); }};
}

Evaluable as_evaluable(FormulaPtr f) {
  return {f->arity(), [f](const std::vector<double>& x) { return eval_formula(*f, x); }};
}

SimilarityScore lambda_similarity(const Evaluable& a, const Evaluable& b, const EvalMode& mode) {
  if (a.arity != b.arity) throw std::invalid_argument("lambda_similarity arity mismatch");
  auto pts = mode.sample_points(a.arity);
  if (pts.empty()) throw std::invalid_argument("empty evaluation set");
  double sum = 0.0;
  for (const auto& p : pts) sum += std::abs(a.fn(p) - b.fn(p));
  return {sum / static_cast<double>(pts.size()), mode.describe()};
}

// ---------------------------------------------------------------------------
// Rule R.

namespace {

struct SignCounts {
  int pos = 0, neg = 0;
};

SignCounts count_signs(const std::vector<double>& weights) {
  SignCounts c;
  for (double w : weights) {
    if (w > 0) ++c.pos;
    if (w < 0) ++c.neg;
  }
  return c;
}

int integer_bias(const Neuron& nr) {
  double r = std::round(nr.bias);
  if (std::abs(nr.bias - r) > 1e-9)
    throw std::invalid_argument("rule R requires an integer bias");
  return static_cast<int>(r);
}

}  // namespace

std::vector<Decomposition> rule_R_splits(const Neuron& nr, int separated_input) {
  classify_neuron(nr);  // validates Castro weights / integer bias
  if (separated_input < 0 || separated_input >= static_cast<int>(nr.weights.size()) ||
      nr.weights[separated_input] == 0.0)
    throw std::invalid_argument("separated input must carry a nonzero weight");
  SignCounts all = count_signs(nr.weights);
  if (all.pos + all.neg < 3) throw std::invalid_argument("rule R requires fan-in >= 3");

  double ws = nr.weights[separated_input];
  int b = integer_bias(nr);
  std::vector<double> inner_w = nr.weights;
  inner_w[separated_input] = 0.0;
  SignCounts in = count_signs(inner_w);
  // Non-constant bounds: inner b0 in [1-p, n], outer b1 in [1-p, n] with the
  // outer counting the separated weight plus the inner's +1 link.
  int p_out = 1 + (ws > 0 ? 1 : 0);
  int n_out = ws < 0 ? 1 : 0;
  std::vector<Decomposition> out;
  for (int b0 = 1 - in.pos; b0 <= in.neg; ++b0) {
    int b1 = b - b0;
    if (b1 > b0) continue;
    if (b1 < 1 - p_out || b1 > n_out) continue;
    Decomposition d;
    d.inner = Neuron{inner_w, static_cast<double>(b0)};
    d.outer = Neuron{{ws, 1.0}, static_cast<double>(b1)};
    d.separated_input = separated_input;
    d.b0 = b0;
    d.b1 = b1;
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition search over partially split neuron chains.

namespace {

struct Chain;
using ChainPtr = std::shared_ptr<const Chain>;

struct Chain {
  struct Arm {
    double weight;   // +1 or -1 for inputs, always +1 for sub-chains
    int input = -1;  // original input index, -1 for a sub-chain
    ChainPtr sub;
  };
  double bias = 0.0;
  std::vector<Arm> arms;
};

double chain_eval(const Chain& c, const std::vector<double>& x) {
  double z = c.bias;
  for (const auto& a : c.arms)
    z += a.weight * (a.sub ? chain_eval(*a.sub, x) : x[a.input]);
  return activate(z);
}

int chain_neurons(const Chain& c) {
  int n = 1;
  for (const auto& a : c.arms)
    if (a.sub) n += chain_neurons(*a.sub);
  return n;
}

void chain_key_rec(const Chain& c, std::string& out) {
  out += "psi(" + std::to_string(static_cast<long long>(c.bias)) + ";";
  for (const auto& a : c.arms) {
    if (a.weight < 0) out += "-";
    if (a.sub)
      chain_key_rec(*a.sub, out);
    else
      out += "x" + std::to_string(a.input);
    out += ",";
  }
  out += ")";
}

std::string chain_key(const Chain& c) {
  std::string s;
  chain_key_rec(c, s);
  return s;
}

bool chain_binary(const Chain& c) {
  if (c.arms.size() > 2) return false;
  for (const auto& a : c.arms)
    if (a.sub && !chain_binary(*a.sub)) return false;
  return true;
}

/// All single rule-R applications at the first (pre-order) node with more
/// than two arms; empty when the chain is already binary.
std::vector<ChainPtr> expand_first(const ChainPtr& node) {
  if (node->arms.size() > 2) {
    std::vector<ChainPtr> out;
    int m = static_cast<int>(node->arms.size());
    int b = static_cast<int>(node->bias);
    for (int sep = 0; sep < m; ++sep) {
      SignCounts in;
      for (int i = 0; i < m; ++i) {
        if (i == sep) continue;
        (node->arms[i].weight > 0 ? in.pos : in.neg)++;
      }
      double ws = node->arms[sep].weight;
      int p_out = 1 + (ws > 0 ? 1 : 0);
      int n_out = ws < 0 ? 1 : 0;
      for (int b0 = 1 - in.pos; b0 <= in.neg; ++b0) {
        int b1 = b - b0;
        if (b1 > b0 || b1 < 1 - p_out || b1 > n_out) continue;
        auto inner = std::make_shared<Chain>();
        inner->bias = b0;
        for (int i = 0; i < m; ++i)
          if (i != sep) inner->arms.push_back(node->arms[i]);
        auto outer = std::make_shared<Chain>();
        outer->bias = b1;
        outer->arms.push_back(node->arms[sep]);
        outer->arms.push_back({1.0, -1, inner});
        out.push_back(outer);
      }
    }
    return out;
  }
  // Recurse into the first expandable arm.
  for (size_t i = 0; i < node->arms.size(); ++i) {
    if (!node->arms[i].sub) continue;
    auto subs = expand_first(node->arms[i].sub);
    if (subs.empty()) continue;
    std::vector<ChainPtr> out;
    for (const auto& s : subs) {
      auto copy = std::make_shared<Chain>(*node);
      copy->arms[i].sub = s;
      out.push_back(copy);
    }
    return out;
  }
  return {};
}

FormulaPtr chain_to_formula(const Chain& c) {
  Neuron nr;
  nr.bias = c.bias;
  std::vector<FormulaPtr> inputs;
  for (const auto& a : c.arms) {
    nr.weights.push_back(a.weight);
    inputs.push_back(a.sub ? chain_to_formula(*a.sub) : Formula::var(a.input));
  }
  NeuronKind kind = classify_neuron(nr);
  if (kind.cls == NeuronClass::Unrepresentable)
    throw std::logic_error("non-binary chain node survived decomposition");
  return neuron_to_formula(kind, inputs);
}

/// Compiles and pads the first layer so the candidate keeps the source arity
/// even when trailing inputs carry zero weight.
Network compile_at_arity(const Formula& f, int arity) {
  Network net = compile_formula(f);
  if (net.arity < arity) {
    for (Neuron& n : net.layers.front().neurons) n.weights.resize(arity, 0.0);
    net.arity = arity;
  }
  return net;
}

double mean_abs_error(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

std::vector<Candidate> decompositions(const Neuron& nr, int beam_width, const EvalMode& mode) {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be >= 1");
  NeuronKind root_kind = classify_neuron(nr);  // also validates
  int arity = static_cast<int>(nr.weights.size());
  auto pts = mode.sample_points(arity);
  if (pts.empty()) throw std::invalid_argument("empty evaluation set");
  std::vector<double> target(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) target[i] = nr.output(pts[i]);

  // Constant neurons have no rule-R arms; they are their own candidate.
  if (root_kind.cls == NeuronClass::ConstantZero || root_kind.cls == NeuronClass::ConstantOne) {
    FormulaPtr f = Formula::constant(root_kind.cls == NeuronClass::ConstantOne);
    Candidate c{compile_at_arity(*f, arity), f, 0.0, 1, format_formula(*f)};
    return {c};
  }

  auto root = std::make_shared<Chain>();
  root->bias = integer_bias(nr);
  for (int i = 0; i < arity; ++i)
    if (nr.weights[i] != 0.0) root->arms.push_back({nr.weights[i], i, nullptr});

  auto signature = [&](const ChainPtr& c) {
    std::vector<double> v(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) v[i] = chain_eval(*c, pts[i]);
    return v;
  };
  // Dedup key quantized so candidates differing only by rounding order of
  // semantically equal chains collapse to one function.
  auto quantize = [](const std::vector<double>& v) {
    std::vector<int64_t> q(v.size());
    for (size_t i = 0; i < v.size(); ++i) q[i] = llround(v[i] * 1e9);
    return q;
  };

  std::vector<ChainPtr> frontier = {root};
  // Finished candidates keyed by evaluation vector; equal tables are one
  // function, kept with the smallest (neurons, structure).
  std::map<std::vector<int64_t>, ChainPtr> finished;
  while (!frontier.empty()) {
    std::vector<ChainPtr> next;
    std::map<std::string, ChainPtr> seen;
    for (const auto& c : frontier) {
      auto expanded = expand_first(c);
      if (expanded.empty()) {
        auto sig = quantize(signature(c));
        auto it = finished.find(sig);
        if (it == finished.end()) {
          finished.emplace(std::move(sig), c);
        } else {
          auto rank = [](const ChainPtr& x) {
            return std::pair<int, std::string>(chain_neurons(*x), chain_key(*x));
          };
          if (rank(c) < rank(it->second)) it->second = c;
        }
        continue;
      }
      for (auto& e : expanded) seen.emplace(chain_key(*e), e);
    }
    next.reserve(seen.size());
    for (auto& [key, c] : seen) next.push_back(c);
    if (static_cast<int>(next.size()) > beam_width) {
      std::vector<std::pair<double, ChainPtr>> scored;
      scored.reserve(next.size());
      for (const auto& c : next)
        scored.emplace_back(mean_abs_error(signature(c), target), c);
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      next.clear();
      for (int i = 0; i < beam_width; ++i) next.push_back(scored[i].second);
    }
    frontier = std::move(next);
  }

  std::vector<Candidate> out;
  out.reserve(finished.size());
  for (const auto& [sig, chain] : finished) {
    Candidate c;
    c.formula = chain_to_formula(*chain);
    c.net = compile_at_arity(*c.formula, arity);
    c.lambda = mean_abs_error(signature(chain), target);
    c.neuron_count = chain_neurons(*chain);
    c.structure = chain_key(*chain);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.lambda, a.neuron_count, a.structure) <
           std::tie(b.lambda, b.neuron_count, b.structure);
  });
  return out;
}

std::vector<Candidate> decompositions(const Neuron& nr, int beam_width, int resolution) {
  return decompositions(nr, beam_width, EvalMode::full_grid(resolution));
}

ApproximationResult best_approximation(const Neuron& nr, const EvalMode& mode, int beam_width) {
  NeuronKind kind = classify_neuron(nr);
  ApproximationResult r;
  if (kind.cls != NeuronClass::Unrepresentable) {
    std::vector<FormulaPtr> vars;
    for (size_t i = 0; i < nr.weights.size(); ++i) vars.push_back(Formula::var(static_cast<int>(i)));
    FormulaPtr f = neuron_to_formula(kind, vars);
    r.best = Candidate{compile_at_arity(*f, static_cast<int>(nr.weights.size())), f, 0.0, 1,
                       format_formula(*f)};
    r.candidates_explored = 1;
    r.lambdas = {0.0};
    return r;
  }
  auto cands = decompositions(nr, beam_width, mode);
  r.best = cands.front();
  r.candidates_explored = cands.size();
  for (const auto& c : cands) r.lambdas.push_back(c.lambda);
  return r;
}

// ---------------------------------------------------------------------------
// Whole-network extraction.

namespace {

FormulaPtr substitute(const Formula& f, const std::vector<FormulaPtr>& env) {
  switch (f.kind) {
    case NodeKind::Var: return env.at(f.var_index);
    case NodeKind::Const0: return Formula::constant(false);
    case NodeKind::Const1: return Formula::constant(true);
    default:
      return Formula::make(f.kind, substitute(*f.left, env),
                           f.right ? substitute(*f.right, env) : nullptr);
  }
}

const char* class_name(NeuronClass c) {
  switch (c) {
    case NeuronClass::Conjunction: return "conjunction";
    case NeuronClass::Disjunction: return "disjunction";
    case NeuronClass::ConstantZero: return "constant0";
    case NeuronClass::ConstantOne: return "constant1";
    case NeuronClass::Unrepresentable: return "unrepresentable";
  }
  return "?";
}

}  // namespace

ExtractionReport extract_with_approximation(const Network& net, const EvalMode& mode,
                                            int beam_width) {
  ExtractionReport report;
  report.eval_mode = mode.describe();

  // Per-layer input points for scoring hidden neurons: propagated network
  // points in Dataset / MonteCarlo modes, the neuron's own grid in FullGrid.
  std::vector<std::vector<std::vector<double>>> layer_points(net.layers.size());
  if (mode.kind != EvalMode::Kind::FullGrid) {
    auto pts = mode.sample_points(net.arity);
    for (const auto& p : pts) {
      auto acts = net.forward_trace(p);
      for (size_t l = 0; l < net.layers.size(); ++l)
        layer_points[l].push_back(acts[l]);
    }
  }

  std::vector<FormulaPtr> prev;
  for (int i = 0; i < net.arity; ++i) prev.push_back(Formula::var(i));
  for (size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<FormulaPtr> cur;
    for (size_t j = 0; j < net.layers[l].neurons.size(); ++j) {
      const Neuron& nr = net.layers[l].neurons[j];
      NeuronKind kind = classify_neuron(nr);
      NeuronReport entry;
      entry.layer = static_cast<int>(l);
      entry.index = static_cast<int>(j);
      entry.kind = class_name(kind.cls);
      if (kind.cls != NeuronClass::Unrepresentable) {
        entry.formula = neuron_to_formula(kind, prev);
      } else {
        EvalMode local = mode.kind == EvalMode::Kind::FullGrid
                             ? mode
                             : EvalMode::dataset(layer_points[l]);
        auto approx = best_approximation(nr, local, beam_width);
        entry.formula = substitute(*approx.best.formula, prev);
        entry.lambda = approx.best.lambda;
        entry.candidates_explored = approx.candidates_explored;
      }
      report.neurons.push_back(entry);
      cur.push_back(entry.formula);
    }
    prev = std::move(cur);
  }
  report.formula = prev.at(0);
  // The formula may not mention the highest inputs; score it at net arity.
  FormulaPtr f = report.formula;
  Evaluable ef{net.arity, [f](const std::vector<double>& x) { return eval_formula(*f, x); }};
  report.lambda = lambda_similarity(as_evaluable(net), ef, mode).lambda;
  return report;
}

std::string ExtractionReport::to_json() const {
  nlohmann::json doc;
  doc["formula"] = format_formula(*formula);
  doc["lambda"] = lambda;
  doc["eval_mode"] = eval_mode;
  doc["neurons"] = nlohmann::json::array();
  for (const auto& n : neurons) {
    doc["neurons"].push_back({{"layer", n.layer},
                              {"index", n.index},
                              {"kind", n.kind},
                              {"formula", format_formula(*n.formula)},
                              {"lambda", n.lambda},
                              {"candidates_explored", n.candidates_explored}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace luk
