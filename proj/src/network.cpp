#include "luk/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace luk {

double Neuron::pre_activation(const std::vector<double>& in) const {
  if (in.size() != weights.size())
    throw std::invalid_argument("neuron fan-in mismatch");
  double z = bias;
  for (size_t i = 0; i < weights.size(); ++i) z += weights[i] * in[i];
  return z;
}

double Network::forward(const std::vector<double>& input) const {
  if (static_cast<int>(input.size()) != arity)
    throw std::invalid_argument("network arity mismatch");
  std::vector<double> cur = input;
  std::vector<double> next;
  for (const Layer& layer : layers) {
    next.clear();
    next.reserve(layer.neurons.size());
    for (const Neuron& n : layer.neurons) next.push_back(n.output(cur));
    cur = next;
  }
  if (cur.size() != 1) throw std::logic_error("final layer width must be 1");
  return cur[0];
}

std::vector<std::vector<double>> Network::forward_trace(const std::vector<double>& input) const {
  std::vector<std::vector<double>> acts;
  acts.push_back(input);
  for (const Layer& layer : layers) {
    std::vector<double> next;
    next.reserve(layer.neurons.size());
    for (const Neuron& n : layer.neurons) next.push_back(n.output(acts.back()));
    acts.push_back(std::move(next));
  }
  return acts;
}

bool Network::is_castro(double tol) const {
  for (const Layer& layer : layers) {
    for (const Neuron& n : layer.neurons) {
      for (double w : n.weights) {
        double r = std::round(w);
        if (std::abs(w - r) > tol || std::abs(r) > 1.0) return false;
      }
      if (std::abs(n.bias - std::round(n.bias)) > tol) return false;
    }
  }
  return true;
}

bool Network::is_binary_castro() const {
  if (!is_castro()) return false;
  for (const Layer& layer : layers) {
    for (const Neuron& n : layer.neurons) {
      int nonzero = 0;
      for (double w : n.weights)
        if (w != 0.0) ++nonzero;
      if (nonzero > 2) return false;
    }
  }
  return true;
}

size_t Network::parameter_count() const {
  size_t count = 0;
  for (const Layer& layer : layers)
    for (const Neuron& n : layer.neurons) count += n.weights.size() + 1;
  return count;
}

// ---------------------------------------------------------------------------
// Neuron classification (bias vs. counts of signed nonzero weights).

NeuronKind classify_neuron(const Neuron& nr) {
  std::vector<Literal> lits;
  int neg = 0, pos = 0;
  for (size_t i = 0; i < nr.weights.size(); ++i) {
    double w = nr.weights[i];
    double r = std::round(w);
    if (std::abs(w - r) > 1e-9)
      throw std::invalid_argument("classify_neuron requires integer weights");
    if (r == 0.0) continue;
    if (std::abs(r) != 1.0)
      throw std::invalid_argument("classify_neuron requires weights in {-1,0,1}");
    lits.push_back({static_cast<int>(i), r < 0});
    (r < 0 ? neg : pos)++;
  }
  double br = std::round(nr.bias);
  if (std::abs(nr.bias - br) > 1e-9)
    throw std::invalid_argument("classify_neuron requires an integer bias");
  int b = static_cast<int>(br);

  NeuronKind kind;
  if (pos + b <= 0) {  // max pre-activation <= 0
    kind.cls = NeuronClass::ConstantZero;
  } else if (b - neg >= 1) {  // min pre-activation >= 1
    kind.cls = NeuronClass::ConstantOne;
  } else if (b == -pos + 1) {
    kind.cls = NeuronClass::Conjunction;
    kind.literals = std::move(lits);
  } else if (b == neg) {
    kind.cls = NeuronClass::Disjunction;
    kind.literals = std::move(lits);
  } else {
    kind.cls = NeuronClass::Unrepresentable;
  }
  return kind;
}

bool is_representable(const Neuron& n) {
  return classify_neuron(n).cls != NeuronClass::Unrepresentable;
}

FormulaPtr neuron_to_formula(const NeuronKind& kind, const std::vector<FormulaPtr>& inputs) {
  switch (kind.cls) {
    case NeuronClass::ConstantZero: return Formula::constant(false);
    case NeuronClass::ConstantOne: return Formula::constant(true);
    case NeuronClass::Unrepresentable:
      throw std::invalid_argument("unrepresentable neuron has no formula");
    default: break;
  }
  NodeKind op = kind.cls == NeuronClass::Conjunction ? NodeKind::Otimes : NodeKind::Oplus;
  FormulaPtr acc;
  for (const Literal& lit : kind.literals) {
    FormulaPtr term = inputs.at(lit.input);
    if (lit.negated) term = Formula::make(NodeKind::Not, term);
    acc = acc ? Formula::make(op, acc, term) : term;
  }
  if (!acc) throw std::logic_error("conjunction/disjunction without literals");
  return acc;
}

std::variant<FormulaPtr, UnrepresentableAt> network_to_formula(const Network& net) {
  std::vector<FormulaPtr> prev;
  prev.reserve(net.arity);
  for (int i = 0; i < net.arity; ++i) prev.push_back(Formula::var(i));
  for (size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<FormulaPtr> cur;
    const Layer& layer = net.layers[l];
    for (size_t j = 0; j < layer.neurons.size(); ++j) {
      NeuronKind kind = classify_neuron(layer.neurons[j]);
      if (kind.cls == NeuronClass::Unrepresentable)
        return UnrepresentableAt{static_cast<int>(l), static_cast<int>(j)};
      cur.push_back(neuron_to_formula(kind, prev));
    }
    prev = std::move(cur);
  }
  return prev.at(0);
}

// ---------------------------------------------------------------------------
// Compilation: parse-tree mirror with identity pass-throughs.

namespace {

struct Tap {
  int index;
  double weight;
};

struct SparseNeuron {
  std::vector<Tap> taps;
  double bias = 0.0;
};

struct Wire {
  int layer;  // 0 = inputs
  int index;
};

struct Builder {
  int arity;
  std::vector<std::vector<SparseNeuron>> layers;

  int add(int layer, std::vector<Tap> taps, double bias) {
    if (static_cast<int>(layers.size()) < layer) layers.resize(layer);
    layers[layer - 1].push_back({std::move(taps), bias});
    return static_cast<int>(layers[layer - 1].size()) - 1;
  }

  Wire pad_to(Wire w, int layer) {
    while (w.layer < layer) {
      int idx = add(w.layer + 1, {{w.index, 1.0}}, 0.0);
      w = {w.layer + 1, idx};
    }
    return w;
  }

  Wire emit(const Formula& f) {
    switch (f.kind) {
      case NodeKind::Var:
        return {0, f.var_index};
      case NodeKind::Const0:
        return {1, add(1, {}, 0.0)};
      case NodeKind::Const1:
        return {1, add(1, {}, 1.0)};
      case NodeKind::Not: {
        Wire c = emit(*f.left);
        return {c.layer + 1, add(c.layer + 1, {{c.index, -1.0}}, 1.0)};
      }
      case NodeKind::Otimes:
      case NodeKind::Oplus:
      case NodeKind::Implies: {
        Wire a = emit(*f.left);
        Wire b = emit(*f.right);
        int depth = std::max(a.layer, b.layer);
        a = pad_to(a, depth);
        b = pad_to(b, depth);
        if (a.index == b.index) {
          // Both operands are the same wire; split it through two identity
          // neurons so the node keeps two distinct unit taps.
          depth += 1;
          a = pad_to(a, depth);
          b = pad_to(b, depth);
        }
        double wa = 1.0, wb = 1.0, bias = 0.0;
        if (f.kind == NodeKind::Otimes) bias = -1.0;
        if (f.kind == NodeKind::Implies) { wa = -1.0; bias = 1.0; }
        return {depth + 1, add(depth + 1, {{a.index, wa}, {b.index, wb}}, bias)};
      }
      default:
        throw std::logic_error("derived connective reached the compiler");
    }
  }
};

/// Rewrites And/Or/Iff only; the other connectives have neuron atoms.
FormulaPtr expand_for_compile(const Formula& f) {
  switch (f.kind) {
    case NodeKind::Var: return Formula::var(f.var_index);
    case NodeKind::Const0: return Formula::constant(false);
    case NodeKind::Const1: return Formula::constant(true);
    case NodeKind::Not:
      return Formula::make(NodeKind::Not, expand_for_compile(*f.left));
    case NodeKind::Otimes:
    case NodeKind::Oplus:
    case NodeKind::Implies:
      return Formula::make(f.kind, expand_for_compile(*f.left), expand_for_compile(*f.right));
    case NodeKind::And: {
      auto x = expand_for_compile(*f.left);
      auto y = expand_for_compile(*f.right);
      return Formula::make(NodeKind::Otimes, x, Formula::make(NodeKind::Implies, x, y));
    }
    case NodeKind::Or: {
      auto x = expand_for_compile(*f.left);
      auto y = expand_for_compile(*f.right);
      auto l = Formula::make(NodeKind::Implies, Formula::make(NodeKind::Implies, x, y), y);
      auto r = Formula::make(NodeKind::Implies, Formula::make(NodeKind::Implies, y, x), x);
      return Formula::make(NodeKind::Otimes, l, Formula::make(NodeKind::Implies, l, r));
    }
    case NodeKind::Iff: {
      auto x = expand_for_compile(*f.left);
      auto y = expand_for_compile(*f.right);
      return Formula::make(NodeKind::Otimes,
                           Formula::make(NodeKind::Implies, x, y),
                           Formula::make(NodeKind::Implies, y, x));
    }
  }
  throw std::logic_error("unhandled node kind");
}

}  // namespace

Network compile_formula(const Formula& f) {
  FormulaPtr g = expand_for_compile(f);
  Builder b{g->arity(), {}};
  Wire out = b.emit(*g);
  if (out.layer == 0) {  // bare variable: one identity neuron
    out = {1, b.add(1, {{out.index, 1.0}}, 0.0)};
  }
  Network net;
  net.arity = b.arity;
  net.layers.reserve(b.layers.size());
  int prev_width = b.arity;
  for (const auto& sparse_layer : b.layers) {
    Layer layer;
    for (const SparseNeuron& sn : sparse_layer) {
      Neuron n;
      n.weights.assign(prev_width, 0.0);
      n.bias = sn.bias;
      for (const Tap& t : sn.taps) n.weights.at(t.index) = t.weight;
      layer.neurons.push_back(std::move(n));
    }
    prev_width = static_cast<int>(layer.neurons.size());
    net.layers.push_back(std::move(layer));
  }
  return net;
}

TruthTable network_truth_subtable(const Network& net, int resolution, size_t budget) {
  TruthTable t;
  t.arity = net.arity;
  t.resolution = resolution;
  size_t total = grid_size(t.arity, resolution, budget);
  t.values.resize(total);
  std::vector<double> p(t.arity, 0.0);
  std::vector<int> digits(t.arity, 0);
  for (size_t i = 0; i < total; ++i) {
    t.values[i] = net.forward(p);
    for (int j = 0; j < t.arity; ++j) {
      if (++digits[j] <= resolution) {
        p[j] = static_cast<double>(digits[j]) / resolution;
        break;
      }
      digits[j] = 0;
      p[j] = 0.0;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string network_to_json(const Network& net) {
  nlohmann::json doc;
  doc["arity"] = net.arity;
  if (net.resolution_hint > 0) doc["resolution_hint"] = net.resolution_hint;
  if (!net.input_names.empty()) doc["input_names"] = net.input_names;
  doc["layers"] = nlohmann::json::array();
  for (const Layer& layer : net.layers) {
    nlohmann::json jl;
    jl["weights"] = nlohmann::json::array();
    nlohmann::json bias = nlohmann::json::array();
    for (const Neuron& n : layer.neurons) {
      jl["weights"].push_back(n.weights);
      bias.push_back(n.bias);
    }
    jl["bias"] = bias;
    doc["layers"].push_back(jl);
  }
  return doc.dump(2) + "\n";
}

Network network_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  Network net;
  net.arity = doc.at("arity").get<int>();
  net.resolution_hint = doc.value("resolution_hint", 0);
  if (doc.contains("input_names"))
    net.input_names = doc["input_names"].get<std::vector<std::string>>();
  int prev_width = net.arity;
  for (const auto& jl : doc.at("layers")) {
    Layer layer;
    const auto& weights = jl.at("weights");
    const auto& bias = jl.at("bias");
    if (weights.size() != bias.size())
      throw std::runtime_error("layer weights/bias size mismatch");
    for (size_t j = 0; j < weights.size(); ++j) {
      Neuron n;
      n.weights = weights[j].get<std::vector<double>>();
      n.bias = bias[j].get<double>();
      if (static_cast<int>(n.weights.size()) != prev_width)
        throw std::runtime_error("layer fan-in does not chain");
      layer.neurons.push_back(std::move(n));
    }
    prev_width = static_cast<int>(layer.neurons.size());
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty() || prev_width != 1)
    throw std::runtime_error("network must end in a width-1 layer");
  return net;
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write network file: " + path);
  out << network_to_json(net);
}

Network parse_psi_literal(const std::string& text) {
  size_t open = text.find('(');
  if (text.compare(0, 3, "psi") != 0 || open == std::string::npos || text.back() != ')')
    throw std::runtime_error("malformed psi literal: " + text);
  std::string body = text.substr(open + 1, text.size() - open - 2);
  size_t semi = body.find(';');
  if (semi == std::string::npos)
    throw std::runtime_error("psi literal needs 'psi(bias; inputs...)'");
  double bias = std::stod(body.substr(0, semi));
  std::vector<std::pair<int, double>> taps;
  int max_var = -1;
  std::stringstream ss(body.substr(semi + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    double w = 1.0;
    if (tok[0] == '-') { w = -1.0; tok = tok.substr(1); }
    else if (tok[0] == '+') { tok = tok.substr(1); }
    if (tok.size() < 2 || tok[0] != 'x')
      throw std::runtime_error("psi literal inputs must be variables: " + tok);
    int idx = std::stoi(tok.substr(1));
    taps.emplace_back(idx, w);
    max_var = std::max(max_var, idx);
  }
  Network net;
  net.arity = max_var + 1;
  Neuron n;
  n.weights.assign(net.arity, 0.0);
  n.bias = bias;
  for (auto& [idx, w] : taps) n.weights[idx] += w;
  net.layers.push_back(Layer{{std::move(n)}});
  return net;
}

Network resolve_network_argument(const std::string& arg) {
  if (arg.rfind("compile:", 0) == 0) {
    std::string rest = arg.substr(8);
    if (rest.rfind("psi(", 0) == 0) return parse_psi_literal(rest);
    return compile_formula(*parse_formula(rest));
  }
  if (arg.rfind("psi(", 0) == 0) return parse_psi_literal(arg);
  if (std::ifstream probe(arg); probe.good()) return load_network(arg);
  return compile_formula(*parse_formula(arg));
}

}  // namespace luk
