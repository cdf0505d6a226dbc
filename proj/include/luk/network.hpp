#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "luk/logic.hpp"

namespace luk {

/// Saturating linear activation: identity truncated to [0,1].
inline double activate(double z) { return std::min(1.0, std::max(z, 0.0)); }

struct Neuron {
  std::vector<double> weights;
  double bias = 0.0;

  double pre_activation(const std::vector<double>& in) const;
  double output(const std::vector<double>& in) const {
    return activate(pre_activation(in));
  }
};

struct Layer {
  std::vector<Neuron> neurons;  // all fan-ins equal the previous width
};

struct Network {
  int arity = 0;
  int resolution_hint = 0;  // 0 = unset
  std::vector<std::string> input_names;
  std::vector<Layer> layers;

  double forward(const std::vector<double>& input) const;
  /// Activations per layer (input vector first); used by training.
  std::vector<std::vector<double>> forward_trace(const std::vector<double>& input) const;

  bool is_castro(double tol = 0.0) const;
  /// At most two nonzero weights per neuron, all Castro.
  bool is_binary_castro() const;
  size_t parameter_count() const;
};

enum class NeuronClass { Conjunction, Disjunction, ConstantZero, ConstantOne, Unrepresentable };

struct Literal {
  int input = 0;      // index into the neuron's inputs
  bool negated = false;
};

struct NeuronKind {
  NeuronClass cls = NeuronClass::Unrepresentable;
  std::vector<Literal> literals;  // for Conjunction / Disjunction
};

/// Classifies an integer neuron by its bias against the counts of negative
/// and positive nonzero weights. Zero-weight inputs are dropped first.
NeuronKind classify_neuron(const Neuron& n);

bool is_representable(const Neuron& n);

/// Chains the (possibly negated) input formulas with * or +; constants map
/// to 0 / 1. Throws on Unrepresentable.
FormulaPtr neuron_to_formula(const NeuronKind& kind, const std::vector<FormulaPtr>& inputs);

struct UnrepresentableAt {
  int layer = 0;
  int index = 0;
};

/// Bottom-up decompilation; identity pass-throughs are elided and negative
/// weights negate the sub-formula via the literal signs.
std::variant<FormulaPtr, UnrepresentableAt> network_to_formula(const Network& net);

/// Compiles to a binary Castro network mirroring the parse tree, using
/// identity pass-through neurons to equalize depths. And/Or/Iff are expanded
/// first; *, +, ->, !, 0, 1 map to their neuron atoms.
Network compile_formula(const Formula& f);

TruthTable network_truth_subtable(const Network& net, int resolution,
                                  size_t budget = kDefaultTableBudget);

// --- serialization ----------------------------------------------------------

std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);
Network load_network(const std::string& path);
void save_network(const Network& net, const std::string& path);

/// Parses the literal syntax `psi(b; -x0, x1, x2)`: a single-neuron network
/// over the named inputs, weight -1 for a `-` prefix.
Network parse_psi_literal(const std::string& text);

/// Resolves a CLI-style evaluable argument: `psi(...)` literal,
/// `compile:FORMULA`, a network file path, or a formula string.
Network resolve_network_argument(const std::string& arg);

}  // namespace luk
