#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "luk/network.hpp"

namespace luk {

/// Evaluation sets for similarity scoring. Full grids are exact but blow up
/// with arity; datasets reproduce observed inputs; Monte Carlo is the seeded
/// fallback for wide neurons.
struct EvalMode {
  enum class Kind { FullGrid, Dataset, MonteCarlo };
  Kind kind = Kind::FullGrid;
  int resolution = 1;                            // FullGrid
  std::vector<std::vector<double>> points;       // Dataset
  int samples = 4096;                            // MonteCarlo
  uint64_t seed = 0;                             // MonteCarlo

  static EvalMode full_grid(int n);
  static EvalMode dataset(std::vector<std::vector<double>> pts);
  static EvalMode monte_carlo(int samples = 4096, uint64_t seed = 0);

  /// Materializes the evaluation points for the given arity.
  std::vector<std::vector<double>> sample_points(int arity,
                                                 size_t budget = kDefaultTableBudget) const;
  std::string describe() const;
};

/// Anything scoreable: a truth function of fixed arity.
struct Evaluable {
  int arity = 0;
  std::function<double(const std::vector<double>&)> fn;
};

Evaluable as_evaluable(const Network& net);
Evaluable as_evaluable(FormulaPtr f);

struct SimilarityScore {
  double lambda = 0.0;
  std::string eval_mode;
};

SimilarityScore lambda_similarity(const Evaluable& a, const Evaluable& b, const EvalMode& mode);

/// One application of the rewriting rule: the separated input moves to a
/// two-input outer neuron fed by the remaining inputs' inner neuron. The
/// inner keeps the original weight vector with the separated entry zeroed so
/// input indices stay meaningful; the outer is (separated weight, 1).
struct Decomposition {
  Neuron inner;
  Neuron outer;
  int separated_input = 0;
  int b0 = 0;
  int b1 = 0;
};

/// All integer splits b = b0 + b1 with b1 <= b0 and both sub-neurons
/// non-constant. Requires fan-in >= 3 counting nonzero weights.
std::vector<Decomposition> rule_R_splits(const Neuron& nr, int separated_input);

/// A fully decomposed candidate: a binary Castro network over the original
/// inputs, its extracted formula, and its similarity to the source neuron.
struct Candidate {
  Network net;
  FormulaPtr formula;
  double lambda = 0.0;
  int neuron_count = 0;
  std::string structure;  // canonical text, the final tie-break key
};

inline constexpr int kDefaultBeamWidth = 64;

/// Recursive rule-R closure, deduplicated by evaluation vector, beam-pruned
/// by current similarity to nr. Sorted by (lambda, neuron count, structure).
std::vector<Candidate> decompositions(const Neuron& nr, int beam_width, const EvalMode& mode);
std::vector<Candidate> decompositions(const Neuron& nr, int beam_width = kDefaultBeamWidth,
                                      int resolution = 1);

struct ApproximationResult {
  Candidate best;
  size_t candidates_explored = 0;
  std::vector<double> lambdas;  // per surviving candidate, sorted ascending
};

/// s(alpha): the most similar representable candidate. Representable neurons
/// return themselves with lambda 0.
ApproximationResult best_approximation(const Neuron& nr, const EvalMode& mode,
                                       int beam_width = kDefaultBeamWidth);

struct NeuronReport {
  int layer = 0;
  int index = 0;
  std::string kind;      // conjunction, disjunction, constant0/1, unrepresentable
  FormulaPtr formula;    // over the network inputs
  double lambda = 0.0;   // approximation stress, 0 when representable
  size_t candidates_explored = 0;
};

struct ExtractionReport {
  FormulaPtr formula;
  double lambda = 0.0;  // network vs. extracted formula under the mode
  std::string eval_mode;
  std::vector<NeuronReport> neurons;

  std::string to_json() const;
};

/// Decompiles net, replacing each unrepresentable neuron by its best rule-R
/// approximation. Hidden neurons are scored on their propagated input points
/// (Dataset / MonteCarlo) or on their own fan-in grid (FullGrid).
ExtractionReport extract_with_approximation(const Network& net, const EvalMode& mode,
                                            int beam_width = kDefaultBeamWidth);

}  // namespace luk
