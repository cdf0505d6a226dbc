#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "luk/data.hpp"
#include "luk/rewrite.hpp"

namespace luk {

struct TrainConfig {
  double mu0 = 0.01;
  double beta = 0.1;
  double target_mse = 1e-3;
  int max_iterations = 200;
  int crystallization_exponent = 2;
  int restarts_per_topology = 0;  // 0 = auto: max(4, 2*arity)
  int max_topologies = 4;
  uint64_t rng_seed = 0;
  double degradation_factor = 2.0;  // crystallized mse tolerance vs trained
  double prune_tolerance = 1e-4;
  int beam_width = kDefaultBeamWidth;
  int jobs = 1;
  bool verbose = false;  // accepted-iteration log to stderr
};

TrainConfig train_config_from_json(const std::string& text);

/// Soft crystallization: odd, fixes integers, contracts [k,k+1] toward its
/// endpoints; half-integers are the unstable fixed points.
double smooth_crystallize_value(double w, int n);
Network smooth_crystallize_network(const Network& net, int n);

/// Sum over all weights and biases of the distance to the nearest integer.
double representation_error(const Network& net);

/// Weights to the nearest of {-1,0,1}, biases to the nearest integer; exact
/// halves round toward 0.
Network crisp_crystallize(const Network& net);

double mse(const Network& net, const Dataset& data);

/// Rows = data rows, columns = parameters flattened layer by layer, neuron
/// by neuron, weights before bias. d(output)/d(param) with psi' = 1 on the
/// closed [0,1] and 0 outside.
std::vector<std::vector<double>> jacobian(const Network& net, const Dataset& data);

struct TrainState {
  double f = 0.0;  // e'e at exit
  double train_mse = 0.0;
  double mu = 0.0;
  int iterations = 0;
  bool stalled = false;
};

/// Levenberg-Marquardt with per-iteration soft crystallization: candidate
/// w* = Y_n(w + dw) accepted only when it strictly decreases e'e.
std::pair<Network, TrainState> lm_train(const Network& net, const Dataset& data,
                                        const TrainConfig& cfg);

/// Optimal-brain-surgeon pruning of weights (never biases): repeatedly
/// removes the least-salient weight while mse stays within tolerance of the
/// input network's. Pruned weights are fixed at zero.
Network obs_prune(const Network& net, const Dataset& data, double tolerance);

/// Hidden layer widths for attempt k: (2+k, ceil((2+k)/2), 1); the driver
/// appends a width-1 output layer.
std::vector<int> topology_schedule(int arity, int attempt);

struct AttemptLog {
  int topology = 0;
  int restart = 0;
  double trained_mse = 0.0;
  double crystallized_mse = -1.0;  // -1: never crystallized
  bool accepted = false;
};

struct RevEngOutcome {
  Network best;
  double mse = 0.0;  // recomputed from best, never cached
  ExtractionReport report;
  bool converged = false;
  std::vector<AttemptLog> attempts;
};

/// Algorithm-1 driver: per topology, seeded uniform[-1,1] restarts, each
/// lm_train + crisp crystallization (discarded when crystallizing degrades
/// the fit), then pruning and formula extraction. The first success in
/// (topology, restart) order wins regardless of jobs.
RevEngOutcome reverse_engineer(const Dataset& data, const TrainConfig& cfg);

}  // namespace luk
