#include "luk/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

namespace luk {

TrainConfig train_config_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  TrainConfig c;
  c.mu0 = doc.value("mu0", c.mu0);
  c.beta = doc.value("beta", c.beta);
  c.target_mse = doc.value("target_mse", c.target_mse);
  c.max_iterations = doc.value("max_iterations", c.max_iterations);
  c.crystallization_exponent = doc.value("crystallization_exponent", c.crystallization_exponent);
  c.restarts_per_topology = doc.value("restarts_per_topology", c.restarts_per_topology);
  c.max_topologies = doc.value("max_topologies", c.max_topologies);
  c.rng_seed = doc.value("rng_seed", c.rng_seed);
  c.degradation_factor = doc.value("degradation_factor", c.degradation_factor);
  c.prune_tolerance = doc.value("prune_tolerance", c.prune_tolerance);
  c.beam_width = doc.value("beam_width", c.beam_width);
  c.jobs = doc.value("jobs", c.jobs);
  if (c.beta <= 0 || c.beta >= 1) throw std::invalid_argument("beta must be in (0,1)");
  if (c.mu0 <= 0) throw std::invalid_argument("mu0 must be positive");
  if (c.target_mse <= 0) throw std::invalid_argument("target_mse must be positive");
  return c;
}

// ---------------------------------------------------------------------------
// Crystallization.

double smooth_crystallize_value(double w, int n) {
  if (n < 1) throw std::invalid_argument("crystallization exponent must be >= 1");
  double a = std::abs(w);
  double fl = std::floor(a);
  double frac = a - fl;
  if (frac == 0.0) return w;  // integers are exact fixed points
  double v = std::pow(std::cos((1.0 - frac) * M_PI / 2.0), n) + fl;
  return w < 0 ? -v : v;
}

Network smooth_crystallize_network(const Network& net, int n) {
  Network out = net;
  for (Layer& layer : out.layers)
    for (Neuron& nr : layer.neurons) {
      for (double& w : nr.weights) w = smooth_crystallize_value(w, n);
      nr.bias = smooth_crystallize_value(nr.bias, n);
    }
  return out;
}

namespace {

double nearest_int_distance(double w) { return std::abs(w - std::round(w)); }

/// Nearest integer with exact halves pulled toward zero.
double round_toward_zero_on_ties(double w) {
  double lo = std::floor(w), hi = std::ceil(w);
  double dlo = w - lo, dhi = hi - w;
  if (dlo < dhi) return lo;
  if (dhi < dlo) return hi;
  return std::abs(lo) <= std::abs(hi) ? lo : hi;
}

}  // namespace

double representation_error(const Network& net) {
  double d = 0.0;
  for (const Layer& layer : net.layers)
    for (const Neuron& nr : layer.neurons) {
      for (double w : nr.weights) d += nearest_int_distance(w);
      d += nearest_int_distance(nr.bias);
    }
  return d;
}

Network crisp_crystallize(const Network& net) {
  Network out = net;
  for (Layer& layer : out.layers)
    for (Neuron& nr : layer.neurons) {
      for (double& w : nr.weights)
        w = std::clamp(round_toward_zero_on_ties(w), -1.0, 1.0);
      nr.bias = round_toward_zero_on_ties(nr.bias);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Errors and derivatives.

double mse(const Network& net, const Dataset& data) {
  if (data.rows.empty()) throw std::invalid_argument("empty dataset");
  double s = 0.0;
  for (size_t r = 0; r < data.rows.size(); ++r) {
    double e = net.forward(data.rows[r]) - data.targets[r];
    s += e * e;
  }
  return s / static_cast<double>(data.rows.size());
}

namespace {

std::vector<double> flatten(const Network& net) {
  std::vector<double> w;
  for (const Layer& layer : net.layers)
    for (const Neuron& nr : layer.neurons) {
      w.insert(w.end(), nr.weights.begin(), nr.weights.end());
      w.push_back(nr.bias);
    }
  return w;
}

void unflatten(Network& net, const std::vector<double>& w) {
  size_t k = 0;
  for (Layer& layer : net.layers)
    for (Neuron& nr : layer.neurons) {
      for (double& x : nr.weights) x = w[k++];
      nr.bias = w[k++];
    }
}

/// true at positions holding a weight (not a bias) in flatten() order.
std::vector<bool> weight_mask(const Network& net) {
  std::vector<bool> m;
  for (const Layer& layer : net.layers)
    for (const Neuron& nr : layer.neurons) {
      m.insert(m.end(), nr.weights.size(), true);
      m.push_back(false);
    }
  return m;
}

inline double dpsi(double z) { return (z >= 0.0 && z <= 1.0) ? 1.0 : 0.0; }

/// d(output)/d(param) for one input row, written into `row`.
void jacobian_row(const Network& net, const std::vector<double>& x, double* row) {
  size_t layer_count = net.layers.size();
  std::vector<std::vector<double>> acts(layer_count + 1), pre(layer_count);
  acts[0] = x;
  for (size_t l = 0; l < layer_count; ++l) {
    const Layer& layer = net.layers[l];
    pre[l].resize(layer.neurons.size());
    acts[l + 1].resize(layer.neurons.size());
    for (size_t j = 0; j < layer.neurons.size(); ++j) {
      pre[l][j] = layer.neurons[j].pre_activation(acts[l]);
      acts[l + 1][j] = activate(pre[l][j]);
    }
  }
  // delta[l][j] = d(output)/d(pre-activation of neuron j in layer l).
  std::vector<std::vector<double>> delta(layer_count);
  delta[layer_count - 1] = {dpsi(pre[layer_count - 1][0])};
  for (size_t l = layer_count - 1; l-- > 0;) {
    const Layer& next = net.layers[l + 1];
    delta[l].assign(net.layers[l].neurons.size(), 0.0);
    for (size_t i = 0; i < delta[l].size(); ++i) {
      double s = 0.0;
      for (size_t j = 0; j < next.neurons.size(); ++j)
        s += delta[l + 1][j] * next.neurons[j].weights[i];
      delta[l][i] = dpsi(pre[l][i]) * s;
    }
  }
  size_t k = 0;
  for (size_t l = 0; l < layer_count; ++l)
    for (size_t j = 0; j < net.layers[l].neurons.size(); ++j) {
      for (size_t i = 0; i < net.layers[l].neurons[j].weights.size(); ++i)
        row[k++] = delta[l][j] * acts[l][i];
      row[k++] = delta[l][j];
    }
}

}  // namespace

std::vector<std::vector<double>> jacobian(const Network& net, const Dataset& data) {
  size_t p = net.parameter_count();
  std::vector<std::vector<double>> J(data.rows.size(), std::vector<double>(p));
  for (size_t r = 0; r < data.rows.size(); ++r)
    jacobian_row(net, data.rows[r], J[r].data());
  return J;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt with soft crystallization.

std::pair<Network, TrainState> lm_train(const Network& net, const Dataset& data,
                                        const TrainConfig& cfg) {
  if (cfg.beta <= 0 || cfg.beta >= 1) throw std::invalid_argument("beta must be in (0,1)");
  if (cfg.mu0 <= 0) throw std::invalid_argument("mu0 must be positive");
  const int kMaxRetries = 20;
  const double kMuOverflow = 1e12;
  const size_t rows = data.rows.size();
  if (rows == 0) throw std::invalid_argument("empty dataset");
  const size_t p = net.parameter_count();

  Network cur = net;
  std::vector<bool> is_weight = weight_mask(cur);
  TrainState st;
  st.mu = cfg.mu0;

  auto residuals = [&](const Network& n) {
    Eigen::VectorXd e(rows);
    for (size_t r = 0; r < rows; ++r)
      e(r) = n.forward(data.rows[r]) - data.targets[r];
    return e;
  };

  Eigen::VectorXd e = residuals(cur);
  double f = e.squaredNorm();
  while (st.iterations < cfg.max_iterations) {
    if (f / rows <= cfg.target_mse) break;

    Eigen::MatrixXd J(rows, p);
    {
      std::vector<double> tmp(p);
      for (size_t r = 0; r < rows; ++r) {
        jacobian_row(cur, data.rows[r], tmp.data());
        for (size_t q = 0; q < p; ++q) J(r, q) = tmp[q];
      }
    }
    Eigen::MatrixXd a0 = J.transpose() * J;
    Eigen::VectorXd g = J.transpose() * e;

    bool accepted = false;
    for (int retry = 0; retry <= kMaxRetries; ++retry) {
      Eigen::MatrixXd a = a0;
      a.diagonal() += st.mu * a0.diagonal();
      a.diagonal().array() += 1e-8;
      Eigen::VectorXd dw = a.ldlt().solve(-g);
      std::vector<double> raw = flatten(cur);
      for (size_t q = 0; q < p; ++q) {
        double v = raw[q] + dw(q);
        if (is_weight[q]) v = std::clamp(v, -1.5, 1.5);
        raw[q] = v;
      }
      std::vector<double> soft = raw;
      for (double& v : soft) v = smooth_crystallize_value(v, cfg.crystallization_exponent);
      // Prefer the crystallized candidate; fall back to the raw step when
      // only that one still decreases F, so crystallization drag can never
      // stall an otherwise productive iteration.
      for (const auto& w : {soft, raw}) {
        Network cand = cur;
        unflatten(cand, w);
        Eigen::VectorXd ec = residuals(cand);
        double fc = ec.squaredNorm();
        if (fc < f) {
          cur = std::move(cand);
          e = std::move(ec);
          f = fc;
          st.mu *= cfg.beta;
          accepted = true;
          break;
        }
      }
      if (accepted) break;
      st.mu /= cfg.beta;
      if (st.mu > kMuOverflow) break;
    }
    if (!accepted) {
      st.stalled = true;
      break;
    }
    ++st.iterations;
    if (cfg.verbose)
      std::fprintf(stderr, "%d, %.8g, %.3g, %.6g\n", st.iterations, f / rows, st.mu,
                   representation_error(cur));
  }
  st.f = f;
  st.train_mse = f / rows;
  return {cur, st};
}

// ---------------------------------------------------------------------------
// Optimal brain surgeon.

Network obs_prune(const Network& net, const Dataset& data, double tolerance) {
  Network cur = net;
  const size_t p = cur.parameter_count();
  std::vector<bool> is_weight = weight_mask(cur);
  std::vector<bool> pruned(p, false);
  const double base = mse(cur, data);
  const size_t rows = data.rows.size();

  while (true) {
    std::vector<double> w = flatten(cur);
    Eigen::MatrixXd J(rows, p);
    {
      std::vector<double> tmp(p);
      for (size_t r = 0; r < rows; ++r) {
        jacobian_row(cur, data.rows[r], tmp.data());
        for (size_t q = 0; q < p; ++q) J(r, q) = tmp[q];
      }
    }
    Eigen::MatrixXd h = J.transpose() * J;
    h.diagonal().array() += 1e-8;
    Eigen::MatrixXd hinv = h.inverse();

    int best_q = -1;
    double best_s = std::numeric_limits<double>::infinity();
    for (size_t q = 0; q < p; ++q) {
      if (!is_weight[q] || pruned[q] || w[q] == 0.0) continue;
      double s = w[q] * w[q] / (2.0 * hinv(q, q));
      if (s < best_s) {
        best_s = s;
        best_q = static_cast<int>(q);
      }
    }
    if (best_q < 0) break;

    Eigen::VectorXd dw = -(w[best_q] / hinv(best_q, best_q)) * hinv.col(best_q);
    std::vector<double> w2 = w;
    for (size_t q = 0; q < p; ++q) w2[q] += dw(q);
    w2[best_q] = 0.0;
    for (size_t q = 0; q < p; ++q)
      if (pruned[q]) w2[q] = 0.0;
    Network cand = cur;
    unflatten(cand, w2);
    if (mse(cand, data) > base + tolerance) break;
    pruned[best_q] = true;
    cur = std::move(cand);
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Reverse engineering driver.

std::vector<int> topology_schedule(int arity, int attempt) {
  (void)arity;
  if (attempt < 0) throw std::invalid_argument("attempt must be >= 0");
  int h = 2 + attempt;
  return {h, (h + 1) / 2, 1};
}

namespace {

Network random_network(int arity, const std::vector<int>& widths, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Network net;
  net.arity = arity;
  int prev = arity;
  for (int width : widths) {
    Layer layer;
    for (int j = 0; j < width; ++j) {
      Neuron nr;
      nr.weights.resize(prev);
      for (double& w : nr.weights) w = u(rng);
      nr.bias = u(rng);
      layer.neurons.push_back(std::move(nr));
    }
    prev = width;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

struct Attempt {
  bool success = false;
  Network net;       // crystallized (and possibly pruned) when success
  double net_mse = 0.0;
  Network crystallized;  // always set, fallback material
  double crystallized_mse = 0.0;
  AttemptLog log;
};

Attempt run_attempt(const Dataset& data, const TrainConfig& cfg, int topo, int restart) {
  Attempt a;
  a.log.topology = topo;
  a.log.restart = restart;
  std::vector<int> widths = topology_schedule(data.arity(), topo);
  std::seed_seq seq{static_cast<uint32_t>(cfg.rng_seed), static_cast<uint32_t>(cfg.rng_seed >> 32),
                    static_cast<uint32_t>(topo), static_cast<uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  Network init = random_network(data.arity(), widths, rng);
  auto [trained, st] = lm_train(init, data, cfg);
  a.log.trained_mse = st.train_mse;
  // The fixed identity output layer is appended after training; training it
  // would add a fourth saturating layer and mostly dead gradients.
  trained.layers.push_back(Layer{{Neuron{{1.0}, 0.0}}});

  a.crystallized = crisp_crystallize(trained);
  a.crystallized_mse = mse(a.crystallized, data);
  if (st.train_mse > cfg.target_mse) return a;
  a.log.crystallized_mse = a.crystallized_mse;
  if (a.crystallized_mse > std::max(cfg.target_mse, cfg.degradation_factor * st.train_mse))
    return a;

  a.net = a.crystallized;
  a.net_mse = a.crystallized_mse;
  // Pruning must not spoil the crystallized fit; it re-crystallizes because
  // the surgeon's compensation step moves surviving weights off-integer.
  Network pruned = crisp_crystallize(obs_prune(a.net, data, cfg.prune_tolerance));
  double pruned_mse = mse(pruned, data);
  if (pruned_mse <= std::max(cfg.target_mse, a.net_mse)) {
    a.net = std::move(pruned);
    a.net_mse = pruned_mse;
  }
  a.success = true;
  a.log.accepted = true;
  return a;
}

}  // namespace

RevEngOutcome reverse_engineer(const Dataset& data, const TrainConfig& cfg) {
  if (data.rows.empty()) throw std::invalid_argument("empty dataset");
  int restarts = cfg.restarts_per_topology > 0 ? cfg.restarts_per_topology
                                               : std::max(4, 2 * data.arity());
  RevEngOutcome out;
  bool have_fallback = false;
  double fallback_mse = std::numeric_limits<double>::infinity();

  for (int topo = 0; topo < cfg.max_topologies && !out.converged; ++topo) {
    std::vector<Attempt> results;
    if (cfg.jobs <= 1) {
      for (int r = 0; r < restarts; ++r) {
        results.push_back(run_attempt(data, cfg, topo, r));
        if (results.back().success) break;  // first in order wins anyway
      }
    } else {
      results.resize(restarts);
      std::atomic<int> next{0};
      auto worker = [&] {
        for (int r = next.fetch_add(1); r < restarts; r = next.fetch_add(1))
          results[r] = run_attempt(data, cfg, topo, r);
      };
      std::vector<std::thread> pool;
      int n = std::min(cfg.jobs, restarts);
      pool.reserve(n);
      for (int i = 0; i < n; ++i) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (const Attempt& a : results) {
      if (a.crystallized.layers.empty()) continue;  // unreached slot
      out.attempts.push_back(a.log);
      if (!out.converged && a.success) {
        out.best = a.net;
        out.converged = true;
      } else if (!have_fallback || a.crystallized_mse < fallback_mse) {
        out.best = a.crystallized;
        fallback_mse = a.crystallized_mse;
        have_fallback = true;
      }
      if (out.converged) break;
    }
  }
  out.mse = mse(out.best, data);
  out.report = extract_with_approximation(out.best, EvalMode::dataset(data.rows),
                                          cfg.beam_width);
  return out;
}

}  // namespace luk
