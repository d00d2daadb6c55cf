#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rexkit/dataset.hpp"
#include "rexkit/error.hpp"
#include "rexkit/random.hpp"

namespace rexkit::net {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

using Mask = std::vector<std::vector<bool>>;

/**
 * Single-hidden-layer sigmoid network. A connection whose mask entry is
 * false is pruned: it contributes nothing to the forward pass whatever
 * value its weight holds.
 */
struct Network {
  std::size_t input_count = 0;
  std::size_t hidden_count = 0;
  std::size_t output_count = 0;
  Matrix weights_ih;  // hidden x input
  Matrix weights_ho;  // output x hidden
  std::vector<double> bias_h;
  std::vector<double> bias_o;
  Mask mask_ih;  // hidden x input
  Mask mask_ho;  // output x hidden
  std::uint64_t seed = 0;

  friend bool operator==(const Network&, const Network&) = default;
};

struct TrainConfig {
  double learning_rate = 0.3;
  double momentum = 0.7;
  std::size_t max_epochs = 5000;
  double target_mse = 0.01;
  std::size_t stall_window = 50;
  double stall_tolerance = 1e-4;
  std::size_t max_hidden = 5;
  double prune_accuracy_slack = 0.01;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::size_t epochs_run = 0;
  double final_mse = 0.0;
  std::size_t hidden_nodes_added = 0;
  std::size_t connections_pruned = 0;
  std::size_t inputs_removed = 0;
  double train_accuracy = 0.0;
};

struct Activations {
  std::vector<double> hidden;
  std::vector<double> outputs;
};

/// Gradient of the per-pattern loss 0.5 * sum((target - output)^2).
struct Gradients {
  Matrix weights_ih;
  Matrix weights_ho;
  std::vector<double> bias_h;
  std::vector<double> bias_o;
};

inline constexpr double kInitRange = 0.5;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline void validate_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0) || !std::isfinite(cfg.learning_rate)) {
    throw UsageError("learning rate must be positive and finite");
  }
  if (!(cfg.momentum >= 0 && cfg.momentum < 1)) {
    throw UsageError("momentum must lie in [0, 1)");
  }
  if (!(cfg.target_mse >= 0) || !std::isfinite(cfg.target_mse)) {
    throw UsageError("target mse must be non-negative and finite");
  }
  if (!std::isfinite(cfg.stall_tolerance)) {
    throw UsageError("stall tolerance must be finite");
  }
  if (cfg.max_hidden < 1) throw UsageError("max_hidden must be at least 1");
  if (!(cfg.prune_accuracy_slack >= 0 && cfg.prune_accuracy_slack <= 1)) {
    throw UsageError("prune accuracy slack must lie in [0, 1]");
  }
}

namespace detail {

inline Rng node_rng(std::uint64_t seed, std::size_t node) {
  return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (node + 1)));
}

/// Appends one hidden node with weights drawn from [-0.5, 0.5].
inline void append_hidden_node(Network& net) {
  const std::size_t j = net.hidden_count;
  Rng rng = node_rng(net.seed, j);
  Matrix ih(j + 1, net.input_count);
  std::copy(net.weights_ih.data.begin(), net.weights_ih.data.end(),
            ih.data.begin());
  for (std::size_t i = 0; i < net.input_count; ++i) {
    ih(j, i) = rng.uniform(-kInitRange, kInitRange);
  }
  net.bias_h.push_back(rng.uniform(-kInitRange, kInitRange));
  Matrix ho(net.output_count, j + 1);
  for (std::size_t o = 0; o < net.output_count; ++o) {
    for (std::size_t h = 0; h < j; ++h) ho(o, h) = net.weights_ho(o, h);
    ho(o, j) = rng.uniform(-kInitRange, kInitRange);
  }
  net.weights_ih = std::move(ih);
  net.weights_ho = std::move(ho);
  net.mask_ih.emplace_back(net.input_count, true);
  for (auto& row : net.mask_ho) row.push_back(true);
  net.hidden_count = j + 1;
}

inline void require_numeric(const Dataset& data, const Network& net) {
  if (data.attribute_count() != net.input_count) {
    throw UsageError("dataset has " + std::to_string(data.attribute_count()) +
                     " attributes but the network expects " +
                     std::to_string(net.input_count));
  }
  for (const auto& a : data.schema()) {
    if (a.is_categorical()) {
      throw UsageError("attribute '" + a.name +
                       "' is categorical; encode it before training");
    }
  }
  if (data.class_count() != net.output_count) {
    throw UsageError("dataset has " + std::to_string(data.class_count()) +
                     " classes but the network has " +
                     std::to_string(net.output_count) + " outputs");
  }
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

}  // namespace detail

/// One hidden node, every weight uniform in [-0.5, 0.5], all masks set.
inline Network init_network(std::size_t input_count, std::size_t output_count,
                            std::uint64_t seed) {
  if (input_count == 0 || output_count == 0) {
    throw UsageError("a network needs at least one input and one output");
  }
  Network net;
  net.input_count = input_count;
  net.output_count = output_count;
  net.seed = seed;
  net.mask_ho.assign(output_count, {});
  net.weights_ho = Matrix(output_count, 0);
  net.weights_ih = Matrix(0, input_count);
  net.bias_o.resize(output_count);
  Rng rng(seed);
  for (auto& b : net.bias_o) b = rng.uniform(-kInitRange, kInitRange);
  detail::append_hidden_node(net);
  return net;
}

inline Activations forward(const Network& net, std::span<const double> inputs) {
  if (inputs.size() != net.input_count) {
    throw UsageError("forward: expected " + std::to_string(net.input_count) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  Activations act;
  act.hidden.resize(net.hidden_count);
  for (std::size_t h = 0; h < net.hidden_count; ++h) {
    double z = net.bias_h[h];
    for (std::size_t i = 0; i < net.input_count; ++i) {
      if (net.mask_ih[h][i]) z += net.weights_ih(h, i) * inputs[i];
    }
    act.hidden[h] = sigmoid(z);
  }
  act.outputs.resize(net.output_count);
  for (std::size_t o = 0; o < net.output_count; ++o) {
    double z = net.bias_o[o];
    for (std::size_t h = 0; h < net.hidden_count; ++h) {
      if (net.mask_ho[o][h]) z += net.weights_ho(o, h) * act.hidden[h];
    }
    act.outputs[o] = sigmoid(z);
  }
  return act;
}

/// Output layer evaluated on given hidden activations.
inline std::vector<double> output_from_hidden(const Network& net,
                                              std::span<const double> hidden) {
  std::vector<double> out(net.output_count);
  for (std::size_t o = 0; o < net.output_count; ++o) {
    double z = net.bias_o[o];
    for (std::size_t h = 0; h < net.hidden_count; ++h) {
      if (net.mask_ho[o][h]) z += net.weights_ho(o, h) * hidden[h];
    }
    out[o] = sigmoid(z);
  }
  return out;
}

inline std::vector<double> one_hot(std::size_t label, std::size_t n) {
  std::vector<double> t(n, 0.0);
  t[label] = 1.0;
  return t;
}

/// 0.5 * sum over outputs of (target - output)^2.
inline double pattern_loss(const Network& net, std::span<const double> inputs,
                           std::span<const double> target) {
  const auto act = forward(net, inputs);
  double e = 0.0;
  for (std::size_t o = 0; o < net.output_count; ++o) {
    const double d = target[o] - act.outputs[o];
    e += d * d;
  }
  return 0.5 * e;
}

/// Backpropagated gradient of pattern_loss; pruned connections get zero.
inline Gradients gradients(const Network& net, std::span<const double> inputs,
                           std::span<const double> target) {
  const auto act = forward(net, inputs);
  Gradients g{Matrix(net.hidden_count, net.input_count),
              Matrix(net.output_count, net.hidden_count),
              std::vector<double>(net.hidden_count, 0.0),
              std::vector<double>(net.output_count, 0.0)};
  std::vector<double> delta_o(net.output_count);
  for (std::size_t o = 0; o < net.output_count; ++o) {
    const double y = act.outputs[o];
    delta_o[o] = (y - target[o]) * y * (1.0 - y);
    g.bias_o[o] = delta_o[o];
    for (std::size_t h = 0; h < net.hidden_count; ++h) {
      if (net.mask_ho[o][h]) g.weights_ho(o, h) = delta_o[o] * act.hidden[h];
    }
  }
  for (std::size_t h = 0; h < net.hidden_count; ++h) {
    double back = 0.0;
    for (std::size_t o = 0; o < net.output_count; ++o) {
      if (net.mask_ho[o][h]) back += delta_o[o] * net.weights_ho(o, h);
    }
    const double a = act.hidden[h];
    const double delta_h = back * a * (1.0 - a);
    g.bias_h[h] = delta_h;
    for (std::size_t i = 0; i < net.input_count; ++i) {
      if (net.mask_ih[h][i]) g.weights_ih(h, i) = delta_h * inputs[i];
    }
  }
  return g;
}

inline std::size_t predict(const Network& net, std::span<const double> inputs) {
  return detail::argmax(forward(net, inputs).outputs);
}

/// Mean over patterns and outputs of the squared error to one-hot targets.
inline double mse(const Network& net, const Dataset& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : data.patterns()) {
    const auto out = forward(net, p.values).outputs;
    for (std::size_t o = 0; o < net.output_count; ++o) {
      const double d = (o == p.label ? 1.0 : 0.0) - out[o];
      total += d * d;
    }
  }
  return total / static_cast<double>(data.size() * net.output_count);
}

/// Fraction of patterns whose arg-max output (lowest index on ties) is the
/// label. An empty dataset counts as fully correct.
inline double accuracy(const Network& net, const Dataset& data,
                       Warnings* warnings = nullptr) {
  if (data.empty()) {
    warn(warnings, "accuracy of an empty dataset reported as 1.0");
    return 1.0;
  }
  std::size_t hits = 0;
  for (const auto& p : data.patterns()) {
    if (predict(net, p.values) == p.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// Adds one hidden node unless the network is already at max_hidden.
inline Network grow(const Network& net, const TrainConfig& cfg,
                    Warnings* warnings = nullptr) {
  if (net.hidden_count >= cfg.max_hidden) {
    warn(warnings, "hidden layer already at max_hidden (" +
                       std::to_string(cfg.max_hidden) + "); not growing");
    return net;
  }
  Network grown = net;
  detail::append_hidden_node(grown);
  return grown;
}

namespace detail {

struct Momentum {
  Matrix ih, ho;
  std::vector<double> bh, bo;

  explicit Momentum(const Network& net)
      : ih(net.hidden_count, net.input_count),
        ho(net.output_count, net.hidden_count),
        bh(net.hidden_count, 0.0),
        bo(net.output_count, 0.0) {}
};

inline void sgd_step(Network& net, Momentum& m, const Gradients& g,
                     const TrainConfig& cfg) {
  auto step = [&](double& w, double& v, double grad) {
    v = cfg.momentum * v - cfg.learning_rate * grad;
    w += v;
  };
  for (std::size_t h = 0; h < net.hidden_count; ++h) {
    for (std::size_t i = 0; i < net.input_count; ++i) {
      if (net.mask_ih[h][i]) step(net.weights_ih(h, i), m.ih(h, i), g.weights_ih(h, i));
    }
    step(net.bias_h[h], m.bh[h], g.bias_h[h]);
  }
  for (std::size_t o = 0; o < net.output_count; ++o) {
    for (std::size_t h = 0; h < net.hidden_count; ++h) {
      if (net.mask_ho[o][h]) step(net.weights_ho(o, h), m.ho(o, h), g.weights_ho(o, h));
    }
    step(net.bias_o[o], m.bo[o], g.bias_o[o]);
  }
}

/// Per-pattern backpropagation in dataset order for up to `epochs` epochs,
/// optionally growing the hidden layer when the error stalls.
inline TrainReport run_epochs(Network& net, const Dataset& data,
                              const TrainConfig& cfg, std::size_t epochs,
                              bool allow_growth, Warnings* warnings) {
  TrainReport rep;
  Momentum m(net);
  std::vector<std::vector<double>> targets;
  targets.reserve(data.size());
  for (const auto& p : data.patterns()) {
    targets.push_back(one_hot(p.label, net.output_count));
  }
  std::vector<double> history;
  std::size_t last_growth = 0;
  bool capped = false;
  double current = mse(net, data);
  for (std::size_t epoch = 1; epoch <= epochs && current > cfg.target_mse;
       ++epoch) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      sgd_step(net, m, gradients(net, data[i].values, targets[i]), cfg);
    }
    current = mse(net, data);
    rep.epochs_run = epoch;
    if (!std::isfinite(current)) {
      throw TrainingError(epoch, "mean squared error is not finite");
    }
    history.push_back(current);
    const std::size_t since = epoch - last_growth;
    if (allow_growth && !capped && since > cfg.stall_window &&
        current > cfg.target_mse) {
      const double improvement =
          history[history.size() - 1 - cfg.stall_window] - current;
      if (improvement < cfg.stall_tolerance) {
        if (net.hidden_count >= cfg.max_hidden) {
          warn(warnings, "training stalled at max_hidden (" +
                             std::to_string(cfg.max_hidden) + ") hidden nodes");
          capped = true;
        } else {
          net = grow(net, cfg, warnings);
          m = Momentum(net);
          ++rep.hidden_nodes_added;
          last_growth = epoch;
        }
      }
    }
  }
  rep.final_mse = current;
  return rep;
}

}  // namespace detail

/**
 * Trains in place by per-pattern backpropagation with momentum, starting a
 * new hidden node whenever the error has improved by less than
 * stall_tolerance over the last stall_window epochs.
 */
inline TrainReport train(Network& net, const Dataset& data,
                         const TrainConfig& cfg, Warnings* warnings = nullptr) {
  validate_config(cfg);
  detail::require_numeric(data, net);
  if (data.empty()) throw UsageError("cannot train on an empty dataset");
  TrainReport rep =
      detail::run_epochs(net, data, cfg, cfg.max_epochs, true, warnings);
  rep.train_accuracy = accuracy(net, data);
  return rep;
}

struct PruneResult {
  Network network;
  double baseline_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::size_t connections_pruned = 0;
  std::vector<std::size_t> removed_inputs;
};

/**
 * Masks the smallest-magnitude active connection, retrains for
 * max_epochs / 10 epochs, and keeps the result if training accuracy stays
 * within prune_accuracy_slack of the starting accuracy. Otherwise the
 * connection is restored and never tried again.
 */
inline PruneResult prune(const Network& trained, const Dataset& data,
                         const TrainConfig& cfg, Warnings* warnings = nullptr) {
  validate_config(cfg);
  detail::require_numeric(data, trained);
  PruneResult res;
  res.network = trained;
  res.baseline_accuracy = accuracy(trained, data, warnings);
  const double floor = res.baseline_accuracy - cfg.prune_accuracy_slack;
  const std::size_t retrain_epochs = cfg.max_epochs / 10;

  Network& net = res.network;
  Mask keep_ih(net.hidden_count, std::vector<bool>(net.input_count, false));
  Mask keep_ho(net.output_count, std::vector<bool>(net.hidden_count, false));
  for (;;) {
    // Smallest |w| among active, not-yet-rejected connections; ties go to
    // input-to-hidden first, then row-major order.
    std::optional<std::pair<bool, std::pair<std::size_t, std::size_t>>> pick;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < net.hidden_count; ++h) {
      for (std::size_t i = 0; i < net.input_count; ++i) {
        if (net.mask_ih[h][i] && !keep_ih[h][i] &&
            std::abs(net.weights_ih(h, i)) < best) {
          best = std::abs(net.weights_ih(h, i));
          pick = {true, {h, i}};
        }
      }
    }
    for (std::size_t o = 0; o < net.output_count; ++o) {
      for (std::size_t h = 0; h < net.hidden_count; ++h) {
        if (net.mask_ho[o][h] && !keep_ho[o][h] &&
            std::abs(net.weights_ho(o, h)) < best) {
          best = std::abs(net.weights_ho(o, h));
          pick = {false, {o, h}};
        }
      }
    }
    if (!pick) break;
    const auto [input_side, rc] = *pick;
    const auto [r, c] = rc;

    Network trial = net;
    if (input_side) {
      trial.mask_ih[r][c] = false;
      trial.weights_ih(r, c) = 0.0;
    } else {
      trial.mask_ho[r][c] = false;
      trial.weights_ho(r, c) = 0.0;
    }
    TrainConfig brief = cfg;
    brief.target_mse = 0.0;
    detail::run_epochs(trial, data, brief, retrain_epochs, false, warnings);
    if (accuracy(trial, data) >= floor) {
      net = std::move(trial);
      ++res.connections_pruned;
    } else if (input_side) {
      keep_ih[r][c] = true;
    } else {
      keep_ho[r][c] = true;
    }
  }
  for (std::size_t i = 0; i < net.input_count; ++i) {
    bool any = false;
    for (std::size_t h = 0; h < net.hidden_count; ++h) any = any || net.mask_ih[h][i];
    if (!any) res.removed_inputs.push_back(i);
  }
  res.final_accuracy = accuracy(net, data, warnings);
  return res;
}

/**
 * Numeric view of a dataset for the network: continuous attributes
 * normalized into [0,1], each categorical attribute expanded into one 0/1
 * column per symbol (named "<attr>=<symbol>").
 */
inline Dataset encode_inputs(const Dataset& data, Warnings* warnings = nullptr) {
  const Dataset norm = normalize(data, warnings);
  std::vector<AttributeSchema> schema;
  for (const auto& a : norm.schema()) {
    if (!a.is_categorical()) {
      schema.push_back(a);
      continue;
    }
    for (const auto& sym : a.symbols) {
      auto col = AttributeSchema::continuous(a.name + "=" + sym);
      col.max = 1.0;
      col.normalized = true;
      schema.push_back(col);
    }
  }
  std::vector<Pattern> patterns;
  patterns.reserve(norm.size());
  for (const auto& p : norm.patterns()) {
    Pattern q;
    q.label = p.label;
    for (std::size_t a = 0; a < norm.attribute_count(); ++a) {
      const auto& attr = norm.attribute(a);
      if (!attr.is_categorical()) {
        q.values.push_back(p.values[a]);
        continue;
      }
      for (std::size_t s = 0; s < attr.symbols.size(); ++s) {
        q.values.push_back(static_cast<double>(s) == p.values[a] ? 1.0 : 0.0);
      }
    }
    patterns.push_back(std::move(q));
  }
  return Dataset(data.name(), std::move(schema), data.classes(),
                 std::move(patterns));
}

// ---------------------------------------------------------------------------
// JSON checkpoint

inline nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"momentum", cfg.momentum},
          {"max_epochs", cfg.max_epochs},
          {"target_mse", cfg.target_mse},
          {"stall_window", cfg.stall_window},
          {"stall_tolerance", cfg.stall_tolerance},
          {"max_hidden", cfg.max_hidden},
          {"prune_accuracy_slack", cfg.prune_accuracy_slack},
          {"seed", cfg.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.momentum = j.at("momentum").get<double>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.target_mse = j.at("target_mse").get<double>();
  c.stall_window = j.at("stall_window").get<std::size_t>();
  c.stall_tolerance = j.at("stall_tolerance").get<double>();
  c.max_hidden = j.at("max_hidden").get<std::size_t>();
  c.prune_accuracy_slack = j.at("prune_accuracy_slack").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::ordered_json to_json(const Network& net,
                                      const TrainConfig& cfg) {
  auto rows = [](const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows, std::vector<double>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
    }
    return out;
  };
  return {{"input_count", net.input_count},
          {"hidden_count", net.hidden_count},
          {"output_count", net.output_count},
          {"seed", net.seed},
          {"weights_ih", rows(net.weights_ih)},
          {"weights_ho", rows(net.weights_ho)},
          {"bias_h", net.bias_h},
          {"bias_o", net.bias_o},
          {"mask_ih", net.mask_ih},
          {"mask_ho", net.mask_ho},
          {"config", to_json(cfg)}};
}

inline Network network_from_json(const nlohmann::json& j) {
  try {
    Network net;
    net.input_count = j.at("input_count").get<std::size_t>();
    net.hidden_count = j.at("hidden_count").get<std::size_t>();
    net.output_count = j.at("output_count").get<std::size_t>();
    net.seed = j.at("seed").get<std::uint64_t>();
    auto matrix = [](const nlohmann::json& jm, std::size_t r, std::size_t c) {
      Matrix m(r, c);
      if (jm.size() != r) throw DataError("matrix row count mismatch");
      for (std::size_t i = 0; i < r; ++i) {
        if (jm[i].size() != c) throw DataError("matrix column count mismatch");
        for (std::size_t k = 0; k < c; ++k) m(i, k) = jm[i][k].get<double>();
      }
      return m;
    };
    net.weights_ih = matrix(j.at("weights_ih"), net.hidden_count, net.input_count);
    net.weights_ho = matrix(j.at("weights_ho"), net.output_count, net.hidden_count);
    net.bias_h = j.at("bias_h").get<std::vector<double>>();
    net.bias_o = j.at("bias_o").get<std::vector<double>>();
    net.mask_ih = j.at("mask_ih").get<Mask>();
    net.mask_ho = j.at("mask_ho").get<Mask>();
    const bool shapes_ok =
        net.hidden_count >= 1 && net.bias_h.size() == net.hidden_count &&
        net.bias_o.size() == net.output_count &&
        net.mask_ih.size() == net.hidden_count &&
        net.mask_ho.size() == net.output_count &&
        std::all_of(net.mask_ih.begin(), net.mask_ih.end(),
                    [&](const auto& r) { return r.size() == net.input_count; }) &&
        std::all_of(net.mask_ho.begin(), net.mask_ho.end(),
                    [&](const auto& r) { return r.size() == net.hidden_count; });
    if (!shapes_ok) throw DataError("network shapes are inconsistent");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network document: ") + e.what());
  }
}

}  // namespace rexkit::net
