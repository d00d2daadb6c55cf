#include <gtest/gtest.h>

#include <cmath>

#include "rexkit/rexkit.hpp"

using namespace rexkit;
using namespace rexkit::net;

namespace {

/// XOR-like toy set in [0,1]^2.
Dataset toy() {
  std::vector<AttributeSchema> schema = {AttributeSchema::continuous("x"),
                                         AttributeSchema::continuous("y")};
  for (auto& a : schema) a.max = 1.0;
  std::vector<Pattern> ps = {{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0},
                             {{0.1, 0.1}, 0}, {{0.9, 0.1}, 1}};
  return Dataset("toy", schema, {"same", "diff"}, ps);
}

/// Several hidden nodes and some pruned connections.
Network random_net(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t in = 2 + rng.below(4), out = 2 + rng.below(2);
  Network n = init_network(in, out, seed);
  TrainConfig cfg;
  cfg.max_hidden = 4;
  const std::size_t extra = rng.below(3);
  for (std::size_t k = 0; k < extra; ++k) n = grow(n, cfg);
  for (auto& w : n.weights_ih.data) w = rng.uniform(-2, 2);
  for (auto& w : n.weights_ho.data) w = rng.uniform(-2, 2);
  n.mask_ih[0][0] = false;
  n.weights_ih(0, 0) = 0.0;
  return n;
}

double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST(Network, InitShapeAndRange) {
  const auto n = init_network(3, 2, 9);
  EXPECT_EQ(n.hidden_count, 1u);
  EXPECT_EQ(n.weights_ih.rows, 1u);
  EXPECT_EQ(n.weights_ih.cols, 3u);
  EXPECT_EQ(n.weights_ho.rows, 2u);
  for (double w : n.weights_ih.data) EXPECT_LE(std::abs(w), kInitRange);
  for (double w : n.weights_ho.data) EXPECT_LE(std::abs(w), kInitRange);
  EXPECT_TRUE(init_network(3, 2, 9) == n);
  EXPECT_THROW(init_network(0, 2, 9), UsageError);
}

TEST(Network, ForwardMatchesHandComputation) {
  Network n = init_network(2, 1, 1);
  n.weights_ih(0, 0) = 0.5;
  n.weights_ih(0, 1) = -1.0;
  n.bias_h[0] = 0.25;
  n.weights_ho(0, 0) = 2.0;
  n.bias_o[0] = -0.5;
  const std::vector<double> x{1.0, 0.5};
  const double h = 1.0 / (1.0 + std::exp(-(0.5 - 0.5 + 0.25)));
  const double o = 1.0 / (1.0 + std::exp(-(2.0 * h - 0.5)));
  const auto act = forward(n, x);
  EXPECT_NEAR(act.hidden[0], h, 1e-15);
  EXPECT_NEAR(act.outputs[0], o, 1e-15);
}

TEST(Network, MaskedConnectionIgnoresWeight) {
  Network n = init_network(2, 2, 3);
  const std::vector<double> x{0.3, 0.8};
  n.mask_ih[0][1] = false;
  const auto before = forward(n, x).outputs;
  n.weights_ih(0, 1) = 100.0;
  EXPECT_EQ(forward(n, x).outputs, before);
}

TEST(Network, GradientMatchesCentralDifferences) {
  const double eps = 1e-6;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Network n = random_net(seed);
    Rng rng(seed * 31);
    std::vector<double> x(n.input_count), t(n.output_count, 0.0);
    for (auto& v : x) v = rng.unit();
    t[rng.below(n.output_count)] = 1.0;
    const auto g = gradients(n, x, t);

    auto check = [&](double& param, double analytic, bool active) {
      const double saved = param;
      param = saved + eps;
      const double up = pattern_loss(n, x, t);
      param = saved - eps;
      const double down = pattern_loss(n, x, t);
      param = saved;
      const double numeric = active ? (up - down) / (2 * eps) : 0.0;
      if (std::abs(analytic) < 1e-9 && std::abs(numeric) < 1e-9) return;
      EXPECT_LT(relative_error(analytic, numeric), 1e-4) << "seed " << seed;
    };
    for (std::size_t h = 0; h < n.hidden_count; ++h) {
      for (std::size_t i = 0; i < n.input_count; ++i) {
        check(n.weights_ih(h, i), g.weights_ih(h, i), n.mask_ih[h][i]);
      }
      check(n.bias_h[h], g.bias_h[h], true);
    }
    for (std::size_t o = 0; o < n.output_count; ++o) {
      for (std::size_t h = 0; h < n.hidden_count; ++h) {
        check(n.weights_ho(o, h), g.weights_ho(o, h), n.mask_ho[o][h]);
      }
      check(n.bias_o[o], g.bias_o[o], true);
    }
  }
}

TEST(Network, MseIsMeanOverPatternsAndOutputs) {
  const auto d = toy();
  const auto n = init_network(2, 2, 4);
  double total = 0.0;
  for (const auto& p : d.patterns()) {
    const auto t = one_hot(p.label, 2);
    total += 2.0 * pattern_loss(n, p.values, t);
  }
  EXPECT_NEAR(mse(n, d), total / (d.size() * 2), 1e-15);
}

TEST(Network, GrowPreservesExistingWeightsAndCaps) {
  TrainConfig cfg;
  cfg.max_hidden = 2;
  const auto n = init_network(2, 2, 5);
  const auto g = grow(n, cfg);
  EXPECT_EQ(g.hidden_count, 2u);
  EXPECT_EQ(g.weights_ih(0, 0), n.weights_ih(0, 0));
  EXPECT_EQ(g.weights_ho(1, 0), n.weights_ho(1, 0));
  Warnings w;
  const auto capped = grow(g, cfg, &w);
  EXPECT_EQ(capped.hidden_count, 2u);
  EXPECT_FALSE(w.empty());
}

TEST(Network, TrainingLearnsToyAndIsDeterministic) {
  const auto d = toy();
  TrainConfig cfg;
  cfg.max_epochs = 3000;
  Network a = init_network(2, 2, cfg.seed);
  const auto rep = train(a, d, cfg);
  EXPECT_EQ(rep.train_accuracy, 1.0);
  EXPECT_LE(rep.final_mse, mse(init_network(2, 2, cfg.seed), d));
  Network b = init_network(2, 2, cfg.seed);
  train(b, d, cfg);
  EXPECT_TRUE(a == b);
}

TEST(Network, ConfigValidation) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(validate_config(cfg), UsageError);
  cfg = {};
  cfg.momentum = 1.0;
  EXPECT_THROW(validate_config(cfg), UsageError);
  cfg = {};
  cfg.max_hidden = 0;
  EXPECT_THROW(validate_config(cfg), UsageError);
}

TEST(Network, PruneKeepsAccuracyWithinSlack) {
  const auto d = encode_inputs(golf_fixture());
  TrainConfig cfg;
  Network n = init_network(d.attribute_count(), d.class_count(), cfg.seed);
  train(n, d, cfg);
  const auto res = prune(n, d, cfg);
  EXPECT_GE(res.final_accuracy, res.baseline_accuracy - cfg.prune_accuracy_slack);
  std::size_t masked = 0;
  for (const auto& row : res.network.mask_ih) {
    for (bool m : row) masked += !m;
  }
  for (const auto& row : res.network.mask_ho) {
    for (bool m : row) masked += !m;
  }
  EXPECT_EQ(masked, res.connections_pruned);
  for (std::size_t i : res.removed_inputs) {
    for (std::size_t h = 0; h < res.network.hidden_count; ++h) {
      EXPECT_FALSE(res.network.mask_ih[h][i]);
    }
  }
}

TEST(Network, EncodeInputsOneHot) {
  const auto e = encode_inputs(golf_fixture());
  // Outlook (3) + temperature + humidity + wind (2).
  EXPECT_EQ(e.attribute_count(), 7u);
  EXPECT_EQ(e.attribute(0).name, "Outlook=sunny");
  EXPECT_EQ(e[0].values[0], 1.0);
  EXPECT_EQ(e[0].values[1] + e[0].values[2], 0.0);
}

TEST(Network, RejectsCategoricalInput) {
  Network n = init_network(4, 2, 1);
  TrainConfig cfg;
  EXPECT_ANY_THROW(train(n, golf_fixture(), cfg));
}

TEST(Network, JsonRoundTrip) {
  const auto n = random_net(3);
  TrainConfig cfg;
  cfg.seed = 42;
  cfg.learning_rate = 0.2;
  const auto j = nlohmann::json::parse(to_json(n, cfg).dump());
  EXPECT_TRUE(network_from_json(j) == n);
  const auto back = train_config_from_json(j.at("config"));
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.learning_rate, 0.2);
}
