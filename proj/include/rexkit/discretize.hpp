#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "rexkit/dataset.hpp"
#include "rexkit/network.hpp"

namespace rexkit::disc {

struct Cluster {
  double representative = 0.0;  // mean of the members
  double lo = 0.0;              // smallest member
  double hi = 0.0;              // largest member
  std::size_t size = 0;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Per hidden node, ascending clusters of that node's activation values.
struct ClusterTable {
  double delta = 0.0;
  std::vector<std::vector<Cluster>> nodes;

  /// Index of the nearest representative; the lower one on ties.
  std::size_t assign(std::size_t node, double value) const {
    const auto& cs = nodes.at(node);
    std::size_t best = 0;
    double best_d = std::abs(value - cs[0].representative);
    for (std::size_t k = 1; k < cs.size(); ++k) {
      const double d = std::abs(value - cs[k].representative);
      if (d < best_d) {
        best = k;
        best_d = d;
      }
    }
    return best;
  }

  friend bool operator==(const ClusterTable&, const ClusterTable&) = default;
};

/**
 * One-pass clustering of sorted values: a value joins the open cluster when
 * it lies within delta of that cluster's first member, otherwise it opens a
 * new cluster.
 */
inline std::vector<Cluster> cluster_values(std::vector<double> values,
                                           double delta) {
  if (!(delta > 0)) throw UsageError("cluster radius must be positive");
  std::sort(values.begin(), values.end());
  std::vector<Cluster> out;
  double sum = 0.0;
  for (double v : values) {
    if (out.empty() || v - out.back().lo > delta) {
      if (!out.empty()) out.back().representative = sum / out.back().size;
      out.push_back({v, v, v, 0});
      sum = 0.0;
    }
    out.back().hi = v;
    ++out.back().size;
    sum += v;
  }
  if (!out.empty()) out.back().representative = sum / out.back().size;
  return out;
}

/// 0.05, 0.10, ..., 1.00
inline std::vector<double> default_delta_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

inline std::vector<std::vector<double>> hidden_activations(
    const net::Network& network, const Dataset& data) {
  std::vector<std::vector<double>> acts;
  acts.reserve(data.size());
  for (const auto& p : data.patterns()) {
    acts.push_back(net::forward(network, p.values).hidden);
  }
  return acts;
}

inline ClusterTable build_table(const std::vector<std::vector<double>>& acts,
                                std::size_t hidden_count, double delta) {
  ClusterTable t;
  t.delta = delta;
  for (std::size_t h = 0; h < hidden_count; ++h) {
    std::vector<double> column;
    column.reserve(acts.size());
    for (const auto& a : acts) column.push_back(a[h]);
    t.nodes.push_back(cluster_values(std::move(column), delta));
  }
  return t;
}

/// Hidden activations replaced by their cluster representatives.
inline std::vector<double> discretized_hidden(const ClusterTable& table,
                                              const std::vector<double>& hidden) {
  std::vector<double> rep(hidden.size());
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    rep[h] = table.nodes[h][table.assign(h, hidden[h])].representative;
  }
  return rep;
}

inline std::size_t discretized_prediction(const net::Network& network,
                                          const ClusterTable& table,
                                          const std::vector<double>& hidden) {
  const auto out =
      net::output_from_hidden(network, discretized_hidden(table, hidden));
  return static_cast<std::size_t>(std::max_element(out.begin(), out.end()) -
                                  out.begin());
}

/// Agreement between discretized and continuous network predictions.
inline double fidelity(const net::Network& network, const Dataset& data,
                       const ClusterTable& table) {
  if (data.empty()) return 1.0;
  std::size_t agree = 0;
  for (const auto& p : data.patterns()) {
    const auto act = net::forward(network, p.values);
    const auto direct = static_cast<std::size_t>(
        std::max_element(act.outputs.begin(), act.outputs.end()) -
        act.outputs.begin());
    if (discretized_prediction(network, table, act.hidden) == direct) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(data.size());
}

/**
 * Largest grid radius whose discretized network classifies every training
 * pattern exactly as the continuous network does; the smallest grid radius
 * when none does.
 */
inline ClusterTable select_delta(const net::Network& network,
                                 const Dataset& data,
                                 std::vector<double> grid = default_delta_grid()) {
  if (grid.empty()) throw UsageError("delta grid is empty");
  std::sort(grid.begin(), grid.end());
  const auto acts = hidden_activations(network, data);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    ClusterTable t = build_table(acts, network.hidden_count, *it);
    if (fidelity(network, data, t) == 1.0) return t;
  }
  return build_table(acts, network.hidden_count, grid.front());
}

/**
 * Hidden-layer view of the data: attribute H_j holds the cluster index of
 * hidden node j, the label is the class the network predicts from the
 * cluster representatives.
 */
inline Dataset discretize_dataset(const net::Network& network,
                                  const Dataset& data,
                                  const ClusterTable& table) {
  std::vector<AttributeSchema> schema;
  for (std::size_t h = 0; h < table.nodes.size(); ++h) {
    std::vector<std::string> symbols;
    for (std::size_t k = 0; k < table.nodes[h].size(); ++k) {
      symbols.push_back("c" + std::to_string(k));
    }
    schema.push_back(
        AttributeSchema::categorical("H_" + std::to_string(h + 1), symbols));
  }
  std::vector<Pattern> patterns;
  patterns.reserve(data.size());
  for (const auto& p : data.patterns()) {
    const auto hidden = net::forward(network, p.values).hidden;
    Pattern q;
    for (std::size_t h = 0; h < hidden.size(); ++h) {
      q.values.push_back(static_cast<double>(table.assign(h, hidden[h])));
    }
    q.label = discretized_prediction(network, table, hidden);
    patterns.push_back(std::move(q));
  }
  return Dataset(data.name(), std::move(schema), data.classes(),
                 std::move(patterns));
}

inline nlohmann::ordered_json to_json(const ClusterTable& t) {
  nlohmann::ordered_json j;
  j["delta"] = t.delta;
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& cs : t.nodes) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : cs) {
      arr.push_back({{"representative", c.representative},
                     {"lo", c.lo},
                     {"hi", c.hi},
                     {"size", c.size}});
    }
    nodes.push_back({{"clusters", std::move(arr)}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

inline ClusterTable cluster_table_from_json(const nlohmann::json& j) {
  try {
    ClusterTable t;
    t.delta = j.at("delta").get<double>();
    for (const auto& jn : j.at("nodes")) {
      std::vector<Cluster> cs;
      for (const auto& jc : jn.at("clusters")) {
        cs.push_back({jc.at("representative").get<double>(),
                      jc.at("lo").get<double>(), jc.at("hi").get<double>(),
                      jc.at("size").get<std::size_t>()});
      }
      t.nodes.push_back(std::move(cs));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed cluster table: ") + e.what());
  }
}

}  // namespace rexkit::disc
