#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rexkit/dataset.hpp"
#include "rexkit/discretize.hpp"
#include "rexkit/error.hpp"
#include "rexkit/network.hpp"
#include "rexkit/rex.hpp"

namespace rexkit::pipeline {

enum class Mode { Direct, Reann };

inline const char* to_string(Mode m) {
  return m == Mode::Direct ? "direct" : "reann";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "direct") return Mode::Direct;
  if (s == "reann") return Mode::Reann;
  throw UsageError("unknown mode '" + s + "' (expected direct or reann)");
}

struct PipelineConfig {
  Mode mode = Mode::Direct;
  net::TrainConfig train;
  rex::ExtractConfig extract;
  std::vector<double> delta_grid = disc::default_delta_grid();
  // Rules are evaluated on the data they were built from unless a holdout
  // fraction is requested.
  double test_fraction = 0.0;
  std::uint64_t split_seed = 1;
};

/**
 * Settings used to reproduce the reference rule counts: rules that alone
 * explain fewer than 1% of the training patterns are dropped as noise, and
 * the 699-pattern breast-cancer set uses greedy search.
 */
inline PipelineConfig benchmark_config(const std::string& dataset_name) {
  PipelineConfig cfg;
  cfg.extract.noise_min_fraction = 0.01;
  if (dataset_name == "breast-cancer") {
    cfg.extract.search = rex::SearchMode::Greedy;
  }
  return cfg;
}

struct EvalReport {
  std::string dataset;
  std::size_t rule_count_excl_default = 0;
  std::size_t rule_count_incl_default = 0;
  double avg_conditions_per_rule = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  std::optional<double> fidelity_to_network;
  double inconsistency_rate = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Intermediate products of a run, kept for inspection and checkpointing.
struct Artifacts {
  std::optional<net::Network> network;
  std::optional<net::TrainReport> train_report;
  std::optional<disc::ClusterTable> clusters;
  std::optional<double> discretization_fidelity;
  std::optional<rex::RuleSet> hidden_rules;
  rex::ClusterRuleMap input_rules;
  std::optional<Dataset> encoded_train;  // network view of the training set
};

struct RunResult {
  rex::RuleSet rules;
  EvalReport report;
  Artifacts artifacts;
  net::TrainConfig train_config;
};

/// Ground-truth accuracy of the rules on train (and test when non-empty).
inline EvalReport evaluate(const rex::RuleSet& rs, const Dataset& train,
                           const Dataset& test,
                           std::optional<double> fidelity = std::nullopt) {
  EvalReport r;
  r.dataset = train.name();
  r.rule_count_excl_default = rs.rule_count();
  r.rule_count_incl_default = rs.rule_count_including_default();
  if (!rs.rules.empty()) {
    std::size_t conds = 0;
    for (const auto& rule : rs.rules) conds += rule.conditions.size();
    r.avg_conditions_per_rule =
        static_cast<double>(conds) / static_cast<double>(rs.rules.size());
  }
  r.train_accuracy = rex::accuracy(rs, train);
  if (!test.empty()) r.test_accuracy = rex::accuracy(rs, test);
  r.fidelity_to_network = fidelity;
  r.inconsistency_rate = inconsistency_rate(train);
  return r;
}

/// Agreement between rule predictions on `raw` and network predictions on
/// the same patterns in encoded form.
inline double rule_fidelity(const rex::RuleSet& rs, const Dataset& raw,
                            const net::Network& network, const Dataset& encoded) {
  if (raw.empty()) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (rex::classify(rs, raw[i]) == net::predict(network, encoded[i].values)) {
      ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(raw.size());
}

namespace detail {

inline RunResult run_reann(const Dataset& train, const Dataset& test,
                           const PipelineConfig& cfg, Warnings* warnings) {
  if (train.class_count() < 2) {
    throw DataError("reann mode needs at least two classes");
  }
  RunResult res;
  res.train_config = cfg.train;
  const Dataset encoded = net::encode_inputs(train, warnings);

  net::Network network =
      net::init_network(encoded.attribute_count(), encoded.class_count(),
                        cfg.train.seed);
  net::TrainReport rep = net::train(network, encoded, cfg.train, warnings);
  auto pruned = net::prune(network, encoded, cfg.train, warnings);
  network = std::move(pruned.network);
  rep.connections_pruned = pruned.connections_pruned;
  rep.inputs_removed = pruned.removed_inputs.size();
  rep.train_accuracy = pruned.final_accuracy;

  const auto table = disc::select_delta(network, encoded, cfg.delta_grid);
  const Dataset hidden_data = disc::discretize_dataset(network, encoded, table);
  const rex::RuleSet hidden_rules = rex::run_rex(hidden_data, cfg.extract);

  rex::ExtractConfig explain = cfg.extract;
  explain.keep_default_class_rules = true;
  rex::ClusterRuleMap input_rules;
  for (const auto& r : hidden_rules.rules) {
    for (const auto& c : r.conditions) {
      const std::size_t node = c.attribute;
      const auto cluster = static_cast<std::size_t>(c.value);
      const auto key = std::pair(node, cluster);
      if (input_rules.count(key)) continue;
      std::vector<std::size_t> labels;
      labels.reserve(hidden_data.size());
      for (const auto& p : hidden_data.patterns()) {
        labels.push_back(static_cast<std::size_t>(p.values[node]));
      }
      const Dataset by_cluster = train.relabeled(
          std::move(labels), hidden_data.attribute(node).symbols);
      rex::RuleSet rs = rex::run_rex(by_cluster, explain);
      input_rules.emplace(key, std::move(rs));
    }
  }

  std::vector<std::size_t> network_labels;
  for (const auto& p : hidden_data.patterns()) network_labels.push_back(p.label);
  const Dataset network_view =
      train.relabeled(std::move(network_labels), train.classes());
  res.rules = rex::compose(hidden_rules, input_rules, network_view, cfg.extract);

  const double fid = rule_fidelity(res.rules, train, network, encoded);
  res.report = evaluate(res.rules, train, test, fid);
  res.artifacts.network = network;
  res.artifacts.train_report = rep;
  res.artifacts.discretization_fidelity = disc::fidelity(network, encoded, table);
  res.artifacts.clusters = table;
  res.artifacts.hidden_rules = hidden_rules;
  res.artifacts.input_rules = std::move(input_rules);
  res.artifacts.encoded_train = encoded;
  return res;
}

}  // namespace detail

/**
 * Direct mode induces rules from the raw attributes. REANN mode trains and
 * prunes a network, discretizes its hidden layer, extracts rules over the
 * hidden clusters and over the inputs for each cluster, and composes them
 * into rules over the original attributes.
 */
inline RunResult run(const Dataset& data, const PipelineConfig& cfg,
                     Warnings* warnings = nullptr) {
  auto [train, test] = stratified_split(data, cfg.test_fraction, cfg.split_seed);
  if (cfg.mode == Mode::Reann) {
    return detail::run_reann(train, test, cfg, warnings);
  }
  RunResult res;
  res.train_config = cfg.train;
  res.rules = rex::run_rex(train, cfg.extract);
  res.report = evaluate(res.rules, train, test);
  return res;
}

// ---------------------------------------------------------------------------
// Rendering

enum class Format { Text, Json, Csv };

inline Format parse_format(const std::string& s) {
  if (s == "text" || s == "txt") return Format::Text;
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  throw UsageError("unknown report format '" + s + "'");
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["rule_count_excl_default"] = r.rule_count_excl_default;
  j["rule_count_incl_default"] = r.rule_count_incl_default;
  j["avg_conditions_per_rule"] = r.avg_conditions_per_rule;
  j["train_accuracy"] = r.train_accuracy;
  j["test_accuracy"] = r.test_accuracy ? nlohmann::ordered_json(*r.test_accuracy)
                                       : nlohmann::ordered_json(nullptr);
  j["fidelity_to_network"] = r.fidelity_to_network
                                 ? nlohmann::ordered_json(*r.fidelity_to_network)
                                 : nlohmann::ordered_json(nullptr);
  j["inconsistency_rate"] = r.inconsistency_rate;
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.rule_count_excl_default = j.at("rule_count_excl_default").get<std::size_t>();
    r.rule_count_incl_default = j.at("rule_count_incl_default").get<std::size_t>();
    r.avg_conditions_per_rule = j.at("avg_conditions_per_rule").get<double>();
    r.train_accuracy = j.at("train_accuracy").get<double>();
    if (!j.at("test_accuracy").is_null()) {
      r.test_accuracy = j.at("test_accuracy").get<double>();
    }
    if (!j.at("fidelity_to_network").is_null()) {
      r.fidelity_to_network = j.at("fidelity_to_network").get<double>();
    }
    r.inconsistency_rate = j.at("inconsistency_rate").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

namespace detail {

inline std::string percent(double ratio) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << ratio * 100.0 << " %";
  return s.str();
}

inline std::string percent(const std::optional<double>& ratio) {
  return ratio ? percent(*ratio) : "-";
}

inline std::string csv_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "";
}

}  // namespace detail

/// Renders a batch of reports, one row (or object) per dataset.
inline std::string render(const std::vector<EvalReport>& reports, Format fmt) {
  std::ostringstream out;
  switch (fmt) {
    case Format::Json: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : reports) arr.push_back(to_json(r));
      out << arr.dump(2) << '\n';
      break;
    }
    case Format::Csv:
      out << "dataset,rule_count_excl_default,rule_count_incl_default,"
             "avg_conditions_per_rule,train_accuracy,test_accuracy,"
             "fidelity_to_network,inconsistency_rate\n";
      for (const auto& r : reports) {
        out << r.dataset << ',' << r.rule_count_excl_default << ','
            << r.rule_count_incl_default << ','
            << format_number(r.avg_conditions_per_rule) << ','
            << format_number(r.train_accuracy) << ','
            << detail::csv_number(r.test_accuracy) << ','
            << detail::csv_number(r.fidelity_to_network) << ','
            << format_number(r.inconsistency_rate) << '\n';
      }
      break;
    case Format::Text:
      out << std::left << std::setw(16) << "Data Set" << std::right
          << std::setw(10) << "Rules" << std::setw(12) << "(+default)"
          << std::setw(12) << "Avg. Cond." << std::setw(16)
          << "Rules Accuracy" << std::setw(12) << "Test Acc." << std::setw(12)
          << "Fidelity" << std::setw(16) << "Inconsistency" << '\n';
      for (const auto& r : reports) {
        std::ostringstream avg;
        avg << std::fixed << std::setprecision(2) << r.avg_conditions_per_rule;
        out << std::left << std::setw(16) << r.dataset << std::right
            << std::setw(10) << r.rule_count_excl_default << std::setw(12)
            << r.rule_count_incl_default << std::setw(12) << avg.str()
            << std::setw(16) << detail::percent(r.train_accuracy)
            << std::setw(12) << detail::percent(r.test_accuracy)
            << std::setw(12) << detail::percent(r.fidelity_to_network)
            << std::setw(16) << detail::percent(r.inconsistency_rate) << '\n';
      }
      break;
  }
  return out.str();
}

inline std::string render(const EvalReport& report, Format fmt) {
  if (fmt == Format::Json) return to_json(report).dump(2) + "\n";
  return render(std::vector<EvalReport>{report}, fmt);
}

// ---------------------------------------------------------------------------
// Artifacts on disk

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out << body;
}

}  // namespace detail

/**
 * network.json, clusters.json, rules_hidden.json and
 * rules_input_<node>_<cluster>.json (REANN mode only), then
 * rules_final.json, rules_final.txt and report.{json,txt,csv}.
 */
inline void write_artifacts(const std::filesystem::path& dir,
                            const RunResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto& a = res.artifacts;
  if (a.network) {
    detail::write_file(dir / "network.json",
                       net::to_json(*a.network, res.train_config).dump(2) + "\n");
  }
  if (a.clusters) {
    detail::write_file(dir / "clusters.json",
                       disc::to_json(*a.clusters).dump(2) + "\n");
  }
  if (a.hidden_rules) {
    detail::write_file(dir / "rules_hidden.json",
                       rex::to_json(*a.hidden_rules).dump(2) + "\n");
  }
  for (const auto& [key, rs] : a.input_rules) {
    const auto name = "rules_input_" + std::to_string(key.first + 1) + "_" +
                      std::to_string(key.second) + ".json";
    detail::write_file(dir / name, rex::to_json(rs).dump(2) + "\n");
  }
  detail::write_file(dir / "rules_final.json",
                     rex::to_json(res.rules).dump(2) + "\n");
  detail::write_file(dir / "rules_final.txt", rex::render_text(res.rules));
  detail::write_file(dir / "report.json", render(res.report, Format::Json));
  detail::write_file(dir / "report.txt", render(res.report, Format::Text));
  detail::write_file(dir / "report.csv", render(res.report, Format::Csv));
}

}  // namespace rexkit::pipeline
