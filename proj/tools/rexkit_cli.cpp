// rexkit command-line front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rexkit/benchmarks.hpp"
#include "rexkit/rexkit.hpp"

namespace fs = std::filesystem;
using namespace rexkit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Options shared by the subcommands that run the pipeline.
struct Options {
  std::string data;
  std::string mode = "direct";
  std::string search = "exhaustive";
  std::string preset = "default";
  std::string format = "text";
  std::string out;
  std::string rules;
  std::string name;
  std::string iris = std::string(REXKIT_DATA_DIR) + "/iris.data";
  std::string breast_cancer =
      std::string(REXKIT_DATA_DIR) + "/breast-cancer-wisconsin.data";
  std::uint64_t seed = 1;
  bool seed_given = false;
  bool header = false;
  std::optional<std::size_t> class_column;
  std::optional<double> noise_fraction;
  std::optional<std::size_t> noise_min_coverage;
  double test_fraction = 0.0;
  net::TrainConfig train;
};

std::uint64_t effective_seed(const Options& o) {
  if (o.seed_given) return o.seed;
  if (const char* env = std::getenv("REXKIT_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("REXKIT_SEED is not an integer: ") + env);
    }
  }
  return o.seed;
}

/**
 * fixture:golf | fixture:season | iris:PATH | breast-cancer:PATH | PATH.
 * A bare path is read with an inferred schema, class in the last column
 * unless --class-column says otherwise.
 */
Dataset load_data(const Options& o) {
  const auto& spec = o.data;
  auto after = [&](std::string_view prefix) -> std::optional<std::string> {
    if (spec.rfind(prefix, 0) == 0) return spec.substr(prefix.size());
    return std::nullopt;
  };
  if (auto n = after("fixture:")) return builtin_fixture(*n);
  if (auto p = after("iris:")) return load_iris(*p);
  if (auto p = after("breast-cancer:")) return load_breast_cancer(*p);

  std::ifstream probe(spec);
  if (!probe) throw DataError("cannot open '" + spec + "'");
  std::string first;
  std::getline(probe, first);
  std::size_t width = 1;
  for (char c : first) width += c == ',';
  CsvOptions opts;
  opts.has_header = o.header;
  opts.class_column = o.class_column.value_or(width - 1);
  if (opts.class_column >= width) {
    throw UsageError("--class-column " + std::to_string(opts.class_column) +
                     " is past the last column");
  }
  probe.clear();
  probe.seekg(0);
  auto schema = infer_schema(probe, opts);
  return load_csv(spec, std::move(schema), opts);
}

pipeline::PipelineConfig make_config(const Options& o,
                                      const std::string& dataset_name) {
  pipeline::PipelineConfig cfg;
  if (o.preset == "benchmark") {
    cfg = pipeline::benchmark_config(dataset_name);
  } else if (o.preset != "default") {
    throw UsageError("unknown preset '" + o.preset + "'");
  }
  cfg.mode = pipeline::parse_mode(o.mode);
  cfg.train = o.train;
  const auto seed = effective_seed(o);
  cfg.train.seed = seed;
  cfg.split_seed = seed;
  cfg.test_fraction = o.test_fraction;
  // An explicit --search wins over the preset.
  if (!o.search.empty()) cfg.extract.search = rex::parse_search_mode(o.search);
  if (o.noise_fraction) cfg.extract.noise_min_fraction = *o.noise_fraction;
  if (o.noise_min_coverage) cfg.extract.noise_min_coverage = *o.noise_min_coverage;
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw UsageError("--test-fraction must lie in [0, 1)");
  }
  if (cfg.extract.noise_min_fraction < 0.0 || cfg.extract.noise_min_fraction > 1.0) {
    throw UsageError("--noise-fraction must lie in [0, 1]");
  }
  net::validate_config(cfg.train);
  return cfg;
}

nlohmann::ordered_json config_json(const pipeline::PipelineConfig& cfg,
                                   const std::string& command,
                                   const std::string& data) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["data"] = data;
  j["mode"] = pipeline::to_string(cfg.mode);
  j["search"] = rex::to_string(cfg.extract.search);
  j["exhaustive_max_len"] = cfg.extract.exhaustive_max_len;
  j["noise_min_coverage"] = cfg.extract.noise_min_coverage;
  j["noise_min_fraction"] = cfg.extract.noise_min_fraction;
  j["test_fraction"] = cfg.test_fraction;
  j["split_seed"] = cfg.split_seed;
  j["delta_grid"] = cfg.delta_grid;
  j["train"] = net::to_json(cfg.train);
  return j;
}

void echo_config(const nlohmann::ordered_json& j) {
  std::cerr << "config: " << j.dump() << "\n";
}

void print_warnings(const Warnings& w) {
  for (const auto& m : w.messages) std::cerr << "warning: " << m << "\n";
}

int cmd_extract(const Options& o) {
  const Dataset data = load_data(o);
  const auto cfg = make_config(o, data.name());
  echo_config(config_json(cfg, "extract", o.data));
  Warnings warnings;
  const auto res = pipeline::run(data, cfg, &warnings);
  print_warnings(warnings);
  std::cout << rex::render_text(res.rules) << "\n"
            << pipeline::render(res.report, pipeline::parse_format(o.format));
  if (!o.out.empty()) {
    pipeline::write_artifacts(o.out, res);
    std::ofstream(fs::path(o.out) / "config.json")
        << config_json(cfg, "extract", o.data).dump(2) << "\n";
  }
  return kOk;
}

int cmd_train(const Options& o) {
  const Dataset data = load_data(o);
  auto cfg = make_config(o, data.name());
  echo_config(config_json(cfg, "train", o.data));
  Warnings warnings;
  const Dataset encoded = net::encode_inputs(data, &warnings);
  auto network = net::init_network(encoded.attribute_count(),
                                   encoded.class_count(), cfg.train.seed);
  auto report = net::train(network, encoded, cfg.train, &warnings);
  const auto pruned = net::prune(network, encoded, cfg.train, &warnings);
  report.connections_pruned = pruned.connections_pruned;
  report.inputs_removed = pruned.removed_inputs.size();
  report.train_accuracy = pruned.final_accuracy;
  print_warnings(warnings);
  std::cout << "epochs: " << report.epochs_run << "\n"
            << "final mse: " << format_number(report.final_mse, 6) << "\n"
            << "hidden nodes: " << pruned.network.hidden_count << " ("
            << report.hidden_nodes_added << " added)\n"
            << "connections pruned: " << report.connections_pruned << "\n"
            << "inputs removed: " << report.inputs_removed << "\n"
            << "training accuracy: "
            << format_number(100.0 * report.train_accuracy, 6) << "%\n";
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "network.json")
        << net::to_json(pruned.network, cfg.train).dump(2) << "\n";
  }
  return kOk;
}

int cmd_eval(const Options& o) {
  if (o.rules.empty()) throw UsageError("eval needs --rules");
  const Dataset data = load_data(o);
  std::ifstream in(o.rules);
  if (!in) throw DataError("cannot open '" + o.rules + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed rules file: ") + e.what());
  }
  const auto rs = rex::ruleset_from_json(j, data.schema());
  if (rs.classes != data.classes()) {
    throw DataError("rule classes do not match the data's classes");
  }
  nlohmann::ordered_json echo{{"command", "eval"},
                              {"data", o.data},
                              {"rules", o.rules}};
  echo_config(echo);
  const auto report = pipeline::evaluate(rs, data, Dataset(data.name(), data.schema(), data.classes(), {}));
  const auto body = pipeline::render(report, pipeline::parse_format(o.format));
  std::cout << body;
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream(fs::path(o.out) / "report.json")
        << pipeline::render(report, pipeline::Format::Json);
  }
  return kOk;
}

int cmd_export_fixture(const Options& o) {
  const Dataset data = builtin_fixture(o.name);
  if (o.out.empty()) {
    write_csv(std::cout, data);
    return kOk;
  }
  const fs::path p(o.out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw DataError("cannot write '" + o.out + "'");
  write_csv(out, data);
  return kOk;
}

struct Row {
  std::string name;
  std::optional<pipeline::RunResult> result;
  std::string error;
};

int cmd_reproduce(const Options& o) {
  if (o.out.empty()) throw UsageError("reproduce needs --out");
  const bench::Source src{o.iris, o.breast_cancer};
  const auto names = bench::benchmark_names();

  nlohmann::ordered_json echo;
  echo["command"] = "reproduce";
  echo["iris"] = o.iris;
  echo["breast_cancer"] = o.breast_cancer;
  echo["seed"] = effective_seed(o);
  for (const auto& n : names) echo["datasets"][n] = config_json(make_config(o, n), "reproduce", n);
  echo_config(echo);

  std::vector<std::future<Row>> jobs;
  for (const auto& n : names) {
    jobs.push_back(std::async(std::launch::async, [&o, &src, n] {
      Row row{n, std::nullopt, {}};
      try {
        const Dataset data = bench::load_benchmark(n, src);
        row.result = pipeline::run(data, make_config(o, n));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  std::vector<Row> rows;
  for (auto& j : jobs) rows.push_back(j.get());

  const fs::path out(o.out);
  fs::create_directories(out);
  std::vector<pipeline::EvalReport> reports;
  std::ostringstream flags;
  bool failed = false;
  for (const auto& row : rows) {
    if (!row.result) {
      failed = true;
      std::cerr << "error: " << row.name << ": " << row.error << "\n";
      flags << row.name << ": ERROR " << row.error << "\n";
      continue;
    }
    pipeline::write_artifacts(out / row.name, *row.result);
    reports.push_back(row.result->report);
    const auto checks =
        bench::check_targets(row.name, row.result->rules, row.result->report);
    flags << row.name << ": " << (bench::all_pass(checks) ? "PASS" : "FAIL");
    for (const auto& c : checks) {
      flags << " [" << (c.pass ? "ok" : "miss") << "] " << c.what << ";";
    }
    flags << "\n";
  }
  const auto table = pipeline::render(reports, pipeline::Format::Text);
  std::ofstream(out / "table.txt") << table << "\n" << flags.str();
  std::ofstream(out / "table.csv") << pipeline::render(reports, pipeline::Format::Csv);
  std::ofstream(out / "table.json") << pipeline::render(reports, pipeline::Format::Json);
  std::cout << table << "\n" << flags.str();
  return failed ? kData : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule extraction from data and from trained networks"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* c) {
    c->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          o.seed = s;
          o.seed_given = true;
        },
        "Random seed (falls back to REXKIT_SEED, then 1)");
  };
  auto add_data = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option(
        "--data", o.data,
        "fixture:golf|fixture:season, iris:PATH, breast-cancer:PATH or a CSV path");
    if (required) opt->required();
    c->add_flag("--header", o.header, "Generic CSV has a header row");
    c->add_option("--class-column", o.class_column,
                  "Generic CSV class column (0-based, default last)");
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("--mode", o.mode, "direct or reann")
        ->check(CLI::IsMember({"direct", "reann"}));
    c->add_option("--search", o.search, "greedy or exhaustive")
        ->check(CLI::IsMember({"greedy", "exhaustive"}));
    c->add_option("--preset", o.preset,
                  "default, or benchmark (noise filter at 1% of patterns)")
        ->check(CLI::IsMember({"default", "benchmark"}));
    c->add_option("--noise-fraction", o.noise_fraction,
                  "Drop rules that alone cover fewer than this share of patterns");
    c->add_option("--noise-min-coverage", o.noise_min_coverage,
                  "Drop rules that alone cover fewer than this many patterns");
    c->add_option("--test-fraction", o.test_fraction,
                  "Stratified holdout fraction (default 0: resubstitution)");
  };
  auto add_train = [&](CLI::App* c) {
    c->add_option("--learning-rate", o.train.learning_rate);
    c->add_option("--momentum", o.train.momentum);
    c->add_option("--max-epochs", o.train.max_epochs);
    c->add_option("--target-mse", o.train.target_mse);
    c->add_option("--max-hidden", o.train.max_hidden);
    c->add_option("--prune-slack", o.train.prune_accuracy_slack);
  };
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Report format: text, json or csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
  };

  auto* extract = app.add_subcommand("extract", "Extract rules from a dataset");
  add_data(extract, true);
  add_run(extract);
  add_train(extract);
  add_seed(extract);
  add_format(extract);
  extract->add_option("--out", o.out, "Artifact directory");

  auto* train = app.add_subcommand("train", "Train and prune a network");
  add_data(train, true);
  add_train(train);
  add_seed(train);
  train->add_option("--out", o.out, "Directory for network.json");

  auto* eval = app.add_subcommand("eval", "Score a saved rule set");
  add_data(eval, true);
  eval->add_option("--rules", o.rules, "Rule set JSON")->required();
  add_format(eval);
  eval->add_option("--out", o.out, "Directory for report.json");

  auto* reproduce =
      app.add_subcommand("reproduce", "Rule counts and accuracies on the four benchmarks");
  reproduce->add_option("--out", o.out, "Artifact directory")->required();
  reproduce->add_option("--iris", o.iris, "Path to iris.data");
  reproduce->add_option("--breast-cancer", o.breast_cancer,
                        "Path to breast-cancer-wisconsin.data");
  add_seed(reproduce);

  auto* exporter = app.add_subcommand("export-fixture", "Write a built-in fixture as CSV");
  exporter->add_option("--name", o.name, "golf or season")->required();
  exporter->add_option("--out", o.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() == 0) return kOk;
    std::cerr << app.help();
    return kUsage;
  }

  try {
    // reproduce uses the benchmark preset; the default search applies there
    // only where the preset does not pick one.
    if (*reproduce) {
      o.preset = "benchmark";
      o.search.clear();
    } else if (extract->count("--search") == 0 && o.preset == "benchmark") {
      o.search.clear();
    }
    if (*extract) return cmd_extract(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*reproduce) return cmd_reproduce(o);
    if (*exporter) return cmd_export_fixture(o);
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
