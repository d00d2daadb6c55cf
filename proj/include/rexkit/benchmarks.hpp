#pragma once

#include <set>
#include <string>
#include <vector>

#include "rexkit/fixtures.hpp"
#include "rexkit/pipeline.hpp"

namespace rexkit::bench {

/// One target figure and whether a run meets it.
struct Check {
  std::string what;
  bool pass = false;
};

/// Attribute indices referenced by the rules of one class.
inline std::set<std::size_t> attributes_used(const rex::RuleSet& rs,
                                             std::size_t cls) {
  std::set<std::size_t> used;
  for (const auto& r : rs.rules) {
    if (r.cls != cls) continue;
    for (const auto& c : r.conditions) used.insert(c.attribute);
  }
  return used;
}

/**
 * Tolerance bands around the reference rule counts and accuracies for the
 * four benchmark datasets (resubstitution accuracy, direct mode).
 */
inline std::vector<Check> check_targets(const std::string& dataset,
                                          const rex::RuleSet& rs,
                                          const pipeline::EvalReport& r) {
  std::vector<Check> out;
  if (dataset == "golf") {
    out.push_back({"accuracy = 100%", r.train_accuracy == 1.0});
    out.push_back({"rules incl. default <= 3", r.rule_count_incl_default <= 3});
    out.push_back({"avg conditions <= 2", r.avg_conditions_per_rule <= 2.0});
  } else if (dataset == "season") {
    out.push_back({"accuracy = 100%", r.train_accuracy == 1.0});
    out.push_back({"rules incl. default in [4, 5]",
                   r.rule_count_incl_default >= 4 &&
                       r.rule_count_incl_default <= 5});
  } else if (dataset == "iris") {
    out.push_back({"accuracy >= 96%", r.train_accuracy >= 0.96});
    out.push_back({"rules excl. default <= 4", r.rule_count_excl_default <= 4});
    out.push_back({"avg conditions <= 2", r.avg_conditions_per_rule <= 2.0});
  } else if (dataset == "breast-cancer") {
    out.push_back({"accuracy >= 95%", r.train_accuracy >= 0.95});
    out.push_back({"rules excl. default <= 4", r.rule_count_excl_default <= 4});
    // Clump thickness, bare nuclei and mitosis are A_1, A_6 and A_9.
    const auto used = attributes_used(rs, 0);
    const int hits = static_cast<int>(used.count(0) + used.count(5) + used.count(8));
    out.push_back({"benign rules use >= 2 of {A_1, A_6, A_9}", hits >= 2});
  }
  return out;
}

inline bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

struct Source {
  std::string iris_path;
  std::string breast_cancer_path;
};

/// The four benchmark datasets in table order.
inline std::vector<std::string> benchmark_names() {
  return {"breast-cancer", "iris", "season", "golf"};
}

inline Dataset load_benchmark(const std::string& name, const Source& src) {
  if (name == "breast-cancer") return load_breast_cancer(src.breast_cancer_path);
  if (name == "iris") return load_iris(src.iris_path);
  return builtin_fixture(name);
}

}  // namespace rexkit::bench
