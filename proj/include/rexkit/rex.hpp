#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rexkit/bits.hpp"
#include "rexkit/dataset.hpp"
#include "rexkit/error.hpp"

namespace rexkit::rex {

enum class Op { Eq, Le, Ge };

struct Condition {
  std::size_t attribute = 0;
  Op op = Op::Eq;
  double value = 0.0;  // symbol index for Eq, threshold otherwise

  bool holds(const std::vector<double>& values) const {
    const double v = values[attribute];
    switch (op) {
      case Op::Eq: return v == value;
      case Op::Le: return v <= value;
      case Op::Ge: return v >= value;
    }
    return false;
  }

  friend auto operator<=>(const Condition&, const Condition&) = default;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Rule {
  std::vector<Condition> conditions;  // conjunction, kept sorted
  std::size_t cls = 0;
  std::size_t coverage = 0;
  std::size_t id = 0;

  bool fires(const std::vector<double>& values) const {
    for (const auto& c : conditions) {
      if (!c.holds(values)) return false;
    }
    return true;
  }
  bool fires(const Pattern& p) const { return fires(p.values); }
};

enum class SearchMode { Greedy, Exhaustive };
enum class Provenance { Direct, Composed };

struct ExtractConfig {
  SearchMode search = SearchMode::Exhaustive;
  std::size_t exhaustive_max_len = 3;
  // Rules that alone cover fewer training patterns than
  // max(noise_min_coverage, ceil(noise_min_fraction * n)) are dropped as
  // noise. The defaults keep every rule that covers something new.
  std::size_t noise_min_coverage = 1;
  double noise_min_fraction = 0.0;
  // Composition needs explicit rules for every class, default included.
  bool keep_default_class_rules = false;
};

struct RuleSet {
  std::vector<AttributeSchema> schema;
  std::vector<std::string> classes;
  std::vector<Rule> rules;
  std::size_t default_class = 0;
  Provenance provenance = Provenance::Direct;

  std::size_t rule_count() const noexcept { return rules.size(); }
  std::size_t rule_count_including_default() const noexcept {
    return rules.size() + 1;
  }
};

inline const char* to_string(Op op) {
  switch (op) {
    case Op::Eq: return "eq";
    case Op::Le: return "le";
    case Op::Ge: return "ge";
  }
  return "?";
}

inline const char* to_string(SearchMode m) {
  return m == SearchMode::Greedy ? "greedy" : "exhaustive";
}

inline const char* to_string(Provenance p) {
  return p == Provenance::Direct ? "direct" : "composed";
}

inline SearchMode parse_search_mode(const std::string& s) {
  if (s == "greedy") return SearchMode::Greedy;
  if (s == "exhaustive") return SearchMode::Exhaustive;
  throw UsageError("unknown search mode '" + s + "'");
}

namespace detail {

using rexkit::detail::Bits;

inline void sort_conditions(Rule& r) {
  std::sort(r.conditions.begin(), r.conditions.end());
}

inline Bits cover_of(const Dataset& data, const std::vector<Condition>& conds) {
  Bits b(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool ok = true;
    for (const auto& c : conds) {
      if (!c.holds(data[i].values)) {
        ok = false;
        break;
      }
    }
    if (ok) b.set(i);
  }
  return b;
}

inline Bits cover_of(const Dataset& data, const Rule& r) {
  return cover_of(data, r.conditions);
}

inline std::vector<Bits> class_masks(const Dataset& data) {
  std::vector<Bits> masks(data.class_count(), Bits(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) masks[data[i].label].set(i);
  return masks;
}

inline bool consistent(const Bits& cover, const Bits& class_mask) {
  return cover.subset_of(class_mask);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Candidate conditions

/**
 * Thresholds for a continuous attribute: midpoints between consecutive
 * distinct values whose class sets are not the same single class, plus
 * the observed minimum and maximum. Ascending, duplicate-free.
 */
inline std::vector<double> cut_points(const Dataset& data, std::size_t attr) {
  std::map<double, std::set<std::size_t>> classes_at;
  for (const auto& p : data.patterns()) {
    classes_at[p.values[attr]].insert(p.label);
  }
  std::vector<double> cuts;
  if (classes_at.empty()) return cuts;
  cuts.push_back(classes_at.begin()->first);
  for (auto it = classes_at.begin(), next = std::next(it);
       next != classes_at.end(); ++it, ++next) {
    const bool pure_same = it->second.size() == 1 &&
                           next->second.size() == 1 &&
                           *it->second.begin() == *next->second.begin();
    if (!pure_same) cuts.push_back((it->first + next->first) / 2.0);
  }
  cuts.push_back(classes_at.rbegin()->first);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

/// All single conditions the seed satisfies, in attribute order with Eq,
/// then Le, then Ge, thresholds ascending.
inline std::vector<Condition> candidate_conditions(const Pattern& seed,
                                                   const Dataset& data) {
  std::vector<Condition> out;
  for (std::size_t a = 0; a < data.attribute_count(); ++a) {
    const double v = seed.values[a];
    if (data.attribute(a).is_categorical()) {
      out.push_back({a, Op::Eq, v});
      continue;
    }
    const auto cuts = cut_points(data, a);
    for (double t : cuts) {
      if (t >= v) out.push_back({a, Op::Le, t});
    }
    for (double t : cuts) {
      if (t <= v) out.push_back({a, Op::Ge, t});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule generation

namespace detail {

struct Candidates {
  std::vector<Condition> conds;
  std::vector<Bits> covers;
};

inline Candidates candidates_for(const Pattern& seed, const Dataset& data) {
  Candidates c;
  c.conds = candidate_conditions(seed, data);
  c.covers.reserve(c.conds.size());
  for (const auto& cond : c.conds) c.covers.push_back(cover_of(data, {cond}));
  return c;
}

inline std::optional<std::vector<std::size_t>> exhaustive_search(
    const Candidates& cand, const Bits& same_class, std::size_t max_len) {
  const std::size_t n = cand.conds.size();
  const Bits all(same_class.size(), true);
  for (std::size_t len = 1; len <= std::min(max_len, n); ++len) {
    std::optional<std::vector<std::size_t>> best;
    std::size_t best_cov = 0;
    std::vector<std::size_t> idx(len);
    std::vector<Bits> prefix(len + 1);
    prefix[0] = all;
    // Depth-first walk over index tuples in lexicographic order.
    std::size_t depth = 0;
    idx[0] = 0;
    while (true) {
      if (idx[depth] > n - (len - depth)) {
        if (depth == 0) break;
        --depth;
        ++idx[depth];
        continue;
      }
      const Condition& c = cand.conds[idx[depth]];
      bool redundant = false;
      for (std::size_t k = 0; k < depth; ++k) {
        const Condition& o = cand.conds[idx[k]];
        if (o.attribute == c.attribute && o.op == c.op) redundant = true;
      }
      if (redundant) {
        ++idx[depth];
        continue;
      }
      prefix[depth + 1] = prefix[depth] & cand.covers[idx[depth]];
      if (depth + 1 == len) {
        const Bits& cov = prefix[len];
        if (consistent(cov, same_class)) {
          const std::size_t count = cov.count();
          if (!best || count > best_cov) {
            best = idx;
            best_cov = count;
          }
        }
        ++idx[depth];
      } else {
        ++depth;
        idx[depth] = idx[depth - 1] + 1;
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

inline std::vector<std::size_t> greedy_search(const Candidates& cand,
                                              const Bits& same_class) {
  const Bits other = ~same_class;
  Bits current(same_class.size(), true);
  std::vector<std::size_t> chosen;
  std::vector<bool> used(cand.conds.size(), false);
  while (!Bits::and_none(current, other)) {
    std::optional<std::size_t> pick;
    std::size_t best_excluded = 0, best_retained = 0;
    const Bits cur_other = current & other;
    const Bits cur_same = current & same_class;
    const std::size_t cur_other_n = cur_other.count();
    for (std::size_t i = 0; i < cand.conds.size(); ++i) {
      if (used[i]) continue;
      const std::size_t excluded =
          cur_other_n - Bits::and_count(cur_other, cand.covers[i]);
      if (excluded == 0) continue;
      const std::size_t retained = Bits::and_count(cur_same, cand.covers[i]);
      if (!pick || excluded > best_excluded ||
          (excluded == best_excluded && retained > best_retained)) {
        pick = i;
        best_excluded = excluded;
        best_retained = retained;
      }
    }
    if (!pick) {
      throw InternalError(
          "no candidate condition separates the seed from other classes; "
          "was the data cleaned of contradictions?");
    }
    used[*pick] = true;
    chosen.push_back(*pick);
    current &= cand.covers[*pick];
  }
  // Drop conditions that are no longer needed, newest first.
  for (std::size_t k = chosen.size(); k-- > 0;) {
    if (chosen.size() == 1) break;
    Bits cov(same_class.size(), true);
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      if (j != k) cov &= cand.covers[chosen[j]];
    }
    if (consistent(cov, same_class)) chosen.erase(chosen.begin() + k);
  }
  return chosen;
}

}  // namespace detail

/**
 * Builds one consistent rule around `data[seed_index]`. `data` must be free
 * of contradictions: the conjunction of the seed's tightest conditions on
 * every attribute is then always consistent.
 */
inline Rule generate_rule(std::size_t seed_index, const Dataset& data,
                          const ExtractConfig& cfg) {
  const Pattern& seed = data[seed_index];
  const auto cand = detail::candidates_for(seed, data);
  const auto masks = detail::class_masks(data);
  const auto& same = masks[seed.label];

  std::optional<std::vector<std::size_t>> picked;
  if (cfg.search == SearchMode::Exhaustive) {
    picked = detail::exhaustive_search(cand, same, cfg.exhaustive_max_len);
  }
  if (!picked) picked = detail::greedy_search(cand, same);

  Rule r;
  r.cls = seed.label;
  for (std::size_t i : *picked) r.conditions.push_back(cand.conds[i]);
  detail::sort_conditions(r);
  r.coverage = detail::cover_of(data, r).count();
  return r;
}

/// Sequential covering over the patterns in dataset order.
inline std::vector<Rule> extract(const Dataset& data, const ExtractConfig& cfg) {
  std::vector<Rule> rules;
  detail::Bits marked(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (marked.test(i)) continue;
    Rule r = generate_rule(i, data, cfg);
    r.id = rules.size() + 1;
    marked |= detail::cover_of(data, r);
    rules.push_back(std::move(r));
  }
  return rules;
}

/// Stable grouping by class index.
inline std::vector<std::pair<std::size_t, std::vector<Rule>>> cluster_rules(
    const std::vector<Rule>& rules) {
  std::map<std::size_t, std::vector<Rule>> groups;
  for (const auto& r : rules) groups[r.cls].push_back(r);
  return {groups.begin(), groups.end()};
}

/// True when every pattern satisfying `specific` also satisfies `general`.
inline bool subsumes(const Rule& general, const Rule& specific) {
  for (const auto& g : general.conditions) {
    bool implied = false;
    for (const auto& s : specific.conditions) {
      if (s.attribute != g.attribute || s.op != g.op) continue;
      switch (g.op) {
        case Op::Eq: implied = s.value == g.value; break;
        case Op::Le: implied = s.value <= g.value; break;
        case Op::Ge: implied = s.value >= g.value; break;
      }
      if (implied) break;
    }
    if (!implied) return false;
  }
  return true;
}

/// Minimum number of patterns a rule must cover on its own to survive
/// pruning; never below 1, so redundant rules always go.
inline std::size_t noise_threshold(const ExtractConfig& cfg, std::size_t n) {
  const auto by_fraction = static_cast<std::size_t>(
      std::ceil(cfg.noise_min_fraction * static_cast<double>(n) - 1e-9));
  return std::max({cfg.noise_min_coverage, by_fraction, std::size_t{1}});
}

namespace detail {

inline void sort_for_output(std::vector<Rule>& rules) {
  std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
    if (a.cls != b.cls) return a.cls < b.cls;
    if (a.coverage != b.coverage) return a.coverage > b.coverage;
    return a.id < b.id;
  });
}

}  // namespace detail

/**
 * Generalize each rule by dropping conditions that are not needed for
 * consistency, delete rules subsumed by a same-class rule, then delete
 * noise rules and rules whose coverage the others already provide.
 */
inline std::vector<Rule> prune(std::vector<Rule> rules, const Dataset& data,
                               const ExtractConfig& cfg) {
  using detail::Bits;
  const auto masks = detail::class_masks(data);

  for (auto& r : rules) {
    detail::sort_conditions(r);
    for (std::size_t k = 0; k < r.conditions.size() && r.conditions.size() > 1;) {
      std::vector<Condition> trial = r.conditions;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
      if (detail::consistent(detail::cover_of(data, trial), masks[r.cls])) {
        r.conditions = std::move(trial);
      } else {
        ++k;
      }
    }
    r.coverage = detail::cover_of(data, r).count();
  }

  std::vector<Rule> kept;
  for (const auto& [cls, group] : cluster_rules(rules)) {
    for (const auto& r : group) {
      bool dominated = false;
      for (const auto& g : group) {
        if (&g == &r) continue;
        if (subsumes(g, r) && (!subsumes(r, g) || g.id < r.id)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) kept.push_back(r);
    }
  }
  rules = std::move(kept);

  std::vector<Bits> covers;
  covers.reserve(rules.size());
  for (const auto& r : rules) covers.push_back(detail::cover_of(data, r));
  std::vector<std::size_t> order(rules.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rules[a].coverage != rules[b].coverage) {
      return rules[a].coverage < rules[b].coverage;
    }
    return rules[a].id > rules[b].id;
  });
  // A rule is redundant when the others already cover everything it covers,
  // and noise when it alone covers fewer than noise_min_coverage patterns.
  const std::size_t min_unique = noise_threshold(cfg, data.size());
  std::vector<bool> alive(rules.size(), true);
  for (std::size_t i : order) {
    Bits others(data.size());
    for (std::size_t j = 0; j < rules.size(); ++j) {
      if (j != i && alive[j]) others |= covers[j];
    }
    if ((covers[i] & ~others).count() < min_unique) alive[i] = false;
  }
  std::vector<Rule> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (alive[i]) out.push_back(std::move(rules[i]));
  }
  detail::sort_for_output(out);
  return out;
}

// ---------------------------------------------------------------------------
// Classification

/**
 * Order-free prediction: the default when nothing fires, the agreed class
 * when all firing rules agree, otherwise the class of the firing rule with
 * the largest training coverage (lowest class index on ties).
 */
inline std::size_t classify(const std::vector<Rule>& rules,
                            std::size_t default_class,
                            const std::vector<double>& values) {
  std::optional<std::size_t> cls;
  std::size_t best_cov = 0;
  for (const auto& r : rules) {
    if (!r.fires(values)) continue;
    if (!cls || r.coverage > best_cov ||
        (r.coverage == best_cov && r.cls < *cls)) {
      cls = r.cls;
      best_cov = r.coverage;
    }
  }
  return cls.value_or(default_class);
}

inline std::size_t classify(const RuleSet& rs, const Pattern& p) {
  return classify(rs.rules, rs.default_class, p.values);
}

inline double accuracy(const std::vector<Rule>& rules, std::size_t default_class,
                       const Dataset& data) {
  if (data.empty()) return 1.0;
  std::size_t hits = 0;
  for (const auto& p : data.patterns()) {
    if (classify(rules, default_class, p.values) == p.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

inline double accuracy(const RuleSet& rs, const Dataset& data) {
  return accuracy(rs.rules, rs.default_class, data);
}

// ---------------------------------------------------------------------------
// Default rule

/**
 * The class with the most training patterns left uncovered by the rules.
 * When nothing is uncovered (or on ties) the class whose rules are most
 * numerous wins, since making it the default removes the most rules; then
 * the most frequent class; then the lowest index.
 */
inline std::size_t choose_default(const std::vector<Rule>& rules,
                                  const Dataset& data) {
  const std::size_t k = data.class_count();
  if (k == 0) return 0;
  std::vector<std::size_t> uncovered(k, 0), rule_count(k, 0);
  for (const auto& p : data.patterns()) {
    bool covered = false;
    for (const auto& r : rules) {
      if (r.fires(p)) {
        covered = true;
        break;
      }
    }
    if (!covered) ++uncovered[p.label];
  }
  for (const auto& r : rules) ++rule_count[r.cls];
  const auto counts = data.class_counts();
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    auto key = [&](std::size_t x) {
      return std::tuple(uncovered[x], rule_count[x], counts[x]);
    };
    if (key(c) > key(best)) best = c;
  }
  return best;
}

/// Removes rules of the default class whose removal leaves training
/// accuracy unchanged, smallest coverage first.
inline std::vector<Rule> drop_default_class_rules(std::vector<Rule> rules,
                                                  std::size_t default_class,
                                                  const Dataset& data) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].cls == default_class) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].coverage < rules[b].coverage;
  });
  std::vector<bool> alive(rules.size(), true);
  auto live = [&](std::optional<std::size_t> without) {
    std::vector<Rule> v;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (alive[i] && i != without) v.push_back(rules[i]);
    }
    return v;
  };
  for (std::size_t i : order) {
    const double before = accuracy(live(std::nullopt), default_class, data);
    const double after = accuracy(live(i), default_class, data);
    if (after >= before) alive[i] = false;
  }
  return live(std::nullopt);
}

// ---------------------------------------------------------------------------
// Full inducer

namespace detail {

/// Prune, then re-extract for patterns the pruned rules no longer cover
/// until coverage is restored. Patterns orphaned by the noise filter on the
/// first pass are accepted as noise and left to the default rule.
inline std::vector<Rule> prune_until_covered(std::vector<Rule> rules,
                                             const Dataset& data,
                                             const ExtractConfig& cfg) {
  rules = prune(std::move(rules), data, cfg);
  auto uncovered_of = [&](const std::vector<Rule>& rs) {
    Bits covered(data.size());
    for (const auto& r : rs) covered |= cover_of(data, r);
    return ~covered;
  };
  const Bits noise = uncovered_of(rules);
  std::size_t next_id = 0;
  for (const auto& r : rules) next_id = std::max(next_id, r.id);

  for (std::size_t iter = 0;; ++iter) {
    Bits pending = uncovered_of(rules) & ~noise;
    if (pending.none()) break;
    if (iter >= data.size()) {
      throw InternalError("coverage check did not converge");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!pending.test(i)) continue;
      Rule r = generate_rule(i, data, cfg);
      r.id = ++next_id;
      pending &= ~cover_of(data, r);
      rules.push_back(std::move(r));
    }
    rules = prune(std::move(rules), data, cfg);
  }
  return rules;
}

}  // namespace detail

/// Extract, cluster, prune, verify coverage and choose the default class.
inline RuleSet run_rex(const Dataset& data, const ExtractConfig& cfg = {}) {
  if (cfg.exhaustive_max_len == 0) {
    throw UsageError("exhaustive_max_len must be at least 1");
  }
  const Dataset clean = clean_contradictions(data);
  RuleSet rs;
  rs.schema = data.schema();
  rs.classes = data.classes();
  rs.provenance = Provenance::Direct;
  if (clean.empty()) return rs;

  std::vector<Rule> rules;
  for (auto& [cls, group] : cluster_rules(extract(clean, cfg))) {
    for (auto& r : group) rules.push_back(std::move(r));
  }
  rules = detail::prune_until_covered(std::move(rules), clean, cfg);
  rs.default_class = choose_default(rules, clean);
  if (!cfg.keep_default_class_rules) {
    rules = drop_default_class_rules(std::move(rules), rs.default_class, clean);
  }
  rs.rules = std::move(rules);
  return rs;
}

// ---------------------------------------------------------------------------
// Composition of hidden-layer rules with input-layer cluster rules

/// (hidden node, cluster index) -> rules over the input attributes whose
/// classes are that node's cluster indices.
using ClusterRuleMap = std::map<std::pair<std::size_t, std::size_t>, RuleSet>;

namespace detail {

/// Merges a raw conjunction into canonical form; nullopt when empty.
inline std::optional<std::vector<Condition>> merge_conjunction(
    const std::vector<Condition>& raw) {
  std::map<std::size_t, std::optional<double>> eq, le, ge;
  for (const auto& c : raw) {
    switch (c.op) {
      case Op::Eq: {
        auto& slot = eq[c.attribute];
        if (slot && *slot != c.value) return std::nullopt;
        slot = c.value;
        break;
      }
      case Op::Le: {
        auto& slot = le[c.attribute];
        slot = slot ? std::min(*slot, c.value) : c.value;
        break;
      }
      case Op::Ge: {
        auto& slot = ge[c.attribute];
        slot = slot ? std::max(*slot, c.value) : c.value;
        break;
      }
    }
  }
  std::vector<Condition> out;
  for (const auto& [a, v] : eq) out.push_back({a, Op::Eq, *v});
  for (const auto& [a, v] : le) out.push_back({a, Op::Le, *v});
  for (const auto& [a, v] : ge) {
    if (auto it = le.find(a); it != le.end() && *v > *it->second) {
      return std::nullopt;
    }
    out.push_back({a, Op::Ge, *v});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/**
 * Rewrites rules over discretized hidden activations ("H_j = k") into rules
 * over the input attributes by substituting each hidden condition with the
 * disjunction of the input rules that describe cluster k of node j, then
 * expanding to DNF. `data` is the input-space training set labelled with
 * the classes the hidden rules were extracted for.
 */
inline RuleSet compose(const RuleSet& hidden_rules,
                       const ClusterRuleMap& input_rules, const Dataset& data,
                       const ExtractConfig& cfg) {
  std::vector<Rule> composed;
  std::set<std::pair<std::size_t, std::vector<Condition>>> seen;
  for (const auto& hr : hidden_rules.rules) {
    std::vector<std::vector<Condition>> partial = {{}};
    for (const auto& hc : hr.conditions) {
      if (hc.op != Op::Eq) {
        throw ConfigError("hidden rules must use equality conditions only");
      }
      const auto key = std::pair(hc.attribute, static_cast<std::size_t>(hc.value));
      auto it = input_rules.find(key);
      if (it == input_rules.end()) {
        throw ConfigError("no input rules for hidden node " +
                          std::to_string(key.first) + " cluster " +
                          std::to_string(key.second));
      }
      std::vector<const Rule*> alternatives;
      for (const auto& r : it->second.rules) {
        if (r.cls == key.second) alternatives.push_back(&r);
      }
      // No explicit rule for the cluster: the disjunction is empty and the
      // hidden rule composes to nothing.
      std::vector<std::vector<Condition>> next;
      for (const auto& conj : partial) {
        for (const Rule* alt : alternatives) {
          std::vector<Condition> joined = conj;
          joined.insert(joined.end(), alt->conditions.begin(),
                        alt->conditions.end());
          if (auto merged = detail::merge_conjunction(joined)) {
            next.push_back(std::move(*merged));
          }
        }
      }
      partial = std::move(next);
    }
    for (auto& conj : partial) {
      if (conj.empty()) continue;
      if (!seen.insert({hr.cls, conj}).second) continue;
      Rule r;
      r.conditions = std::move(conj);
      r.cls = hr.cls;
      r.id = composed.size() + 1;
      composed.push_back(std::move(r));
    }
  }

  const Dataset clean = clean_contradictions(data);
  for (auto& r : composed) r.coverage = detail::cover_of(clean, r).count();

  RuleSet rs;
  rs.schema = data.schema();
  rs.classes = data.classes();
  rs.provenance = Provenance::Composed;
  auto rules = prune(std::move(composed), clean, cfg);
  rs.default_class = clean.empty() ? hidden_rules.default_class
                                   : choose_default(rules, clean);
  if (!cfg.keep_default_class_rules) {
    rules = drop_default_class_rules(std::move(rules), rs.default_class, clean);
  }
  rs.rules = std::move(rules);
  return rs;
}

// ---------------------------------------------------------------------------
// Rendering and serialization

inline std::string render_condition(const Condition& c,
                                    const std::vector<AttributeSchema>& schema) {
  const auto& attr = schema.at(c.attribute);
  std::string s = attr.name + " (A_" + std::to_string(c.attribute + 1) + ")";
  switch (c.op) {
    case Op::Eq:
      return s + " = " + attr.symbols.at(static_cast<std::size_t>(c.value));
    case Op::Le: return s + " ≤ " + format_number(c.value, 6);
    case Op::Ge: return s + " ≥ " + format_number(c.value, 6);
  }
  return s;
}

/// One "Rule n: If ... then <class>" line per rule, then the default rule.
inline std::string render_text(const RuleSet& rs) {
  std::ostringstream out;
  std::size_t n = 0;
  for (const auto& r : rs.rules) {
    out << "Rule " << ++n << ": If ";
    for (std::size_t i = 0; i < r.conditions.size(); ++i) {
      if (i) out << " and ";
      out << render_condition(r.conditions[i], rs.schema);
    }
    out << " then " << rs.classes.at(r.cls) << '\n';
  }
  out << "Default Rule: " << rs.classes.at(rs.default_class) << ".\n";
  return out.str();
}

inline nlohmann::ordered_json to_json(const RuleSet& rs) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["classes"] = rs.classes;
  j["default"] = rs.classes.at(rs.default_class);
  ordered_json rules = ordered_json::array();
  for (const auto& r : rs.rules) {
    ordered_json jr;
    jr["id"] = r.id;
    jr["class"] = rs.classes.at(r.cls);
    ordered_json conds = ordered_json::array();
    for (const auto& c : r.conditions) {
      const auto& attr = rs.schema.at(c.attribute);
      ordered_json jc;
      jc["attr"] = attr.name;
      jc["op"] = to_string(c.op);
      if (c.op == Op::Eq) {
        jc["value"] = attr.symbols.at(static_cast<std::size_t>(c.value));
      } else {
        jc["value"] = c.value;
      }
      conds.push_back(std::move(jc));
    }
    jr["conditions"] = std::move(conds);
    jr["coverage"] = r.coverage;
    rules.push_back(std::move(jr));
  }
  j["rules"] = std::move(rules);
  j["provenance"] = to_string(rs.provenance);
  return j;
}

/// Inverse of to_json; attribute names and symbols resolve against `schema`.
inline RuleSet ruleset_from_json(const nlohmann::json& j,
                                 const std::vector<AttributeSchema>& schema) {
  try {
    RuleSet rs;
    rs.schema = schema;
    rs.classes = j.at("classes").get<std::vector<std::string>>();
    auto class_index = [&](const std::string& name) {
      auto it = std::find(rs.classes.begin(), rs.classes.end(), name);
      if (it == rs.classes.end()) {
        throw DomainError("unknown class '" + name + "' in rule set");
      }
      return static_cast<std::size_t>(it - rs.classes.begin());
    };
    rs.default_class = class_index(j.at("default").get<std::string>());
    const auto prov = j.at("provenance").get<std::string>();
    if (prov != "direct" && prov != "composed") {
      throw DomainError("unknown provenance '" + prov + "'");
    }
    rs.provenance = prov == "direct" ? Provenance::Direct : Provenance::Composed;
    for (const auto& jr : j.at("rules")) {
      Rule r;
      r.id = jr.at("id").get<std::size_t>();
      r.cls = class_index(jr.at("class").get<std::string>());
      r.coverage = jr.at("coverage").get<std::size_t>();
      for (const auto& jc : jr.at("conditions")) {
        const auto name = jc.at("attr").get<std::string>();
        auto it = std::find_if(schema.begin(), schema.end(),
                               [&](const auto& a) { return a.name == name; });
        if (it == schema.end()) {
          throw DomainError("unknown attribute '" + name + "' in rule set");
        }
        Condition c;
        c.attribute = static_cast<std::size_t>(it - schema.begin());
        const auto op = jc.at("op").get<std::string>();
        if (op == "eq") {
          c.op = Op::Eq;
          auto sym = it->symbol_index(jc.at("value").get<std::string>());
          if (!sym) throw DomainError("unknown symbol for '" + name + "'");
          c.value = static_cast<double>(*sym);
        } else if (op == "le" || op == "ge") {
          c.op = op == "le" ? Op::Le : Op::Ge;
          c.value = jc.at("value").get<double>();
        } else {
          throw DomainError("unknown operator '" + op + "'");
        }
        r.conditions.push_back(c);
      }
      rs.rules.push_back(std::move(r));
    }
    return rs;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed rule set: ") + e.what());
  }
}

}  // namespace rexkit::rex
