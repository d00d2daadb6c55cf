#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rexkit/error.hpp"
#include "rexkit/random.hpp"

namespace rexkit {

enum class AttributeKind { Continuous, Categorical };

/**
 * One input attribute. Categorical values are stored in patterns as the
 * index of their symbol; continuous values are stored as-is.
 */
struct AttributeSchema {
  std::string name;
  AttributeKind kind = AttributeKind::Continuous;
  std::vector<std::string> symbols;  // categorical domain, ordered
  double min = 0.0;                  // continuous observed range
  double max = 0.0;
  // Integer-coded attributes (e.g. 1..10 scores) are normalized by division
  // instead of by their observed range.
  std::optional<double> scale_divisor;
  bool normalized = false;

  static AttributeSchema continuous(std::string name,
                                    std::optional<double> divisor = {}) {
    AttributeSchema a;
    a.name = std::move(name);
    a.kind = AttributeKind::Continuous;
    a.scale_divisor = divisor;
    return a;
  }

  static AttributeSchema categorical(std::string name,
                                     std::vector<std::string> symbols) {
    AttributeSchema a;
    a.name = std::move(name);
    a.kind = AttributeKind::Categorical;
    a.symbols = std::move(symbols);
    return a;
  }

  bool is_categorical() const noexcept {
    return kind == AttributeKind::Categorical;
  }

  std::optional<std::size_t> symbol_index(std::string_view sym) const {
    auto it = std::find(symbols.begin(), symbols.end(), sym);
    if (it == symbols.end()) return std::nullopt;
    return static_cast<std::size_t>(it - symbols.begin());
  }

  bool admits(double v) const {
    if (is_categorical()) {
      return v >= 0 && v == std::floor(v) &&
             v < static_cast<double>(symbols.size());
    }
    return std::isfinite(v) && v >= min && v <= max;
  }
};

struct Pattern {
  std::vector<double> values;
  std::size_t label = 0;
};

namespace detail {

inline void check_schema(const std::vector<AttributeSchema>& schema) {
  for (const auto& a : schema) {
    if (a.is_categorical()) {
      if (a.symbols.empty()) {
        throw DomainError("categorical attribute '" + a.name +
                          "' has an empty domain");
      }
      std::set<std::string> seen(a.symbols.begin(), a.symbols.end());
      if (seen.size() != a.symbols.size()) {
        throw DomainError("categorical attribute '" + a.name +
                          "' has duplicate symbols");
      }
    } else if (!(a.min <= a.max)) {
      throw DomainError("continuous attribute '" + a.name +
                        "' has min > max");
    }
  }
}

}  // namespace detail

/// Immutable labelled table. Pattern order is the insertion order.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::string name, std::vector<AttributeSchema> schema,
          std::vector<std::string> classes, std::vector<Pattern> patterns)
      : name_(std::move(name)),
        schema_(std::move(schema)),
        classes_(std::move(classes)),
        patterns_(std::move(patterns)) {
    detail::check_schema(schema_);
    std::set<std::string> seen(classes_.begin(), classes_.end());
    if (seen.size() != classes_.size()) {
      throw DomainError("duplicate class names");
    }
    for (std::size_t r = 0; r < patterns_.size(); ++r) {
      const Pattern& p = patterns_[r];
      if (p.values.size() != schema_.size()) {
        throw DomainError("pattern " + std::to_string(r) + " has arity " +
                          std::to_string(p.values.size()) + ", expected " +
                          std::to_string(schema_.size()));
      }
      if (p.label >= classes_.size()) {
        throw DomainError("pattern " + std::to_string(r) +
                          " has an out-of-range label");
      }
      for (std::size_t a = 0; a < schema_.size(); ++a) {
        if (!schema_[a].admits(p.values[a])) {
          throw DomainError("pattern " + std::to_string(r) +
                            ": value outside the domain of '" +
                            schema_[a].name + "'");
        }
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<AttributeSchema>& schema() const noexcept {
    return schema_;
  }
  const AttributeSchema& attribute(std::size_t i) const { return schema_.at(i); }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }
  const Pattern& operator[](std::size_t i) const { return patterns_[i]; }

  std::size_t size() const noexcept { return patterns_.size(); }
  bool empty() const noexcept { return patterns_.empty(); }
  std::size_t attribute_count() const noexcept { return schema_.size(); }
  std::size_t class_count() const noexcept { return classes_.size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes_.size(), 0);
    for (const auto& p : patterns_) ++counts[p.label];
    return counts;
  }

  /// Same attribute table, new label column over a new class list.
  Dataset relabeled(std::vector<std::size_t> labels,
                    std::vector<std::string> classes) const {
    if (labels.size() != patterns_.size()) {
      throw UsageError("relabel: label count does not match pattern count");
    }
    std::vector<Pattern> ps = patterns_;
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i].label = labels[i];
    return Dataset(name_, schema_, std::move(classes), std::move(ps));
  }

  Dataset subset(const std::vector<std::size_t>& indices) const {
    std::vector<Pattern> ps;
    ps.reserve(indices.size());
    for (std::size_t i : indices) ps.push_back(patterns_.at(i));
    return Dataset(name_, schema_, classes_, std::move(ps));
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    if (a.classes_ != b.classes_ || a.patterns_.size() != b.patterns_.size() ||
        a.schema_.size() != b.schema_.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.patterns_.size(); ++i) {
      if (a.patterns_[i].label != b.patterns_[i].label ||
          a.patterns_[i].values != b.patterns_[i].values) {
        return false;
      }
    }
    return true;
  }

 private:
  std::string name_;
  std::vector<AttributeSchema> schema_;
  std::vector<std::string> classes_;
  std::vector<Pattern> patterns_;
};

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  std::size_t class_column = 0;
  bool has_header = false;
  std::vector<std::size_t> skip_columns;  // e.g. sample id columns
  std::vector<std::string> classes;       // empty: order of first appearance
  std::map<std::string, std::string> class_aliases;  // raw token -> name
  std::string missing_token = "?";
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  s = s.substr(b, e - b);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

/// Reads non-blank lines; returns (1-based line number, fields).
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(
    std::istream& in) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    rows.emplace_back(lineno, split_fields(line));
  }
  return rows;
}

}  // namespace detail

/// Shortest decimal text that reads back to the same double, or the
/// shortest text at the given number of significant digits.
inline std::string format_number(double v, int significant = 0) {
  char buf[64];
  auto res = significant > 0
                 ? std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::general, significant)
                 : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/**
 * Parses comma-separated rows against a schema. Continuous ranges in the
 * returned schema are the observed [min, max]. Missing tokens are imputed
 * with the attribute's mode (lowest value on ties).
 */
inline Dataset parse_csv(std::istream& in, std::vector<AttributeSchema> schema,
                         const CsvOptions& opts, std::string name = {}) {
  auto rows = detail::read_rows(in);
  if (opts.has_header && !rows.empty()) rows.erase(rows.begin());
  if (rows.empty()) throw ParseError(0, "no data rows");

  const std::size_t width = schema.size() + 1 + opts.skip_columns.size();
  if (opts.class_column >= width) {
    throw UsageError("class column " + std::to_string(opts.class_column) +
                     " is outside a " + std::to_string(width) +
                     "-field row");
  }
  std::set<std::size_t> skipped(opts.skip_columns.begin(),
                                opts.skip_columns.end());
  if (skipped.count(opts.class_column)) {
    throw UsageError("class column is also marked as skipped");
  }
  std::vector<std::size_t> attr_columns;
  for (std::size_t c = 0; c < width; ++c) {
    if (c != opts.class_column && !skipped.count(c)) attr_columns.push_back(c);
  }

  std::vector<std::string> classes = opts.classes;
  const bool fixed_classes = !classes.empty();
  std::vector<Pattern> patterns;
  std::vector<std::vector<std::size_t>> missing(schema.size());

  for (const auto& [lineno, fields] : rows) {
    if (fields.size() != width) {
      throw ParseError(lineno, "expected " + std::to_string(width) +
                                   " fields, found " +
                                   std::to_string(fields.size()));
    }
    std::string cls = fields[opts.class_column];
    if (auto it = opts.class_aliases.find(cls); it != opts.class_aliases.end()) {
      cls = it->second;
    }
    auto cit = std::find(classes.begin(), classes.end(), cls);
    if (cit == classes.end()) {
      if (fixed_classes || cls.empty() || cls == opts.missing_token) {
        throw DomainError("row " + std::to_string(lineno) +
                          ": unknown class '" + cls + "'");
      }
      classes.push_back(cls);
      cit = classes.end() - 1;
    }
    Pattern p;
    p.label = static_cast<std::size_t>(cit - classes.begin());
    p.values.resize(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const std::string& tok = fields[attr_columns[a]];
      if (tok == opts.missing_token || tok.empty()) {
        missing[a].push_back(patterns.size());
        p.values[a] = 0.0;
        continue;
      }
      if (schema[a].is_categorical()) {
        auto idx = schema[a].symbol_index(tok);
        if (!idx) {
          throw DomainError("row " + std::to_string(lineno) + ": '" + tok +
                            "' is not in the domain of '" + schema[a].name +
                            "'");
        }
        p.values[a] = static_cast<double>(*idx);
      } else {
        auto v = detail::parse_number(tok);
        if (!v) {
          throw ParseError(lineno, "'" + tok + "' is not a number (" +
                                       schema[a].name + ")");
        }
        p.values[a] = *v;
      }
    }
    patterns.push_back(std::move(p));
  }

  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (missing[a].empty()) continue;
    std::map<double, std::size_t> freq;
    std::set<std::size_t> miss(missing[a].begin(), missing[a].end());
    for (std::size_t r = 0; r < patterns.size(); ++r) {
      if (!miss.count(r)) ++freq[patterns[r].values[a]];
    }
    if (freq.empty()) {
      throw DomainError("attribute '" + schema[a].name +
                        "' has no observed values to impute from");
    }
    double mode = freq.begin()->first;
    std::size_t best = 0;
    for (const auto& [v, n] : freq) {
      if (n > best) {
        best = n;
        mode = v;
      }
    }
    for (std::size_t r : missing[a]) patterns[r].values[a] = mode;
  }

  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].is_categorical()) continue;
    double lo = patterns[0].values[a], hi = lo;
    for (const auto& p : patterns) {
      lo = std::min(lo, p.values[a]);
      hi = std::max(hi, p.values[a]);
    }
    schema[a].min = lo;
    schema[a].max = hi;
  }
  return Dataset(std::move(name), std::move(schema), std::move(classes),
                 std::move(patterns));
}

inline Dataset load_csv(const std::string& path,
                        std::vector<AttributeSchema> schema,
                        const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) {
    name = name.substr(slash + 1);
  }
  return parse_csv(in, std::move(schema), opts, name);
}

/**
 * Builds a schema from the file itself: columns whose every non-missing
 * token parses as a number are continuous, the rest categorical with
 * symbols in order of first appearance.
 */
inline std::vector<AttributeSchema> infer_schema(std::istream& in,
                                                 const CsvOptions& opts) {
  auto rows = detail::read_rows(in);
  std::vector<std::string> header;
  if (opts.has_header && !rows.empty()) {
    header = rows.front().second;
    rows.erase(rows.begin());
  }
  if (rows.empty()) throw ParseError(0, "no data rows");
  const std::size_t width = rows.front().second.size();
  std::set<std::size_t> skipped(opts.skip_columns.begin(),
                                opts.skip_columns.end());
  std::vector<AttributeSchema> schema;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == opts.class_column || skipped.count(c)) continue;
    std::string name =
        c < header.size() ? header[c] : "A_" + std::to_string(schema.size() + 1);
    bool numeric = true;
    std::vector<std::string> symbols;
    for (const auto& [lineno, fields] : rows) {
      if (fields.size() != width) {
        throw ParseError(lineno, "expected " + std::to_string(width) +
                                     " fields, found " +
                                     std::to_string(fields.size()));
      }
      const std::string& tok = fields[c];
      if (tok == opts.missing_token || tok.empty()) continue;
      if (!detail::parse_number(tok)) numeric = false;
      if (std::find(symbols.begin(), symbols.end(), tok) == symbols.end()) {
        symbols.push_back(tok);
      }
    }
    if (numeric) {
      schema.push_back(AttributeSchema::continuous(name));
    } else {
      schema.push_back(AttributeSchema::categorical(name, symbols));
    }
  }
  return schema;
}

/// Writes a header row then one row per pattern, class name last.
inline void write_csv(std::ostream& out, const Dataset& data) {
  for (const auto& a : data.schema()) out << a.name << ',';
  out << "class\n";
  for (const auto& p : data.patterns()) {
    for (std::size_t a = 0; a < data.attribute_count(); ++a) {
      const auto& attr = data.attribute(a);
      if (attr.is_categorical()) {
        out << attr.symbols[static_cast<std::size_t>(p.values[a])];
      } else {
        out << format_number(p.values[a]);
      }
      out << ',';
    }
    out << data.classes()[p.label] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Transformations

/**
 * Scales continuous attributes into [0,1]: by the declared divisor for
 * integer-coded attributes, otherwise min-max over the observed values.
 * Categorical attributes and already-normalized attributes are untouched,
 * so the operation is idempotent.
 */
inline Dataset normalize(const Dataset& data, Warnings* warnings = nullptr) {
  std::vector<AttributeSchema> schema = data.schema();
  std::vector<Pattern> patterns = data.patterns();
  for (std::size_t a = 0; a < schema.size(); ++a) {
    AttributeSchema& attr = schema[a];
    if (attr.is_categorical() || attr.normalized) continue;
    if (attr.scale_divisor) {
      const double d = *attr.scale_divisor;
      for (auto& p : patterns) p.values[a] /= d;
      attr.min /= d;
      attr.max /= d;
    } else if (attr.max > attr.min) {
      const double lo = attr.min, span = attr.max - attr.min;
      for (auto& p : patterns) p.values[a] = (p.values[a] - lo) / span;
      attr.min = 0.0;
      attr.max = 1.0;
    } else {
      warn(warnings, "attribute '" + attr.name +
                         "' is constant; normalized to 0.0");
      for (auto& p : patterns) p.values[a] = 0.0;
      attr.min = attr.max = 0.0;
    }
    attr.normalized = true;
  }
  return Dataset(data.name(), std::move(schema), data.classes(),
                 std::move(patterns));
}

/**
 * Per-class shuffle with a seeded generator, then the first
 * round(test_fraction * class_size) indices of each class go to the test
 * set. Both halves keep the original relative order.
 */
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                                    double test_fraction,
                                                    std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in [0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(data.class_count());
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data[i].label].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> in_test(data.size(), false);
  for (auto& members : by_class) {
    rng.shuffle(members);
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    n_test = std::min(n_test, members.size());
    for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = true;
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (in_test[i] ? test_idx : train_idx).push_back(i);
  }
  return {data.subset(train_idx), data.subset(test_idx)};
}

namespace detail {

/// Label histogram per distinct attribute vector, in first-seen order.
inline std::map<std::vector<double>, std::vector<std::size_t>> vector_groups(
    const Dataset& data) {
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (const auto& p : data.patterns()) {
    auto& hist = groups[p.values];
    if (hist.empty()) hist.assign(data.class_count(), 0);
    ++hist[p.label];
  }
  return groups;
}

inline std::size_t majority_index(const std::vector<std::size_t>& hist) {
  return static_cast<std::size_t>(
      std::max_element(hist.begin(), hist.end()) - hist.begin());
}

}  // namespace detail

/// Fraction of patterns that disagree with the majority label of their
/// identical-attribute-vector group.
inline double inconsistency_rate(const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t minority = 0;
  for (const auto& [vec, hist] : detail::vector_groups(data)) {
    std::size_t total = 0;
    for (auto n : hist) total += n;
    minority += total - hist[detail::majority_index(hist)];
  }
  return static_cast<double>(minority) / static_cast<double>(data.size());
}

/// Rewrites every label to its group's majority (ties to the lowest index).
inline Dataset clean_contradictions(const Dataset& data) {
  auto groups = detail::vector_groups(data);
  std::vector<Pattern> patterns = data.patterns();
  for (auto& p : patterns) p.label = detail::majority_index(groups[p.values]);
  return Dataset(data.name(), data.schema(), data.classes(),
                 std::move(patterns));
}

}  // namespace rexkit
