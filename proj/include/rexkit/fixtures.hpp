#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rexkit/dataset.hpp"

namespace rexkit {

namespace detail {

struct FixtureRow {
  std::vector<std::string_view> fields;  // attribute tokens, class last
};

inline Dataset build_fixture(std::string name,
                             std::vector<AttributeSchema> schema,
                             std::vector<std::string> classes,
                             const std::vector<FixtureRow>& rows) {
  std::vector<Pattern> patterns;
  for (const auto& row : rows) {
    Pattern p;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const std::string tok(row.fields[a]);
      if (schema[a].is_categorical()) {
        p.values.push_back(static_cast<double>(*schema[a].symbol_index(tok)));
      } else {
        p.values.push_back(*parse_number(tok));
      }
    }
    const std::string cls(row.fields.back());
    p.label = static_cast<std::size_t>(
        std::find(classes.begin(), classes.end(), cls) - classes.begin());
    patterns.push_back(std::move(p));
  }
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].is_categorical()) continue;
    schema[a].min = schema[a].max = patterns.front().values[a];
    for (const auto& p : patterns) {
      schema[a].min = std::min(schema[a].min, p.values[a]);
      schema[a].max = std::max(schema[a].max, p.values[a]);
    }
  }
  return Dataset(std::move(name), std::move(schema), std::move(classes),
                 std::move(patterns));
}

}  // namespace detail

/// Quinlan's 14-day play-golf table with numeric temperature and humidity.
inline Dataset golf_fixture() {
  std::vector<AttributeSchema> schema = {
      AttributeSchema::categorical("Outlook", {"sunny", "overcast", "rainy"}),
      AttributeSchema::continuous("Temperature"),
      AttributeSchema::continuous("Humidity"),
      AttributeSchema::categorical("Wind", {"weak", "strong"}),
  };
  std::vector<detail::FixtureRow> rows = {
      {{"sunny", "85", "85", "weak", "don't play"}},
      {{"sunny", "80", "90", "strong", "don't play"}},
      {{"overcast", "83", "86", "weak", "play"}},
      {{"rainy", "70", "96", "weak", "play"}},
      {{"rainy", "68", "80", "weak", "play"}},
      {{"rainy", "65", "70", "strong", "don't play"}},
      {{"overcast", "64", "65", "strong", "play"}},
      {{"sunny", "72", "95", "weak", "don't play"}},
      {{"sunny", "69", "70", "weak", "play"}},
      {{"rainy", "75", "80", "weak", "play"}},
      {{"sunny", "75", "70", "strong", "play"}},
      {{"overcast", "72", "90", "strong", "play"}},
      {{"overcast", "81", "75", "weak", "play"}},
      {{"rainy", "71", "91", "strong", "don't play"}},
  };
  return detail::build_fixture("golf", std::move(schema),
                               {"play", "don't play"}, rows);
}

/**
 * Eleven-row season table. The original rows are not available; these
 * were written so that tree colour and temperature alone separate the
 * seasons the way the reference season rules do (yellow or leafless trees
 * mean autumn, low temperature winter, high temperature summer, everything
 * else spring). The "Weather" attribute name is likewise a reconstruction.
 */
inline Dataset season_fixture() {
  std::vector<AttributeSchema> schema = {
      AttributeSchema::categorical(
          "Weather", {"sunny", "cloudy", "rainy", "snowy", "windy"}),
      AttributeSchema::categorical("Tree",
                                   {"green", "blossom", "yellow", "leafless"}),
      AttributeSchema::categorical("Temperature", {"low", "medium", "high"}),
  };
  std::vector<detail::FixtureRow> rows = {
      {{"sunny", "blossom", "medium", "spring"}},
      {{"windy", "blossom", "medium", "spring"}},
      {{"rainy", "green", "medium", "spring"}},
      {{"cloudy", "green", "medium", "spring"}},
      {{"sunny", "green", "high", "summer"}},
      {{"cloudy", "green", "high", "summer"}},
      {{"rainy", "yellow", "medium", "autumn"}},
      {{"windy", "yellow", "medium", "autumn"}},
      {{"cloudy", "leafless", "medium", "autumn"}},
      {{"snowy", "green", "low", "winter"}},
      {{"windy", "green", "low", "winter"}},
  };
  return detail::build_fixture("season", std::move(schema),
                               {"spring", "summer", "autumn", "winter"}, rows);
}

inline Dataset builtin_fixture(std::string_view name) {
  if (name == "golf") return golf_fixture();
  if (name == "season") return season_fixture();
  throw UsageError("unknown fixture '" + std::string(name) +
                   "' (expected golf or season)");
}

// ---------------------------------------------------------------------------
// UCI file layouts

inline std::vector<AttributeSchema> iris_schema() {
  return {
      AttributeSchema::continuous("Sepal-length"),
      AttributeSchema::continuous("Sepal-width"),
      AttributeSchema::continuous("Petal-length"),
      AttributeSchema::continuous("Petal-width"),
  };
}

/// iris.data: four measurements, class name last.
inline CsvOptions iris_csv_options() {
  CsvOptions o;
  o.class_column = 4;
  o.classes = {"Iris-setosa", "Iris-versicolor", "Iris-virginica"};
  return o;
}

inline Dataset load_iris(const std::string& path) {
  Dataset d = load_csv(path, iris_schema(), iris_csv_options());
  return Dataset("iris", d.schema(), d.classes(), d.patterns());
}

/// Nine cytology scores, each an integer 1..10.
inline std::vector<AttributeSchema> breast_cancer_schema() {
  const char* names[] = {"Clump thickness",
                         "Uniformity of cell size",
                         "Uniformity of cell shape",
                         "Marginal adhesion",
                         "Single epithelial cell size",
                         "Bare nuclei",
                         "Bland chromatin",
                         "Normal nucleoli",
                         "Mitosis"};
  std::vector<AttributeSchema> schema;
  for (const char* n : names) {
    schema.push_back(AttributeSchema::continuous(n, 10.0));
  }
  return schema;
}

/// breast-cancer-wisconsin.data: sample id, nine scores, class 2 or 4.
inline CsvOptions breast_cancer_csv_options() {
  CsvOptions o;
  o.class_column = 10;
  o.skip_columns = {0};
  o.classes = {"benign", "malignant"};
  o.class_aliases = {{"2", "benign"}, {"4", "malignant"}};
  return o;
}

inline Dataset load_breast_cancer(const std::string& path) {
  Dataset d = load_csv(path, breast_cancer_schema(),
                       breast_cancer_csv_options());
  return Dataset("breast-cancer", d.schema(), d.classes(), d.patterns());
}

}  // namespace rexkit
