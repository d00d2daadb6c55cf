#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "rexkit/rexkit.hpp"

using namespace rexkit;

namespace {

std::vector<AttributeSchema> two_numbers() {
  return {AttributeSchema::continuous("a"), AttributeSchema::continuous("b")};
}

Dataset parse(const std::string& text, std::vector<AttributeSchema> schema,
              CsvOptions opts) {
  std::istringstream in(text);
  return parse_csv(in, std::move(schema), opts, "t");
}

CsvOptions class_last(std::size_t col) {
  CsvOptions o;
  o.class_column = col;
  return o;
}

}  // namespace

TEST(Fixtures, GolfShape) {
  const auto g = golf_fixture();
  EXPECT_EQ(g.size(), 14u);
  EXPECT_EQ(g.attribute_count(), 4u);
  EXPECT_EQ(g.class_count(), 2u);
  EXPECT_EQ(g.class_counts(), (std::vector<std::size_t>{9, 5}));
}

TEST(Fixtures, SeasonShape) {
  const auto s = season_fixture();
  EXPECT_EQ(s.size(), 11u);
  EXPECT_EQ(s.attribute_count(), 3u);
  EXPECT_EQ(s.class_count(), 4u);
  EXPECT_EQ(s.attribute(1).name, "Tree");
  EXPECT_EQ(s.attribute(2).name, "Temperature");
}

TEST(Fixtures, UnknownNameIsUsageError) {
  EXPECT_THROW(builtin_fixture("chess"), UsageError);
}

TEST(Fixtures, UciFilesLoad) {
  const auto iris = load_iris(std::string(REXKIT_DATA_DIR) + "/iris.data");
  EXPECT_EQ(iris.size(), 150u);
  EXPECT_EQ(iris.attribute_count(), 4u);
  EXPECT_EQ(iris.class_counts(), (std::vector<std::size_t>{50, 50, 50}));

  const auto bc = load_breast_cancer(std::string(REXKIT_DATA_DIR) +
                                     "/breast-cancer-wisconsin.data");
  EXPECT_EQ(bc.size(), 699u);
  EXPECT_EQ(bc.attribute_count(), 9u);
  EXPECT_EQ(bc.classes(), (std::vector<std::string>{"benign", "malignant"}));
  EXPECT_EQ(bc.class_counts(), (std::vector<std::size_t>{458, 241}));
}

TEST(Csv, ParsesNumbersAndCategoricals) {
  std::vector<AttributeSchema> schema = {
      AttributeSchema::continuous("x"),
      AttributeSchema::categorical("c", {"u", "v"})};
  const auto d = parse("1.5,v,yes\n2,u,no\n", schema, class_last(2));
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].values, (std::vector<double>{1.5, 1.0}));
  EXPECT_EQ(d.classes(), (std::vector<std::string>{"yes", "no"}));
  EXPECT_DOUBLE_EQ(d.attribute(0).min, 1.5);
  EXPECT_DOUBLE_EQ(d.attribute(0).max, 2.0);
}

TEST(Csv, MissingValueTakesColumnMode) {
  const auto d = parse("1,3,a\n1,4,a\n2,4,b\n?,?,b\n", two_numbers(),
                       class_last(2));
  EXPECT_EQ(d[3].values, (std::vector<double>{1.0, 4.0}));
}

TEST(Csv, ErrorsCarryRowNumber) {
  try {
    parse("1,2,a\n1,x,a\n", two_numbers(), class_last(2));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
  }
  EXPECT_THROW(parse("1,2,a\n1,a\n", two_numbers(), class_last(2)), ParseError);
}

TEST(Csv, EmptyInputIsParseError) {
  EXPECT_THROW(parse("", two_numbers(), class_last(2)), ParseError);
}

TEST(Csv, UnknownSymbolIsDataError) {
  std::vector<AttributeSchema> schema = {
      AttributeSchema::categorical("c", {"u", "v"})};
  EXPECT_THROW(parse("w,yes\n", schema, class_last(1)), DataError);
}

TEST(Csv, MissingFileIsDataError) {
  EXPECT_THROW(load_csv("/nonexistent/file.csv", two_numbers(), class_last(2)),
               DataError);
}

TEST(Csv, WriteThenReadRoundTrips) {
  const auto g = golf_fixture();
  std::ostringstream out;
  write_csv(out, g);
  CsvOptions o;
  o.has_header = true;
  o.class_column = 4;
  o.classes = g.classes();
  std::istringstream in(out.str());
  auto schema = g.schema();
  const auto back = parse_csv(in, schema, o, "golf");
  EXPECT_TRUE(back == g);
}

TEST(Csv, SchemaInference) {
  std::istringstream in("x,colour,cls\n1,red,a\n2.5,blue,b\n?,red,a\n");
  CsvOptions o;
  o.has_header = true;
  o.class_column = 2;
  const auto schema = infer_schema(in, o);
  ASSERT_EQ(schema.size(), 2u);
  EXPECT_FALSE(schema[0].is_categorical());
  EXPECT_TRUE(schema[1].is_categorical());
  EXPECT_EQ(schema[1].symbols, (std::vector<std::string>{"red", "blue"}));
}

TEST(Dataset, RejectsOutOfDomainValues) {
  auto schema = two_numbers();
  schema[0].max = 1.0;
  schema[1].max = 1.0;
  EXPECT_THROW(Dataset("d", schema, {"a"}, {Pattern{{2.0, 0.0}, 0}}),
               DomainError);
  EXPECT_THROW(Dataset("d", schema, {"a"}, {Pattern{{0.0}, 0}}), DomainError);
  EXPECT_THROW(Dataset("d", schema, {"a"}, {Pattern{{0.0, 0.0}, 3}}),
               DomainError);
}

TEST(Normalize, MinMaxAndDivisor) {
  auto schema = two_numbers();
  schema[1].scale_divisor = 10.0;
  const auto d = parse("2,3,a\n4,7,b\n6,10,a\n", schema, class_last(2));
  const auto n = normalize(d);
  EXPECT_DOUBLE_EQ(n[0].values[0], 0.0);
  EXPECT_DOUBLE_EQ(n[1].values[0], 0.5);
  EXPECT_DOUBLE_EQ(n[2].values[0], 1.0);
  EXPECT_DOUBLE_EQ(n[1].values[1], 0.7);
}

TEST(Normalize, Idempotent) {
  const auto iris = load_iris(std::string(REXKIT_DATA_DIR) + "/iris.data");
  const auto once = normalize(iris);
  EXPECT_TRUE(normalize(once) == once);
  for (const auto& p : once.patterns()) {
    for (double v : p.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Normalize, ConstantColumnWarns) {
  const auto d = parse("5,1,a\n5,2,b\n", two_numbers(), class_last(2));
  Warnings w;
  const auto n = normalize(d, &w);
  EXPECT_FALSE(w.empty());
  EXPECT_DOUBLE_EQ(n[0].values[0], 0.0);
}

TEST(Split, StratifiedCountsAndDeterminism) {
  const auto iris = load_iris(std::string(REXKIT_DATA_DIR) + "/iris.data");
  const auto [train, test] = stratified_split(iris, 0.2, 7);
  EXPECT_EQ(test.class_counts(), (std::vector<std::size_t>{10, 10, 10}));
  EXPECT_EQ(train.size() + test.size(), iris.size());
  const auto [train2, test2] = stratified_split(iris, 0.2, 7);
  EXPECT_TRUE(test == test2);
  EXPECT_TRUE(train == train2);
  EXPECT_THROW(stratified_split(iris, 1.0, 7), UsageError);
}

TEST(Inconsistency, HandComputed) {
  // Vector (1,1): labels a,a,b -> one minority; vector (2,2): b -> none.
  const auto d = parse("1,1,a\n1,1,a\n1,1,b\n2,2,b\n", two_numbers(),
                       class_last(2));
  EXPECT_DOUBLE_EQ(inconsistency_rate(d), 0.25);
  const auto clean = clean_contradictions(d);
  EXPECT_DOUBLE_EQ(inconsistency_rate(clean), 0.0);
  EXPECT_EQ(clean[2].label, 0u);
}

TEST(Inconsistency, MatchesOracleOnRandomData) {
  Rng rng(11);
  for (int k = 0; k < 40; ++k) {
    const auto d = oracle::random_dataset(rng, 20 + rng.below(20), rng.below(6));
    EXPECT_NEAR(inconsistency_rate(d), oracle::inconsistency_rate(d), 1e-12);
    EXPECT_DOUBLE_EQ(inconsistency_rate(clean_contradictions(d)), 0.0);
  }
}

TEST(Inconsistency, SmallBenchmarksAreConsistent) {
  EXPECT_DOUBLE_EQ(inconsistency_rate(golf_fixture()), 0.0);
  EXPECT_DOUBLE_EQ(inconsistency_rate(season_fixture()), 0.0);
  const auto iris = load_iris(std::string(REXKIT_DATA_DIR) + "/iris.data");
  EXPECT_NEAR(inconsistency_rate(iris), oracle::inconsistency_rate(iris), 1e-12);
}

TEST(Format, Numbers) {
  EXPECT_EQ(format_number(85.0), "85");
  EXPECT_EQ(format_number(2.45), "2.45");
  EXPECT_EQ(format_number(2.6500000000000004, 6), "2.65");
}

TEST(Rng, ReproducibleStreams) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.below(1000), b.below(1000));
  Rng c(5);
  std::vector<int> v{1, 2, 3, 4, 5, 6};
  c.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{1, 2, 3, 4, 5, 6}));
}
