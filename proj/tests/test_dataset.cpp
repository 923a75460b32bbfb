#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rebalance/dataset.hpp"
#include "rebalance/errors.hpp"

using namespace rebalance;

namespace {

LabeledDataset make_labeled(std::size_t n0, std::size_t n1, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  LabeledDataset data;
  data.features = Matrix(n0 + n1, d);
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    for (std::size_t f = 0; f < d; ++f) data.features(i, f) = normal(rng);
    data.labels.push_back(i < n0 ? 0 : 1);
  }
  data.class_counts = count_classes(data.labels);
  for (std::size_t f = 0; f < d; ++f) data.feature_names.push_back("f" + std::to_string(f));
  data.class_names = {"0", "1"};
  return data;
}

std::vector<std::vector<double>> row_multiset(const LabeledDataset& d) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto r = d.features.row(i);
    std::vector<double> v(r.begin(), r.end());
    v.push_back(d.labels[i]);
    rows.push_back(v);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST(LoadCsv, ThreeRows) {
  const RawTable t = parse_csv("a,b,label\n1,2,0\n3,4,1\n5,6,0", "label");
  EXPECT_EQ(t.n_rows, 3u);
  EXPECT_EQ(t.columns.size(), 3u);
  EXPECT_EQ(t.label_column, 2u);
  EXPECT_EQ(std::get<double>(t.columns[1][2]), 6.0);
}

TEST(LoadCsv, HeaderOnly) {
  const RawTable t = parse_csv("a,b,label\n", "label");
  EXPECT_EQ(t.n_rows, 0u);
  EXPECT_THROW(preprocess(t, {}), DataError);
}

TEST(LoadCsv, RaggedRow) { EXPECT_THROW(parse_csv("a,b,label\n1,2\n", "label"), DataError); }

TEST(LoadCsv, MissingLabelColumn) { EXPECT_THROW(parse_csv("a,b\n1,2\n", "label"), DataError); }

TEST(LoadCsv, QuotesCrlfAndMissingTokens) {
  const RawTable t = parse_csv("\xEF\xBB\xBFname,x,label\r\n\"a, b\",NA,y\r\n\"say \"\"hi\"\"\",2,n\r\n", "label");
  ASSERT_EQ(t.n_rows, 2u);
  EXPECT_EQ(t.column_names[0], "name");
  EXPECT_EQ(std::get<std::string>(t.columns[0][0]), "a, b");
  EXPECT_EQ(std::get<std::string>(t.columns[0][1]), "say \"hi\"");
  EXPECT_TRUE(std::holds_alternative<Missing>(t.columns[1][0]));
}

TEST(Preprocess, MeanImputation) {
  const RawTable t = parse_csv("x,label\n1,a\n,a\n3,b\n", "label");
  auto [data, report] = preprocess(t, {});
  EXPECT_EQ(data.features(1, 0), 2.0);
  ASSERT_EQ(report.imputations.count("x"), 1u);
  EXPECT_EQ(report.imputations.at("x").strategy, "mean");
  EXPECT_EQ(report.imputations.at("x").fill_value, "2");
}

TEST(Preprocess, LexicographicCategoryCodes) {
  const RawTable t = parse_csv("c,label\nb,0\na,1\nb,0\n", "label");
  PreprocessPolicy policy;
  policy.drop_duplicates = false;
  auto [data, report] = preprocess(t, policy);
  EXPECT_EQ(data.features(0, 0), 1.0);
  EXPECT_EQ(data.features(1, 0), 0.0);
  EXPECT_EQ(data.features(2, 0), 1.0);
  EXPECT_EQ(report.encodings.at("c").at("a"), 0);
  EXPECT_EQ(report.encodings.at("c").at("b"), 1);
}

TEST(Preprocess, ModeImputationForCategorical) {
  const RawTable t = parse_csv("c,label\nb,0\nNA,1\nb,0\na,1\n", "label");
  PreprocessPolicy policy;
  policy.drop_duplicates = false;
  auto [data, report] = preprocess(t, policy);
  EXPECT_EQ(report.imputations.at("c").strategy, "mode");
  EXPECT_EQ(report.imputations.at("c").fill_value, "b");
  EXPECT_EQ(data.features(1, 0), 1.0);
}

TEST(Preprocess, MajorityFractionOfPaperShape) {
  // 191 rows of X and 81 of Y, listed minority first.
  std::string csv = "v,label\n";
  for (int i = 0; i < 81; ++i) csv += std::to_string(i) + ",Y\n";
  for (int i = 0; i < 191; ++i) csv += std::to_string(1000 + i) + ",X\n";
  auto [data, report] = preprocess(parse_csv(csv, "label"), {});
  EXPECT_EQ(data.class_names[0], "X");
  EXPECT_EQ(data.class_counts.at(0), 191u);
  EXPECT_NEAR(static_cast<double>(data.class_counts.at(0)) / data.size(), 0.7022, 5e-5);
  EXPECT_EQ(report.label_encoding.at("X"), 0);
  const ClassSplit split = split_by_class(data);
  EXPECT_EQ(split.majority.size(), 191u);
  EXPECT_EQ(split.minority.size(), 81u);
}

TEST(Preprocess, DropsNullLabelsAndDuplicates) {
  const RawTable t = parse_csv("x,label\n1,0\n1,0\n2,\n3,1\n4,0\n", "label");
  auto [data, report] = preprocess(t, {});
  EXPECT_EQ(report.rows_dropped_null, 1u);
  EXPECT_EQ(report.rows_dropped_duplicate, 1u);
  EXPECT_EQ(data.size(), 3u);
}

TEST(Preprocess, NoImputeDropsIncompleteRows) {
  const RawTable t = parse_csv("x,label\n1,0\nNA,0\n3,1\n4,0\n", "label");
  PreprocessPolicy policy;
  policy.impute = false;
  auto [data, report] = preprocess(t, policy);
  EXPECT_EQ(data.size(), 3u);
  EXPECT_EQ(report.rows_dropped_null, 1u);
  EXPECT_TRUE(report.imputations.empty());
}

TEST(Preprocess, Errors) {
  EXPECT_THROW(preprocess(parse_csv("x,label\nNA,0\nNA,1\n", "label"), {}), DataError);
  EXPECT_THROW(preprocess(parse_csv("x,label\n1,0\n2,0\n", "label"), {}), DataError);
}

TEST(Preprocess, Idempotent) {
  const LabeledDataset d = make_labeled(30, 10, 3, 7);
  const std::string csv = to_csv(d, "label");
  auto [once, r1] = preprocess(parse_csv(csv, "label"), {});
  const std::string again = to_csv(once, "label");
  auto [twice, r2] = preprocess(parse_csv(again, "label"), {});
  EXPECT_EQ(once.features, twice.features);
  EXPECT_EQ(once.labels, twice.labels);
  EXPECT_EQ(r2.rows_dropped_duplicate, 0u);
  EXPECT_TRUE(r2.imputations.empty());
  // The round trip through text is lossless.
  EXPECT_EQ(once.features, d.features);
}

TEST(Preprocess, RandomDirtyTablesComeOutFinite) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::string csv = "a,b,c,label\n";
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 3; ++c) {
        const auto u = rng() % 6;
        csv += u == 0 ? "" : u == 1 ? "NA" : u == 2 ? "cat" + std::to_string(rng() % 3)
                                               : std::to_string(static_cast<int>(rng() % 100));
        csv += ',';
      }
      csv += std::to_string(r % 3 == 0) + "\n";
    }
    auto [data, report] = preprocess(parse_csv(csv, "label"), {});
    for (double v : data.features.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(SplitByClass, BalancedTieGoesToLowerId) {
  const LabeledDataset d = make_labeled(10, 10, 2, 1);
  const ClassSplit s = split_by_class(d);
  EXPECT_EQ(s.majority_class, 0);
  EXPECT_EQ(s.majority.size(), 10u);
  EXPECT_EQ(s.minority.size(), 10u);
}

TEST(SplitByClass, SingleClassAndThreeClasses) {
  LabeledDataset d = make_labeled(5, 0, 2, 1);
  EXPECT_THROW(split_by_class(d), DataError);
  d = make_labeled(6, 3, 2, 1);
  d.labels[0] = 2;
  d.class_counts = count_classes(d.labels);
  EXPECT_THROW(split_by_class(d), DataError);
}

TEST(SplitByClass, ConcatReconstructsMultiset) {
  LabeledDataset d = shuffled(make_labeled(40, 12, 3, 5), 9);
  const ClassSplit s = split_by_class(d);
  EXPECT_EQ(row_multiset(concat(s.majority, s.minority)), row_multiset(d));
}

TEST(TrainTestSplit, StratifiedCounts) {
  const LabeledDataset d = make_labeled(80, 20, 2, 2);
  const TrainTestSplit s = train_test_split(d, 0.2, 42);
  EXPECT_EQ(s.test.class_counts.at(0), 16u);
  EXPECT_EQ(s.test.class_counts.at(1), 4u);
  EXPECT_EQ(s.train.size(), 80u);
}

TEST(TrainTestSplit, Deterministic) {
  const LabeledDataset d = make_labeled(80, 20, 2, 2);
  const TrainTestSplit a = train_test_split(d, 0.2, 42);
  const TrainTestSplit b = train_test_split(d, 0.2, 42);
  EXPECT_EQ(to_csv(a.train, "y"), to_csv(b.train, "y"));
  EXPECT_EQ(to_csv(a.test, "y"), to_csv(b.test, "y"));
  const TrainTestSplit c = train_test_split(d, 0.2, 43);
  EXPECT_NE(to_csv(a.test, "y"), to_csv(c.test, "y"));
}

TEST(TrainTestSplit, RoundingRule) {
  // Hand table for fraction 0.2: round(0.2 n) floored at 1.
  const std::size_t expected[] = {1, 1, 1, 1, 1, 1, 1, 2, 2, 2};
  for (std::size_t n = 1; n <= 10; ++n) EXPECT_EQ(stratified_test_count(n, 0.2), expected[n - 1]) << n;
  const LabeledDataset d = make_labeled(10, 3, 2, 4);
  EXPECT_EQ(train_test_split(d, 0.2, 0).test.class_counts.at(1), 1u);
}

TEST(TrainTestSplit, ClassTooSmall) {
  LabeledDataset d = make_labeled(10, 1, 2, 4);
  EXPECT_THROW(train_test_split(d, 0.2, 0), DataError);
}

TEST(WriteCsv, LabelTextRoundTrip) {
  auto [data, report] = preprocess(parse_csv("x,y,label\n1.5,2,yes\n3,4,no\n5,6,no\n", "label"), {});
  const std::string csv = to_csv(data, "label");
  EXPECT_NE(csv.find("1.5,2,yes"), std::string::npos);
  auto [back, r2] = preprocess(parse_csv(csv, "label"), {});
  EXPECT_EQ(back.features, data.features);
  EXPECT_EQ(back.class_names, data.class_names);
}
