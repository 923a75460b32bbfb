#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rebalance/matrix.hpp"

namespace rebalance {

// One CSV cell after tokenization: missing, numeric, or free text.
struct Missing {
  auto operator<=>(const Missing&) const = default;
};
using Cell = std::variant<Missing, double, std::string>;

struct RawTable {
  std::vector<std::string> column_names;
  std::vector<std::vector<Cell>> columns;  // columns[c][r]
  std::size_t n_rows = 0;
  std::size_t label_column = 0;
};

inline const std::set<std::string>& default_missing_tokens() {
  static const std::set<std::string> tokens{"", "NA", "NaN", "null"};
  return tokens;
}

// Numeric features with class ids. Class 0 is the majority after preprocess;
// class_names maps ids back to the label text seen in the input.
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::map<int, std::size_t> class_counts;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }

  // Rows in the given order; class_counts recomputed.
  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

std::map<int, std::size_t> count_classes(std::span<const int> labels);

// Throws DataError if features are non-finite, counts disagree with labels,
// or the shape is degenerate (n < 2, d < 1, fewer than 2 classes).
void check_labeled(const LabeledDataset& data);

// Concatenates rows of `b` after rows of `a`. Schemas must match.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

LabeledDataset shuffled(const LabeledDataset& data, std::uint64_t seed);

struct ImputationRecord {
  std::string strategy;  // "mean" or "mode"
  std::string fill_value;
};

struct PreprocessReport {
  std::size_t rows_dropped_null = 0;
  std::size_t rows_dropped_duplicate = 0;
  std::map<std::string, ImputationRecord> imputations;
  std::map<std::string, std::map<std::string, int>> encodings;
  std::map<std::string, int> label_encoding;
};

struct PreprocessPolicy {
  bool drop_duplicates = true;
  // When false, rows with any missing feature cell are dropped instead.
  bool impute = true;
};

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                  const std::set<std::string>& missing_tokens = default_missing_tokens());

// Same parser over in-memory text; used by load_csv and by tests.
RawTable parse_csv(std::string_view text, const std::string& label_column,
                   const std::set<std::string>& missing_tokens = default_missing_tokens());

std::pair<LabeledDataset, PreprocessReport> preprocess(const RawTable& table,
                                                       const PreprocessPolicy& policy);

struct ClassSplit {
  LabeledDataset majority;
  LabeledDataset minority;
  int majority_class = 0;
  int minority_class = 1;
};

ClassSplit split_by_class(const LabeledDataset& data);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// Rows each class sends to the test part: max(1, round(fraction * count)).
std::size_t stratified_test_count(std::size_t class_count, double test_fraction);

TrainTestSplit train_test_split(const LabeledDataset& data, double test_fraction,
                                std::uint64_t seed);

// Writes features plus a trailing label column holding class_names text.
void write_csv(const LabeledDataset& data, const std::filesystem::path& path,
               const std::string& label_column);
std::string to_csv(const LabeledDataset& data, const std::string& label_column);

}  // namespace rebalance
