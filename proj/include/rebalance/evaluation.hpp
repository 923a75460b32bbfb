#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/undersampling.hpp"

namespace rebalance {

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

// Binary logistic regression on internally standardized features.
struct LogisticModel {
  std::vector<double> weights;  // on standardized features
  double bias = 0.0;
  std::vector<double> mean;
  std::vector<double> scale;
  std::array<int, 2> classes{0, 1};  // {negative, positive}
  LogisticConfig config;
  std::vector<double> loss_trace;    // regularized log loss per epoch, before the step

  double predict_proba(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
};

// Full-batch gradient descent from zero. The larger class id is the positive class.
LogisticModel train_logistic(const LabeledDataset& train, const LogisticConfig& config = {});

struct ClassificationReport {
  std::array<int, 2> classes{0, 1};
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][predicted]
  double balanced_accuracy = 0.0;
  std::array<double, 2> precision{};
  std::array<double, 2> recall{};
  std::array<double, 2> f1{};
  std::size_t n_test = 0;
};

ClassificationReport report_from_confusion(
    const std::array<std::array<std::size_t, 2>, 2>& confusion, std::array<int, 2> classes = {0, 1});
ClassificationReport report_from_predictions(std::span<const int> truth,
                                             std::span<const int> predicted,
                                             std::array<int, 2> classes = {0, 1});

ClassificationReport evaluate(const LogisticModel& model, const LabeledDataset& test);

struct BenchmarkConfig {
  std::vector<Method> methods{Method::random};
  std::vector<std::uint64_t> seeds{0};
  MiConfig mi;
  SupportPointConfig support_points;
  LogisticConfig logistic;
  double test_fraction = 0.2;
};

struct BenchmarkRow {
  std::string method;
  std::uint64_t seed = 0;
  ClassificationReport report;
};

struct BenchmarkAggregate {
  std::string method;
  std::size_t runs = 0;
  double mean_balanced_accuracy = 0.0;
  double std_balanced_accuracy = 0.0;  // sample std, 0 for a single run
  std::array<double, 2> mean_f1{};
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;  // sorted by method, then seed
  std::vector<BenchmarkAggregate> aggregates;
};

// For each (method, seed): undersample -> stratified split -> train -> evaluate.
BenchmarkTable run_benchmark(const LabeledDataset& data, const BenchmarkConfig& config);

// Undersampled dataset for one method; shared by the benchmark and the CLI.
LabeledDataset undersample(const LabeledDataset& data, Method method, const BenchmarkConfig& config,
                           std::uint64_t seed);

}  // namespace rebalance
