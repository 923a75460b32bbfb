#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/mutual_information.hpp"
#include "rebalance/stratification.hpp"
#include "rebalance/support_points.hpp"

namespace rebalance {

enum class Method { random, mi, support_points };
std::string to_string(Method m);
Method parse_method(const std::string& text);

struct RandomRun {
  LabeledDataset balanced;
  std::vector<std::size_t> kept_rows;  // majority rows, ascending
};

// Baseline: seeded SRS of the majority down to the minority size.
RandomRun undersample_random(const LabeledDataset& data, std::uint64_t seed);

struct MiConfig {
  std::size_t n_bins = 0;  // 0: max(2, floor(sqrt(d)))
  BinningStrategy binning = BinningStrategy::quantile;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  AllocationStrategy allocation = AllocationStrategy::optimal;
  CostModel cost_model = CostModel::stratum_size;
  KMeansOptions kmeans;
  std::size_t memory_budget_bytes = kDefaultMatrixBudgetBytes;
};

struct MiRun {
  LabeledDataset balanced;
  BinningSpec binning;
  ElbowReport elbow;
  StrataAssignment strata;
  AllocationPlan plan;
  std::vector<std::size_t> kept_rows;  // majority rows, ascending
};

// Pairwise MI over majority rows -> dissimilarity rows as k-means points ->
// elbow-selected strata -> allocation -> stratified SRS with refill ->
// merge with the minority and shuffle.
MiRun undersample_mi(const LabeledDataset& data, const MiConfig& config, std::uint64_t seed);

}  // namespace rebalance
