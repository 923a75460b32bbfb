#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/kernels.hpp"
#include "rebalance/matrix.hpp"

namespace rebalance {

enum class Seeding { kmeans_plus_plus, uniform };

struct KMeansOptions {
  std::size_t max_iter = 300;
  Seeding seeding = Seeding::kmeans_plus_plus;
  // Independent seeded starts; the lowest-wcss result is kept.
  std::size_t n_init = 1;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct StrataAssignment {
  std::vector<int> labels;  // stratum id per point, 0..k-1, every id used
  std::size_t k = 0;
  double wcss = 0.0;
  Matrix centroids;
  // Objective after each assignment step; non-increasing for Lloyd.
  std::vector<double> wcss_trace;
  std::size_t iterations = 0;
};

StrataAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& options = {});

struct MiniBatchOptions {
  std::size_t max_iter = 100;
  Seeding seeding = Seeding::kmeans_plus_plus;
  kernels::Backend backend = kernels::Backend::parallel;
};

StrataAssignment minibatch_kmeans(const Matrix& points, std::size_t k, std::size_t batch,
                                  std::uint64_t seed, const MiniBatchOptions& options = {});

struct ElbowReport {
  std::vector<std::size_t> candidate_ks;
  std::vector<double> wcss_curve;
  std::size_t chosen_k = 0;
};

// The k maximizing wcss[k-1] - 2 wcss[k] + wcss[k+1] over interior candidates;
// ties go to the smaller k.
std::size_t elbow_from_curve(std::span<const std::size_t> ks, std::span<const double> wcss);

ElbowReport elbow_select(const Matrix& points, std::size_t k_min, std::size_t k_max,
                         std::uint64_t seed, const KMeansOptions& options = {});

enum class AllocationStrategy { neyman, optimal, proportional };
std::string to_string(AllocationStrategy s);
AllocationStrategy parse_allocation_strategy(const std::string& text);

enum class CostModel { uniform, stratum_size };
std::string to_string(CostModel c);
CostModel parse_cost_model(const std::string& text);
std::vector<double> stratum_costs(CostModel model, std::span<const std::size_t> sizes);

struct AllocationPlan {
  std::vector<std::size_t> sizes;   // N_h
  std::vector<double> stds;         // sigma_h
  std::vector<double> costs;        // c_h
  std::vector<std::size_t> quotas;  // n_h
  std::size_t total = 0;            // n
  AllocationStrategy strategy = AllocationStrategy::neyman;
};

// Integer quotas summing to n, proportional to weights, capped by caps.
// Largest remainder rounding (ties to the lower index); overflow above a cap
// is redistributed over the uncapped strata. Zero total weight falls back to
// weights proportional to the caps.
std::vector<std::size_t> largest_remainder_quotas(std::span<const double> weights,
                                                  std::span<const std::size_t> caps,
                                                  std::size_t n);

AllocationPlan neyman_allocation(std::span<const std::size_t> sizes,
                                 std::span<const double> stds, std::size_t n);
AllocationPlan optimal_allocation(std::span<const std::size_t> sizes,
                                  std::span<const double> stds, std::span<const double> costs,
                                  std::size_t n);
AllocationPlan proportional_allocation(std::span<const std::size_t> sizes, std::size_t n);
AllocationPlan allocate(AllocationStrategy strategy, std::span<const std::size_t> sizes,
                        std::span<const double> stds, std::span<const double> costs,
                        std::size_t n);

struct StratumStats {
  std::vector<std::size_t> sizes;
  std::vector<double> stds;
};

// sigma_h: square root of the mean over features of the within-stratum
// population variance.
StratumStats stratum_stats(const LabeledDataset& majority, const StrataAssignment& assignment);

// Row indices (ascending) of a stratified sample of exactly `target` rows.
// Strata that run dry are refilled by re-planning the shortfall over strata
// that still have rows.
std::vector<std::size_t> stratified_srs(const LabeledDataset& majority,
                                        const StrataAssignment& assignment,
                                        const AllocationPlan& plan, std::size_t target,
                                        std::uint64_t seed);

}  // namespace rebalance
