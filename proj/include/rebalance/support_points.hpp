#pragma once

#include <cstdint>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/kernels.hpp"
#include "rebalance/matrix.hpp"

namespace rebalance {

struct SupportPointConfig {
  // Number of support points; 0 means "match the minority class size".
  std::size_t m = 0;
  // Learning rate; 0 means 0.1 x the median pairwise distance of a probe sample.
  double eta = 0.0;
  std::size_t max_iter = 2000;
  double tol = 1e-6;
  double epsilon = 1e-10;
  std::size_t subset_target = 5000;
  std::size_t stage1_clusters = 50;
  std::size_t stage1_batch = 1024;
  std::size_t stage1_iterations = 100;
  // Greedy one-to-one mapping of optimized points onto data rows. When false
  // each point takes its plain nearest row, which may repeat.
  bool unique_mapping = true;
  kernels::Backend backend = kernels::Backend::parallel;
};

struct SupportPointSet {
  Matrix points;                      // m x d optimized locations
  std::vector<double> energy_trace;   // energy at init, then after each accepted step
  std::vector<std::size_t> nearest_indices;
  double final_energy = 0.0;
  double eta = 0.0;                   // learning rate actually used
};

// Empirical energy distance between the rows of x and of z (V-statistic form).
double energy_distance(const Matrix& x, const Matrix& z,
                       kernels::Backend backend = kernels::Backend::parallel);

// Gradient of energy_distance with respect to each row of z.
Matrix energy_gradient(const Matrix& x, const Matrix& z, double epsilon,
                       kernels::Backend backend = kernels::Backend::parallel);

double default_learning_rate(const Matrix& x, std::uint64_t seed);

// Gradient descent from a seeded sample of m distinct rows of x.
SupportPointSet optimize_support_points(const Matrix& x, const SupportPointConfig& config,
                                        std::uint64_t seed);

// Same descent from a caller-supplied start; config.eta must be positive.
SupportPointSet optimize_support_points_from(const Matrix& x, Matrix start,
                                             const SupportPointConfig& config);

// Stage-1 reduction: mini-batch k-means strata, proportional quotas, SRS per
// stratum. Returns ascending row indices into the majority.
std::vector<std::size_t> cluster_subsample(const LabeledDataset& majority,
                                           std::size_t stage1_clusters,
                                           std::size_t subset_target, std::uint64_t seed,
                                           const SupportPointConfig& config = {});

// Snaps each row of z to a majority row, in the order of ascending
// (distance, row index) over all candidate pairs.
std::vector<std::size_t> map_to_nearest(const Matrix& z, const LabeledDataset& majority,
                                        bool unique = true,
                                        kernels::Backend backend = kernels::Backend::parallel);

struct SupportPointsRun {
  LabeledDataset balanced;
  SupportPointSet support;
  std::vector<std::size_t> stage1_rows;  // majority rows the optimizer saw
  std::vector<std::size_t> kept_rows;    // majority rows kept, ascending
};

SupportPointsRun undersample_support_points(const LabeledDataset& data,
                                            const SupportPointConfig& config,
                                            std::uint64_t seed);

}  // namespace rebalance
