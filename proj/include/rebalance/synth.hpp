#pragma once

#include <cstdint>

#include "rebalance/dataset.hpp"
#include "rebalance/matrix.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

struct SynthConfig {
  std::size_t n = 2000;
  std::size_t d = 10;
  double majority_fraction = 0.9;
  std::size_t clusters = 4;
  // Distance between majority cluster centers, in units of the within-cluster std.
  double separation = 3.0;
  std::uint64_t seed = 0;
};

// g equidistant cluster centers at pairwise distance `separation`: scaled unit
// vectors when g <= d, seeded random directions otherwise.
Matrix cluster_centers(std::size_t g, std::size_t d, double separation, Rng& rng);

// g isotropic unit-variance Gaussian blobs of `per_cluster` rows around
// cluster_centers(g, d, separation). labels[i] is the generating cluster.
Matrix gaussian_blobs(std::size_t g, std::size_t per_cluster, std::size_t d, double separation,
                      std::uint64_t seed, std::vector<int>* labels = nullptr);

// Binary imbalanced dataset: the majority is a mixture of `clusters` blobs with
// unequal weights; the minority is one blob offset from the majority centroid,
// overlapping it. Class 0 is the majority; the label column holds "0"/"1".
LabeledDataset generate_synthetic(const SynthConfig& config);

}  // namespace rebalance
