#include "rebalance/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rebalance/errors.hpp"

namespace rebalance {

Matrix cluster_centers(std::size_t g, std::size_t d, double separation, Rng& rng) {
  if (g == 0 || d == 0) throw ConfigError("cluster_centers: g and d must be positive");
  const double radius = separation / std::sqrt(2.0);
  Matrix centers(g, d, 0.0);
  if (g <= d) {
    for (std::size_t k = 0; k < g; ++k) centers(k, k) = radius;
    return centers;
  }
  // Not equidistant any more; random directions on the same sphere.
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < g; ++k) {
    double norm = 0.0;
    for (std::size_t f = 0; f < d; ++f) {
      centers(k, f) = normal(rng);
      norm += centers(k, f) * centers(k, f);
    }
    norm = std::sqrt(norm);
    for (std::size_t f = 0; f < d; ++f) centers(k, f) *= radius / norm;
  }
  return centers;
}

Matrix gaussian_blobs(std::size_t g, std::size_t per_cluster, std::size_t d, double separation,
                      std::uint64_t seed, std::vector<int>* labels) {
  Rng rng = make_rng(seed, "blobs");
  const Matrix centers = cluster_centers(g, d, separation, rng);
  std::normal_distribution<double> normal;
  Matrix points(g * per_cluster, d);
  if (labels) labels->assign(g * per_cluster, 0);
  for (std::size_t k = 0; k < g; ++k) {
    for (std::size_t i = 0; i < per_cluster; ++i) {
      const std::size_t r = k * per_cluster + i;
      for (std::size_t f = 0; f < d; ++f) points(r, f) = centers(k, f) + normal(rng);
      if (labels) (*labels)[r] = static_cast<int>(k);
    }
  }
  return points;
}

LabeledDataset generate_synthetic(const SynthConfig& config) {
  if (config.d == 0) throw ConfigError("gen-synth: d must be positive");
  if (config.clusters == 0) throw ConfigError("gen-synth: clusters must be positive");
  if (!(config.majority_fraction > 0.5 && config.majority_fraction < 1.0)) {
    throw ConfigError("gen-synth: majority fraction must lie in (0.5, 1)");
  }
  if (!(config.separation >= 0.0)) throw ConfigError("gen-synth: separation must be >= 0");
  const auto n_major =
      static_cast<std::size_t>(std::llround(static_cast<double>(config.n) * config.majority_fraction));
  const std::size_t n_minor = config.n - n_major;
  if (n_minor < 2 || n_major < 2) throw ConfigError("gen-synth: n too small for the imbalance ratio");

  Rng rng = make_rng(config.seed, "synth");
  const std::size_t g = config.clusters;
  const std::size_t d = config.d;
  const Matrix centers = cluster_centers(g, d, config.separation, rng);

  // Cluster k gets weight k + 1.
  std::vector<double> weights(g);
  for (std::size_t k = 0; k < g; ++k) weights[k] = static_cast<double>(k + 1);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;

  std::vector<double> centroid(d, 0.0);
  const double total_weight = static_cast<double>(g * (g + 1)) / 2.0;
  for (std::size_t k = 0; k < g; ++k) {
    for (std::size_t f = 0; f < d; ++f) centroid[f] += weights[k] / total_weight * centers(k, f);
  }
  // Minority centre: one within-cluster std off the majority centroid, along the diagonal.
  std::vector<double> minority_center(d);
  for (std::size_t f = 0; f < d; ++f) {
    minority_center[f] = centroid[f] + 1.5 / std::sqrt(static_cast<double>(d));
  }

  LabeledDataset data;
  data.features = Matrix(config.n, d);
  data.labels.assign(config.n, 0);
  for (std::size_t i = 0; i < n_major; ++i) {
    const std::size_t k = pick(rng);
    for (std::size_t f = 0; f < d; ++f) data.features(i, f) = centers(k, f) + normal(rng);
  }
  for (std::size_t i = n_major; i < config.n; ++i) {
    for (std::size_t f = 0; f < d; ++f) data.features(i, f) = minority_center[f] + normal(rng);
    data.labels[i] = 1;
  }
  data.class_counts = {{0, n_major}, {1, n_minor}};
  for (std::size_t f = 0; f < d; ++f) data.feature_names.push_back("x" + std::to_string(f));
  data.class_names = {"0", "1"};
  return shuffled(data, config.seed);
}

}  // namespace rebalance
