#include "rebalance/support_points.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

#include "rebalance/errors.hpp"
#include "rebalance/random.hpp"
#include "rebalance/stratification.hpp"

namespace rebalance {

namespace {

using kernels::Backend;

void check_dims(const Matrix& x, const Matrix& z) {
  if (x.rows() == 0 || z.rows() == 0) throw ConfigError("energy: empty point set");
  if (x.cols() != z.cols()) throw ConfigError("energy: dimension mismatch");
}

double combine(double cross, double self_x, double self_z, double n, double m) {
  return 2.0 * (cross / (n * m)) - self_x / (n * n) - self_z / (m * m);
}

struct Objective {
  const Matrix& x;
  double self_x;
  double epsilon;
  Backend backend;

  double evaluate(const Matrix& z, Matrix& grad) const {
    const auto pass = backend == Backend::parallel
                          ? kernels::omp::energy_gradient(x, z, epsilon, grad)
                          : kernels::serial::energy_gradient(x, z, epsilon, grad);
    return combine(pass.cross_sum, self_x, pass.self_sum, static_cast<double>(x.rows()),
                   static_cast<double>(z.rows()));
  }
};

}  // namespace

double energy_distance(const Matrix& x, const Matrix& z, Backend backend) {
  check_dims(x, z);
  const bool par = backend == Backend::parallel;
  const double cross =
      par ? kernels::omp::cross_distance_sum(x, z) : kernels::serial::cross_distance_sum(x, z);
  const double sx = par ? kernels::omp::self_distance_sum(x) : kernels::serial::self_distance_sum(x);
  const double sz = par ? kernels::omp::self_distance_sum(z) : kernels::serial::self_distance_sum(z);
  return combine(cross, sx, sz, static_cast<double>(x.rows()), static_cast<double>(z.rows()));
}

Matrix energy_gradient(const Matrix& x, const Matrix& z, double epsilon, Backend backend) {
  check_dims(x, z);
  Matrix grad;
  if (backend == Backend::parallel) {
    kernels::omp::energy_gradient(x, z, epsilon, grad);
  } else {
    kernels::serial::energy_gradient(x, z, epsilon, grad);
  }
  return grad;
}

double default_learning_rate(const Matrix& x, std::uint64_t seed) {
  Rng rng = make_rng(seed, "learning_rate_probe");
  const auto rows = sample_without_replacement(x.rows(), 256, rng);
  std::vector<double> dists;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      dists.push_back(kernels::euclidean(x.row(rows[a]), x.row(rows[b])));
    }
  }
  if (dists.empty()) return 0.1;
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid > 0.0 ? 0.1 * *mid : 0.1;
}

SupportPointSet optimize_support_points_from(const Matrix& x, Matrix start,
                                             const SupportPointConfig& config) {
  check_dims(x, start);
  if (!(config.eta > 0.0)) throw ConfigError("support points: eta must be positive");
  if (!(config.epsilon > 0.0)) throw ConfigError("support points: epsilon must be positive");
  const Objective objective{x,
                            config.backend == Backend::parallel
                                ? kernels::omp::self_distance_sum(x)
                                : kernels::serial::self_distance_sum(x),
                            config.epsilon, config.backend};

  SupportPointSet out;
  out.eta = config.eta;
  out.points = std::move(start);
  Matrix grad;
  double energy = objective.evaluate(out.points, grad);
  out.energy_trace.push_back(energy);

  Matrix candidate(out.points.rows(), out.points.cols());
  Matrix candidate_grad;
  for (std::size_t iter = 0; iter < config.max_iter && energy > 0.0; ++iter) {
    // Backtracking: halve the step until the energy does not increase.
    double step = config.eta;
    bool accepted = false;
    double next = energy;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      const auto z = out.points.data();
      const auto g = grad.data();
      auto c = candidate.data();
      for (std::size_t t = 0; t < z.size(); ++t) c[t] = z[t] - step * g[t];
      next = objective.evaluate(candidate, candidate_grad);
      if (next <= energy) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double change = std::abs(energy - next) / std::max(energy, 1e-12);
    std::swap(out.points, candidate);
    std::swap(grad, candidate_grad);
    energy = next;
    out.energy_trace.push_back(energy);
    if (change < config.tol) break;
  }
  out.final_energy = energy;
  return out;
}

SupportPointSet optimize_support_points(const Matrix& x, const SupportPointConfig& config,
                                        std::uint64_t seed) {
  if (config.m == 0 || config.m > x.rows()) {
    throw ConfigError("support points: need 1 <= m <= " + std::to_string(x.rows()) +
                      ", got m=" + std::to_string(config.m));
  }
  Rng rng = make_rng(seed, "support_points_init");
  auto rows = sample_without_replacement(x.rows(), config.m, rng);
  std::sort(rows.begin(), rows.end());
  SupportPointConfig resolved = config;
  if (!(resolved.eta > 0.0)) resolved.eta = default_learning_rate(x, seed);
  return optimize_support_points_from(x, x.select_rows(rows), resolved);
}

std::vector<std::size_t> cluster_subsample(const LabeledDataset& majority,
                                           std::size_t stage1_clusters,
                                           std::size_t subset_target, std::uint64_t seed,
                                           const SupportPointConfig& config) {
  const std::size_t n = majority.size();
  if (subset_target > n) {
    throw ConfigError("cluster_subsample: subset_target " + std::to_string(subset_target) +
                      " exceeds the majority size " + std::to_string(n));
  }
  if (stage1_clusters == 0 || stage1_clusters > n) {
    throw ConfigError("cluster_subsample: stage1_clusters must be in [1, n]");
  }
  if (subset_target == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  MiniBatchOptions mb;
  mb.max_iter = config.stage1_iterations;
  mb.backend = config.backend;
  const auto strata = minibatch_kmeans(majority.features, stage1_clusters,
                                       std::min(config.stage1_batch, n),
                                       derive_seed(seed, "stage1"), mb);
  std::vector<std::size_t> sizes(strata.k, 0);
  for (int l : strata.labels) ++sizes[static_cast<std::size_t>(l)];
  const auto plan = proportional_allocation(sizes, subset_target);
  return stratified_srs(majority, strata, plan, subset_target, derive_seed(seed, "stage1-srs"));
}

std::vector<std::size_t> map_to_nearest(const Matrix& z, const LabeledDataset& majority,
                                        bool unique, Backend backend) {
  const Matrix& x = majority.features;
  const std::size_t m = z.rows();
  const std::size_t n = x.rows();
  if (z.cols() != x.cols()) throw ConfigError("map_to_nearest: dimension mismatch");
  if (m > n) {
    throw ConfigError("map_to_nearest: " + std::to_string(m) + " points but only " +
                      std::to_string(n) + " rows");
  }
  const auto fetch = [&](const Matrix& q, std::size_t k) {
    return backend == Backend::parallel ? kernels::omp::nearest_rows(q, x, k)
                                        : kernels::serial::nearest_rows(q, x, k);
  };
  const std::size_t initial = unique ? std::min<std::size_t>(n, 32) : 1;
  auto lists = fetch(z, initial);
  std::vector<std::size_t> result(m);
  if (!unique) {
    for (std::size_t j = 0; j < m; ++j) result[j] = lists[j].front().second;
    return result;
  }

  // Lazy merge of the per-point candidate lists in global (distance, row, j)
  // order; a point whose list is used up fetches a longer one.
  using Head = std::tuple<double, std::size_t, std::size_t>;  // distance, row, j
  std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
  std::vector<std::size_t> cursor(m, 0);
  for (std::size_t j = 0; j < m; ++j) heap.emplace(lists[j][0].first, lists[j][0].second, j);
  std::vector<bool> taken(n, false);
  std::vector<bool> done(m, false);
  while (!heap.empty()) {
    const auto [dist, row, j] = heap.top();
    heap.pop();
    if (!taken[row]) {
      taken[row] = true;
      done[j] = true;
      result[j] = row;
      continue;
    }
    std::size_t next = ++cursor[j];
    if (next == lists[j].size()) {
      Matrix q(1, z.cols());
      std::copy(z.row(j).begin(), z.row(j).end(), q.row(0).begin());
      lists[j] = std::move(kernels::serial::nearest_rows(q, x, std::min(n, 2 * next))[0]);
    }
    heap.emplace(lists[j][next].first, lists[j][next].second, j);
  }
  return result;
}

SupportPointsRun undersample_support_points(const LabeledDataset& data,
                                            const SupportPointConfig& config,
                                            std::uint64_t seed) {
  const ClassSplit split = split_by_class(data);
  const std::size_t n_major = split.majority.size();
  const std::size_t n_minor = split.minority.size();
  SupportPointConfig resolved = config;
  if (resolved.m == 0) resolved.m = n_minor;
  if (resolved.m < n_minor || resolved.m > n_major) {
    throw ConfigError("support points: m=" + std::to_string(resolved.m) +
                      " must lie between the minority (" + std::to_string(n_minor) +
                      ") and majority (" + std::to_string(n_major) + ") sizes");
  }

  SupportPointsRun run;
  if (n_major > resolved.subset_target) {
    if (resolved.m > resolved.subset_target) {
      throw ConfigError("support points: m exceeds subset_target");
    }
    run.stage1_rows = cluster_subsample(split.majority, resolved.stage1_clusters,
                                        resolved.subset_target, seed, resolved);
  } else {
    run.stage1_rows.resize(n_major);
    std::iota(run.stage1_rows.begin(), run.stage1_rows.end(), std::size_t{0});
  }
  const Matrix reduced = run.stage1_rows.size() == n_major
                             ? split.majority.features
                             : split.majority.features.select_rows(run.stage1_rows);

  run.support = optimize_support_points(reduced, resolved, seed);
  run.support.nearest_indices =
      map_to_nearest(run.support.points, split.majority, resolved.unique_mapping, resolved.backend);
  run.kept_rows = run.support.nearest_indices;
  std::sort(run.kept_rows.begin(), run.kept_rows.end());
  run.kept_rows.erase(std::unique(run.kept_rows.begin(), run.kept_rows.end()),
                      run.kept_rows.end());
  run.balanced = shuffled(concat(split.majority.subset(run.kept_rows), split.minority), seed);
  return run;
}

}  // namespace rebalance
