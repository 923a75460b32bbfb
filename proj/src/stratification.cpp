#include "rebalance/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rebalance/errors.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

namespace {

using kernels::Backend;

double assign(Backend backend, const Matrix& points, const Matrix& centroids,
              std::span<int> labels, std::span<double> dist2) {
  return backend == Backend::parallel
             ? kernels::omp::assign_nearest(points, centroids, labels, dist2)
             : kernels::serial::assign_nearest(points, centroids, labels, dist2);
}

void relax(Backend backend, const Matrix& points, std::span<const double> c,
           std::span<double> dist2) {
  if (backend == Backend::parallel) {
    kernels::omp::relax_min_distance(points, c, dist2);
  } else {
    kernels::serial::relax_min_distance(points, c, dist2);
  }
}

double ordered_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

void copy_row(std::span<const double> from, std::span<double> to) {
  std::copy(from.begin(), from.end(), to.begin());
}

// Greedy k-means++: each new center is the best of a few D^2-weighted draws.
Matrix seed_plus_plus(const Matrix& points, std::size_t k, Rng& rng, Backend backend) {
  const std::size_t n = points.rows();
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<std::size_t> any_row(0, n - 1);
  copy_row(points.row(any_row(rng)), centers.row(0));

  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  relax(backend, points, centers.row(0), dist2);
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> candidate(n);
  std::vector<double> best_dist2(n);

  for (std::size_t c = 1; c < k; ++c) {
    const double potential = ordered_sum(dist2);
    std::size_t chosen = 0;
    if (!(potential > 0.0)) {
      chosen = any_row(rng);
      relax(backend, points, points.row(chosen), dist2);
    } else {
      double best = std::numeric_limits<double>::infinity();
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t t = 0; t < trials; ++t) {
        const double r = unit(rng) * potential;
        double acc = 0.0;
        std::size_t pick = n;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (dist2[i] > 0.0) last_positive = i;
          acc += dist2[i];
          if (acc > r && dist2[i] > 0.0) {
            pick = i;
            break;
          }
        }
        if (pick == n) pick = last_positive;
        candidate = dist2;
        relax(backend, points, points.row(pick), candidate);
        const double pot = ordered_sum(candidate);
        if (pot < best) {
          best = pot;
          chosen = pick;
          best_dist2.swap(candidate);
        }
      }
      dist2.swap(best_dist2);
    }
    copy_row(points.row(chosen), centers.row(c));
  }
  return centers;
}

Matrix seed_centroids(const Matrix& points, std::size_t k, Rng& rng, Seeding seeding,
                      Backend backend) {
  if (seeding == Seeding::kmeans_plus_plus) return seed_plus_plus(points, k, rng, backend);
  auto rows = sample_without_replacement(points.rows(), k, rng);
  return points.select_rows(rows);
}

// Removes unused cluster ids, renumbering the rest in order.
void compact(std::vector<int>& labels, Matrix& centroids) {
  std::vector<std::size_t> counts(centroids.rows(), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  std::vector<int> remap(centroids.rows(), -1);
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) {
      remap[c] = static_cast<int>(kept.size());
      kept.push_back(c);
    }
  }
  if (kept.size() == centroids.rows()) return;
  centroids = centroids.select_rows(kept);
  for (int& l : labels) l = remap[static_cast<std::size_t>(l)];
}

Matrix cluster_means(const Matrix& points, std::span<const int> labels, std::size_t k) {
  Matrix sums(k, points.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    auto dst = sums.row(c);
    const auto src = points.row(i);
    for (std::size_t f = 0; f < src.size(); ++f) dst[f] += src[f];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (double& v : sums.row(c)) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

double within_cluster_ss(const Matrix& points, std::span<const int> labels,
                         const Matrix& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    s += kernels::squared_euclidean(points.row(i),
                                    centroids.row(static_cast<std::size_t>(labels[i])));
  }
  return s;
}

StrataAssignment lloyd(const Matrix& points, std::size_t k, Rng& rng,
                       const KMeansOptions& options) {
  const std::size_t n = points.rows();
  StrataAssignment out;
  out.centroids = seed_centroids(points, k, rng, options.seeding, options.backend);
  out.labels.assign(n, -1);
  std::vector<int> previous;
  std::vector<double> dist2(n);
  std::vector<bool> reseeded(k, false);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const double objective = assign(options.backend, points, out.centroids, out.labels, dist2);
    out.wcss_trace.push_back(objective);
    out.iterations = iter + 1;

    std::vector<std::size_t> counts(out.centroids.rows(), 0);
    for (int l : out.labels) ++counts[static_cast<std::size_t>(l)];
    bool moved = false;
    std::vector<std::size_t> dropped;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] > 0) continue;
      if (reseeded[c]) {
        dropped.push_back(c);
        continue;
      }
      // Farthest point from its current centroid; ties to the lower index.
      const auto far = static_cast<std::size_t>(
          std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
      copy_row(points.row(far), out.centroids.row(c));
      dist2[far] = 0.0;
      reseeded[c] = true;
      moved = true;
    }
    if (moved) continue;
    if (!dropped.empty()) {
      std::vector<int> remap(counts.size(), -1);
      std::vector<std::size_t> kept;
      std::vector<bool> kept_reseeded;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        remap[c] = static_cast<int>(kept.size());
        kept.push_back(c);
        kept_reseeded.push_back(reseeded[c]);
      }
      out.centroids = out.centroids.select_rows(kept);
      reseeded = std::move(kept_reseeded);
      for (int& l : out.labels) l = remap[static_cast<std::size_t>(l)];
      previous.clear();
    }
    if (out.labels == previous) break;
    previous = out.labels;
    out.centroids = cluster_means(points, out.labels, out.centroids.rows());
  }

  compact(out.labels, out.centroids);
  out.centroids = cluster_means(points, out.labels, out.centroids.rows());
  out.k = out.centroids.rows();
  out.wcss = within_cluster_ss(points, out.labels, out.centroids);
  return out;
}

void check_k(std::size_t k, std::size_t n) {
  if (k == 0) throw ConfigError("kmeans: k must be at least 1");
  if (k > n) {
    throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds the " + std::to_string(n) +
                      " available points");
  }
}

}  // namespace

StrataAssignment kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                        const KMeansOptions& options) {
  check_k(k, points.rows());
  if (options.max_iter == 0) throw ConfigError("kmeans: max_iter must be at least 1");
  Rng rng = make_rng(seed, "kmeans");
  StrataAssignment best;
  for (std::size_t run = 0; run < std::max<std::size_t>(1, options.n_init); ++run) {
    StrataAssignment result = lloyd(points, k, rng, options);
    if (run == 0 || result.wcss < best.wcss) best = std::move(result);
  }
  return best;
}

StrataAssignment minibatch_kmeans(const Matrix& points, std::size_t k, std::size_t batch,
                                  std::uint64_t seed, const MiniBatchOptions& options) {
  const std::size_t n = points.rows();
  check_k(k, n);
  if (batch == 0 || batch > n) throw ConfigError("minibatch_kmeans: batch must be in [1, n]");
  Rng rng = make_rng(seed, "minibatch_kmeans");

  const std::size_t init_size = std::min(n, std::max(3 * batch, 10 * k));
  auto init_rows = sample_without_replacement(n, init_size, rng);
  std::sort(init_rows.begin(), init_rows.end());
  StrataAssignment out;
  out.centroids = seed_centroids(points.select_rows(init_rows), k, rng, options.seeding,
                                 options.backend);

  std::vector<std::size_t> counts(k, 0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels(batch);
  std::vector<double> batch_dist2(batch);
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    for (std::size_t i = 0; i < batch; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    const std::span<const std::size_t> rows(order.data(), batch);
    const Matrix sample = points.select_rows(rows);
    const double objective =
        assign(options.backend, sample, out.centroids, batch_labels, batch_dist2);
    out.wcss_trace.push_back(objective);
    // Per-centroid running mean: step 1/count toward each assigned point.
    for (std::size_t b = 0; b < batch; ++b) {
      const auto c = static_cast<std::size_t>(batch_labels[b]);
      const double eta = 1.0 / static_cast<double>(++counts[c]);
      auto centroid = out.centroids.row(c);
      const auto x = sample.row(b);
      for (std::size_t f = 0; f < x.size(); ++f) centroid[f] += eta * (x[f] - centroid[f]);
    }
    out.iterations = iter + 1;
  }

  out.labels.assign(n, 0);
  std::vector<double> dist2(n);
  assign(options.backend, points, out.centroids, out.labels, dist2);
  compact(out.labels, out.centroids);
  out.k = out.centroids.rows();
  out.wcss = ordered_sum(dist2);
  return out;
}

std::size_t elbow_from_curve(std::span<const std::size_t> ks, std::span<const double> wcss) {
  if (ks.size() != wcss.size() || ks.size() < 3) {
    throw ConfigError("elbow: needs at least three candidate k values");
  }
  std::size_t chosen = ks[1];
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double second = wcss[i - 1] - 2.0 * wcss[i] + wcss[i + 1];
    if (second > best) {
      best = second;
      chosen = ks[i];
    }
  }
  return chosen;
}

ElbowReport elbow_select(const Matrix& points, std::size_t k_min, std::size_t k_max,
                         std::uint64_t seed, const KMeansOptions& options) {
  if (k_min < 1 || k_max > points.rows() || k_max < k_min + 2) {
    throw ConfigError("elbow: need 1 <= k_min, k_min + 2 <= k_max <= n");
  }
  ElbowReport report;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const auto result =
        kmeans(points, k, derive_seed(seed, "elbow-k" + std::to_string(k)), options);
    report.candidate_ks.push_back(k);
    report.wcss_curve.push_back(result.wcss);
  }
  report.chosen_k = elbow_from_curve(report.candidate_ks, report.wcss_curve);
  return report;
}

std::string to_string(AllocationStrategy s) {
  switch (s) {
    case AllocationStrategy::neyman:
      return "neyman";
    case AllocationStrategy::optimal:
      return "optimal";
    case AllocationStrategy::proportional:
      return "proportional";
  }
  return "?";
}

AllocationStrategy parse_allocation_strategy(const std::string& text) {
  if (text == "neyman") return AllocationStrategy::neyman;
  if (text == "optimal") return AllocationStrategy::optimal;
  if (text == "proportional") return AllocationStrategy::proportional;
  throw ConfigError("unknown allocation strategy '" + text + "'");
}

std::string to_string(CostModel c) {
  return c == CostModel::uniform ? "uniform" : "stratum_size";
}

CostModel parse_cost_model(const std::string& text) {
  if (text == "uniform") return CostModel::uniform;
  if (text == "stratum_size") return CostModel::stratum_size;
  throw ConfigError("unknown cost model '" + text + "'");
}

std::vector<double> stratum_costs(CostModel model, std::span<const std::size_t> sizes) {
  std::vector<double> costs(sizes.size(), 1.0);
  if (model == CostModel::stratum_size) {
    std::transform(sizes.begin(), sizes.end(), costs.begin(),
                   [](std::size_t s) { return static_cast<double>(s); });
  }
  return costs;
}

std::vector<std::size_t> largest_remainder_quotas(std::span<const double> weights,
                                                  std::span<const std::size_t> caps,
                                                  std::size_t n) {
  const std::size_t h_count = weights.size();
  if (caps.size() != h_count) throw ConfigError("allocation: weights/caps length mismatch");
  const std::size_t capacity = std::accumulate(caps.begin(), caps.end(), std::size_t{0});
  if (n > capacity) {
    throw ConfigError("allocation: sample size " + std::to_string(n) + " exceeds population " +
                      std::to_string(capacity));
  }
  std::vector<std::size_t> quotas(h_count, 0);
  std::vector<bool> active(h_count);
  for (std::size_t h = 0; h < h_count; ++h) active[h] = caps[h] > 0;
  std::size_t remaining = n;

  while (remaining > 0) {
    double total_weight = 0.0;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (active[h]) total_weight += weights[h];
    }
    const bool fallback = !(total_weight > 0.0);
    const auto weight_of = [&](std::size_t h) {
      return fallback ? static_cast<double>(caps[h]) : weights[h];
    };
    if (fallback) {
      total_weight = 0.0;
      for (std::size_t h = 0; h < h_count; ++h) {
        if (active[h]) total_weight += weight_of(h);
      }
    }

    std::vector<double> raw(h_count, 0.0);
    bool capped = false;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (!active[h]) continue;
      raw[h] = static_cast<double>(remaining) * weight_of(h) / total_weight;
      if (raw[h] > static_cast<double>(caps[h])) {
        quotas[h] = caps[h];
        active[h] = false;
        capped = true;
      }
    }
    if (capped) {
      remaining = n - std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});
      continue;
    }

    std::size_t assigned = 0;
    std::vector<std::pair<double, std::size_t>> remainders;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (!active[h]) continue;
      const auto whole = static_cast<std::size_t>(std::floor(raw[h]));
      quotas[h] = whole;
      assigned += whole;
      remainders.emplace_back(raw[h] - static_cast<double>(whole), h);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < remaining && r < remainders.size(); ++r) {
      const std::size_t h = remainders[r].second;
      if (quotas[h] < caps[h]) {
        ++quotas[h];
        ++assigned;
      }
    }
    // Floating-point shortfall (sum of floors off by more than the strata
    // count) is handed out to strata with spare room, lowest index first.
    for (std::size_t h = 0; assigned < remaining && h < h_count; ++h) {
      while (active[h] && quotas[h] < caps[h] && assigned < remaining) {
        ++quotas[h];
        ++assigned;
      }
    }
    remaining = 0;
  }
  return quotas;
}

namespace {

void check_strata(std::span<const std::size_t> sizes, std::span<const double> stds) {
  if (sizes.empty()) throw ConfigError("allocation: no strata");
  if (stds.size() != sizes.size()) throw ConfigError("allocation: sizes/stds length mismatch");
  for (std::size_t s : sizes) {
    if (s == 0) throw ConfigError("allocation: every stratum needs at least one unit");
  }
  for (double s : stds) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("allocation: invalid stratum std");
  }
}

AllocationPlan make_plan(std::span<const std::size_t> sizes, std::span<const double> stds,
                         std::span<const double> costs, std::span<const double> weights,
                         std::size_t n, AllocationStrategy strategy) {
  AllocationPlan plan;
  plan.sizes.assign(sizes.begin(), sizes.end());
  plan.stds.assign(stds.begin(), stds.end());
  plan.costs.assign(costs.begin(), costs.end());
  plan.total = n;
  plan.strategy = strategy;
  plan.quotas = largest_remainder_quotas(weights, sizes, n);
  return plan;
}

}  // namespace

AllocationPlan neyman_allocation(std::span<const std::size_t> sizes,
                                 std::span<const double> stds, std::size_t n) {
  check_strata(sizes, stds);
  std::vector<double> weights(sizes.size());
  for (std::size_t h = 0; h < sizes.size(); ++h) {
    weights[h] = static_cast<double>(sizes[h]) * stds[h];
  }
  const std::vector<double> costs(sizes.size(), 1.0);
  return make_plan(sizes, stds, costs, weights, n, AllocationStrategy::neyman);
}

AllocationPlan optimal_allocation(std::span<const std::size_t> sizes,
                                  std::span<const double> stds, std::span<const double> costs,
                                  std::size_t n) {
  check_strata(sizes, stds);
  if (costs.size() != sizes.size()) throw ConfigError("allocation: costs length mismatch");
  for (double c : costs) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("allocation: costs must be positive");
  }
  // Costs are taken relative to the cheapest stratum; uniform costs then give
  // a divisor of exactly 1 and the Neyman weights bit for bit.
  const double cheapest = *std::min_element(costs.begin(), costs.end());
  std::vector<double> weights(sizes.size());
  for (std::size_t h = 0; h < sizes.size(); ++h) {
    weights[h] = static_cast<double>(sizes[h]) * stds[h] / std::sqrt(costs[h] / cheapest);
  }
  return make_plan(sizes, stds, costs, weights, n, AllocationStrategy::optimal);
}

AllocationPlan proportional_allocation(std::span<const std::size_t> sizes, std::size_t n) {
  const std::vector<double> zeros(sizes.size(), 0.0);
  check_strata(sizes, zeros);
  std::vector<double> weights(sizes.size());
  std::transform(sizes.begin(), sizes.end(), weights.begin(),
                 [](std::size_t s) { return static_cast<double>(s); });
  const std::vector<double> costs(sizes.size(), 1.0);
  return make_plan(sizes, zeros, costs, weights, n, AllocationStrategy::proportional);
}

AllocationPlan allocate(AllocationStrategy strategy, std::span<const std::size_t> sizes,
                        std::span<const double> stds, std::span<const double> costs,
                        std::size_t n) {
  switch (strategy) {
    case AllocationStrategy::neyman:
      return neyman_allocation(sizes, stds, n);
    case AllocationStrategy::optimal:
      return optimal_allocation(sizes, stds, costs, n);
    case AllocationStrategy::proportional: {
      AllocationPlan plan = proportional_allocation(sizes, n);
      plan.stds.assign(stds.begin(), stds.end());
      return plan;
    }
  }
  throw ConfigError("allocation: unknown strategy");
}

StratumStats stratum_stats(const LabeledDataset& majority, const StrataAssignment& assignment) {
  if (assignment.labels.size() != majority.size()) {
    throw ConfigError("stratum_stats: assignment does not cover the majority rows");
  }
  const std::size_t k = assignment.k;
  const std::size_t d = majority.dims();
  StratumStats stats;
  stats.sizes.assign(k, 0);
  Matrix mean(k, d);
  for (std::size_t i = 0; i < majority.size(); ++i) {
    const auto h = static_cast<std::size_t>(assignment.labels[i]);
    ++stats.sizes[h];
    const auto row = majority.features.row(i);
    for (std::size_t f = 0; f < d; ++f) mean(h, f) += row[f];
  }
  for (std::size_t h = 0; h < k; ++h) {
    for (std::size_t f = 0; f < d; ++f) {
      if (stats.sizes[h]) mean(h, f) /= static_cast<double>(stats.sizes[h]);
    }
  }
  std::vector<double> sq(k, 0.0);
  for (std::size_t i = 0; i < majority.size(); ++i) {
    const auto h = static_cast<std::size_t>(assignment.labels[i]);
    sq[h] += kernels::squared_euclidean(majority.features.row(i), mean.row(h));
  }
  stats.stds.resize(k);
  for (std::size_t h = 0; h < k; ++h) {
    stats.stds[h] = stats.sizes[h] == 0
                        ? 0.0
                        : std::sqrt(sq[h] / (static_cast<double>(stats.sizes[h]) *
                                             static_cast<double>(d)));
  }
  return stats;
}

std::vector<std::size_t> stratified_srs(const LabeledDataset& majority,
                                        const StrataAssignment& assignment,
                                        const AllocationPlan& plan, std::size_t target,
                                        std::uint64_t seed) {
  if (target > majority.size()) {
    throw ConfigError("stratified_srs: target " + std::to_string(target) +
                      " exceeds the majority size " + std::to_string(majority.size()));
  }
  if (assignment.labels.size() != majority.size()) {
    throw ConfigError("stratified_srs: assignment does not cover the majority rows");
  }
  const std::size_t k = assignment.k;
  if (plan.quotas.size() != k) throw ConfigError("stratified_srs: plan/assignment strata differ");

  Rng rng = make_rng(seed, "stratified_srs");
  std::vector<std::vector<std::size_t>> pools(k);
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    pools[static_cast<std::size_t>(assignment.labels[i])].push_back(i);
  }
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::size_t> used(k, 0);

  std::vector<std::size_t> drawn;
  drawn.reserve(target);
  std::vector<std::size_t> quotas = plan.quotas;
  while (true) {
    for (std::size_t h = 0; h < k && drawn.size() < target; ++h) {
      const std::size_t take =
          std::min({quotas[h], pools[h].size() - used[h], target - drawn.size()});
      drawn.insert(drawn.end(), pools[h].begin() + static_cast<std::ptrdiff_t>(used[h]),
                   pools[h].begin() + static_cast<std::ptrdiff_t>(used[h] + take));
      used[h] += take;
    }
    const std::size_t shortfall = target - drawn.size();
    if (shortfall == 0) break;

    // Re-plan the shortfall over strata that still hold rows.
    std::vector<std::size_t> open;
    std::vector<std::size_t> sizes;
    std::vector<double> stds;
    std::vector<double> costs;
    for (std::size_t h = 0; h < k; ++h) {
      if (used[h] < pools[h].size()) {
        open.push_back(h);
        sizes.push_back(pools[h].size() - used[h]);
        stds.push_back(h < plan.stds.size() ? plan.stds[h] : 0.0);
        costs.push_back(h < plan.costs.size() ? plan.costs[h] : 1.0);
      }
    }
    const AllocationPlan refill = allocate(plan.strategy, sizes, stds, costs, shortfall);
    std::fill(quotas.begin(), quotas.end(), 0);
    for (std::size_t o = 0; o < open.size(); ++o) quotas[open[o]] = refill.quotas[o];
  }
  std::sort(drawn.begin(), drawn.end());
  return drawn;
}

}  // namespace rebalance
