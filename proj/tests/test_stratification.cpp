#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "rebalance/errors.hpp"
#include "rebalance/stratification.hpp"
#include "rebalance/synth.hpp"

using namespace rebalance;

namespace {

// Two 2D blobs 100 apart with unit spread.
Matrix two_blobs(std::size_t per, std::uint64_t seed, std::vector<int>* truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(2 * per, 2);
  truth->assign(2 * per, 0);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const double cx = i < per ? 0.0 : 100.0;
    m(i, 0) = cx + normal(rng);
    m(i, 1) = normal(rng);
    (*truth)[i] = i < per ? 0 : 1;
  }
  return m;
}

// Labels of the nearest of the two true blob centres.
std::vector<int> blob_oracle(const Matrix& m) {
  std::vector<int> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = std::abs(m(i, 0)) < std::abs(m(i, 0) - 100.0) ? 0 : 1;
  return out;
}

// Same partition up to renaming.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

LabeledDataset as_dataset(const Matrix& m) {
  LabeledDataset d;
  d.features = m;
  d.labels.assign(m.rows(), 0);
  d.class_counts = {{0, m.rows()}};
  return d;
}

StrataAssignment fixed_strata(const std::vector<std::size_t>& sizes) {
  StrataAssignment a;
  a.k = sizes.size();
  for (std::size_t h = 0; h < sizes.size(); ++h) a.labels.insert(a.labels.end(), sizes[h], static_cast<int>(h));
  return a;
}

}  // namespace

TEST(KMeans, SingleClusterWcssIsTotalSumOfSquares) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Matrix m(50, 3);
  for (double& v : m.data()) v = normal(rng);
  const StrataAssignment a = kmeans(m, 1, 7);
  double mean[3] = {0, 0, 0};
  for (std::size_t i = 0; i < 50; ++i) {
    for (int f = 0; f < 3; ++f) mean[f] += m(i, f) / 50.0;
  }
  double tss = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    for (int f = 0; f < 3; ++f) tss += (m(i, f) - mean[f]) * (m(i, f) - mean[f]);
  }
  EXPECT_EQ(a.k, 1u);
  EXPECT_NEAR(a.wcss, tss, 1e-9 * tss);
}

TEST(KMeans, KEqualsNGivesZeroWcss) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  Matrix m(12, 2);
  for (double& v : m.data()) v = u(rng);
  const StrataAssignment a = kmeans(m, 12, 3);
  EXPECT_EQ(a.k, 12u);
  EXPECT_EQ(a.wcss, 0.0);
}

TEST(KMeans, TwoBlobsMatchOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<int> truth;
    const Matrix m = two_blobs(40, seed, &truth);
    const StrataAssignment a = kmeans(m, 2, seed);
    EXPECT_TRUE(same_partition(a.labels, blob_oracle(m)));
    EXPECT_TRUE(same_partition(a.labels, truth));
  }
}

TEST(KMeans, WcssTraceNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<int> truth;
    const Matrix m = gaussian_blobs(5, 30, 3, 2.0, seed, &truth);
    for (auto seeding : {Seeding::kmeans_plus_plus, Seeding::uniform}) {
      KMeansOptions opt;
      opt.seeding = seeding;
      const StrataAssignment a = kmeans(m, 6, seed, opt);
      for (std::size_t i = 1; i < a.wcss_trace.size(); ++i) {
        EXPECT_LE(a.wcss_trace[i], a.wcss_trace[i - 1] * (1 + 1e-12));
      }
      EXPECT_LE(a.wcss, a.wcss_trace.back() * (1 + 1e-12));
    }
  }
}

TEST(KMeans, EveryIdUsedAndDeterministic) {
  // Duplicated points make empty clusters likely.
  Matrix m(20, 1, 0.0);
  for (std::size_t i = 10; i < 20; ++i) m(i, 0) = 1.0;
  const StrataAssignment a = kmeans(m, 5, 4);
  std::set<int> used(a.labels.begin(), a.labels.end());
  EXPECT_EQ(used.size(), a.k);
  EXPECT_EQ(*used.rbegin(), static_cast<int>(a.k) - 1);
  EXPECT_LE(a.k, 5u);
  const StrataAssignment b = kmeans(m, 5, 4);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(KMeans, Errors) {
  Matrix m(3, 2, 0.0);
  EXPECT_THROW(kmeans(m, 4, 0), ConfigError);
  EXPECT_THROW(kmeans(m, 0, 0), ConfigError);
  EXPECT_THROW(minibatch_kmeans(m, 4, 2, 0), ConfigError);
}

TEST(MiniBatch, TwoBlobsBatch32) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<int> truth;
    const Matrix m = two_blobs(100, seed, &truth);
    const StrataAssignment a = minibatch_kmeans(m, 2, 32, seed);
    EXPECT_TRUE(same_partition(a.labels, blob_oracle(m)));
  }
}

TEST(MiniBatch, FullBatchReachesLloydFixedPoint) {
  std::vector<int> truth;
  const Matrix m = gaussian_blobs(3, 50, 3, 12.0, 5, &truth);
  MiniBatchOptions opt;
  opt.max_iter = 50;
  const StrataAssignment mb = minibatch_kmeans(m, 3, m.rows(), 5, opt);
  const StrataAssignment ll = kmeans(m, 3, 5);
  EXPECT_TRUE(same_partition(mb.labels, ll.labels));
  EXPECT_NEAR(mb.wcss, ll.wcss, 1e-6 * ll.wcss);
}

TEST(MiniBatch, DeterministicForSeed) {
  std::vector<int> truth;
  const Matrix m = gaussian_blobs(4, 100, 3, 3.0, 8, &truth);
  EXPECT_EQ(minibatch_kmeans(m, 7, 64, 1).labels, minibatch_kmeans(m, 7, 64, 1).labels);
}

TEST(Elbow, LinearCurveTiesToSmallestInterior) {
  const std::vector<std::size_t> ks{2, 3, 4, 5, 6};
  const std::vector<double> wcss{50, 40, 30, 20, 10};
  EXPECT_EQ(elbow_from_curve(ks, wcss), 3u);
}

TEST(Elbow, HandCurve) {
  // Second differences at k=3,4,5: 100-2*60+50=30, 60-2*50+45=5, 50-2*45+42=2.
  const std::vector<std::size_t> ks{2, 3, 4, 5, 6};
  const std::vector<double> wcss{100, 60, 50, 45, 42};
  EXPECT_EQ(elbow_from_curve(ks, wcss), 3u);
  EXPECT_THROW(elbow_from_curve(std::vector<std::size_t>{2, 3}, std::vector<double>{1, 0}),
               ConfigError);
}

TEST(Elbow, SingleBlobFollowsRuleOnItsOwnCurve) {
  std::vector<int> truth;
  const Matrix m = gaussian_blobs(1, 200, 2, 0.0, 3, &truth);
  const ElbowReport r = elbow_select(m, 2, 6, 11);
  ASSERT_EQ(r.wcss_curve.size(), 5u);
  std::size_t best_k = 0;
  double best = -1e300;
  for (std::size_t i = 1; i + 1 < 5; ++i) {
    const double s = r.wcss_curve[i - 1] - 2 * r.wcss_curve[i] + r.wcss_curve[i + 1];
    if (s > best) {
      best = s;
      best_k = r.candidate_ks[i];
    }
  }
  EXPECT_EQ(r.chosen_k, best_k);
}

TEST(Elbow, FourSeparatedClusters) {
  std::vector<int> truth;
  const Matrix m = gaussian_blobs(4, 60, 6, 10.0, 21, &truth);
  const ElbowReport r = elbow_select(m, 2, 8, 21);
  EXPECT_EQ(r.chosen_k, 4u);
  for (std::size_t i = 1; i < r.wcss_curve.size(); ++i) {
    EXPECT_LE(r.wcss_curve[i], r.wcss_curve[i - 1] * 1.05);
  }
}

TEST(Elbow, RangeTooNarrow) {
  Matrix m(10, 1, 0.0);
  EXPECT_THROW(elbow_select(m, 2, 3, 0), ConfigError);
  EXPECT_THROW(elbow_select(m, 2, 11, 0), ConfigError);
}

TEST(Allocation, HandExamples) {
  const std::vector<std::size_t> n2{100, 50};
  EXPECT_EQ(neyman_allocation(n2, std::vector<double>{2, 1}, 30).quotas,
            (std::vector<std::size_t>{24, 6}));
  EXPECT_EQ(optimal_allocation(n2, std::vector<double>{1, 1}, std::vector<double>{100, 50}, 15).quotas,
            (std::vector<std::size_t>{9, 6}));
  EXPECT_EQ(neyman_allocation(std::vector<std::size_t>{10, 10}, std::vector<double>{1, 1}, 10).quotas,
            (std::vector<std::size_t>{5, 5}));
  EXPECT_EQ(neyman_allocation(std::vector<std::size_t>{30, 10}, std::vector<double>{0, 0}, 4).quotas,
            (std::vector<std::size_t>{3, 1}));
  EXPECT_EQ(optimal_allocation(std::vector<std::size_t>{7}, std::vector<double>{3}, std::vector<double>{2}, 5).quotas,
            (std::vector<std::size_t>{5}));
}

TEST(Allocation, Errors) {
  const std::vector<std::size_t> sizes{3, 4};
  const std::vector<double> stds{1, 1};
  EXPECT_THROW(neyman_allocation(sizes, stds, 8), ConfigError);
  EXPECT_THROW(optimal_allocation(sizes, stds, std::vector<double>{1, 0}, 2), ConfigError);
}

TEST(Allocation, RandomInstancesInvariants) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng() % 8;
    std::vector<std::size_t> sizes(h);
    std::vector<double> stds(h);
    std::vector<double> costs(h);
    std::size_t total = 0;
    for (std::size_t i = 0; i < h; ++i) {
      sizes[i] = 1 + rng() % 60;
      stds[i] = (rng() % 5 == 0) ? 0.0 : std::uniform_real_distribution<double>(0.01, 5)(rng);
      costs[i] = std::uniform_real_distribution<double>(0.5, 50)(rng);
      total += sizes[i];
    }
    const std::size_t n = rng() % (total + 1);
    const auto ney = neyman_allocation(sizes, stds, n);
    const auto opt_uniform = optimal_allocation(sizes, stds, std::vector<double>(h, 3.7), n);
    EXPECT_EQ(ney.quotas, opt_uniform.quotas);
    std::vector<double> scaled = stds;
    for (double& s : scaled) s *= 4.0;  // exact power of two keeps the ratios exact
    EXPECT_EQ(neyman_allocation(sizes, scaled, n).quotas, ney.quotas);
    for (const auto& plan : {ney, optimal_allocation(sizes, stds, costs, n),
                             proportional_allocation(sizes, n)}) {
      EXPECT_EQ(std::accumulate(plan.quotas.begin(), plan.quotas.end(), std::size_t{0}), n);
      for (std::size_t i = 0; i < h; ++i) EXPECT_LE(plan.quotas[i], sizes[i]);
    }
  }
}

TEST(Allocation, CostModels) {
  const std::vector<std::size_t> sizes{4, 9};
  EXPECT_EQ(stratum_costs(CostModel::uniform, sizes), (std::vector<double>{1, 1}));
  EXPECT_EQ(stratum_costs(CostModel::stratum_size, sizes), (std::vector<double>{4, 9}));
  EXPECT_EQ(parse_cost_model("stratum_size"), CostModel::stratum_size);
  EXPECT_EQ(parse_allocation_strategy("neyman"), AllocationStrategy::neyman);
  EXPECT_THROW(parse_allocation_strategy("magic"), ConfigError);
}

TEST(StratumStats, HandValues) {
  Matrix m(4, 2);
  const double rows[4][2] = {{0, 0}, {2, 2}, {5, 5}, {5, 5}};
  for (int i = 0; i < 4; ++i) {
    m(i, 0) = rows[i][0];
    m(i, 1) = rows[i][1];
  }
  StrataAssignment a = fixed_strata({2, 2});
  const StratumStats s = stratum_stats(as_dataset(m), a);
  EXPECT_EQ(s.sizes, (std::vector<std::size_t>{2, 2}));
  EXPECT_DOUBLE_EQ(s.stds[0], 1.0);
  EXPECT_EQ(s.stds[1], 0.0);
}

TEST(StratumStats, SingleStratumIsPooledStd) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  Matrix m(30, 3);
  for (double& v : m.data()) v = normal(rng);
  const StratumStats s = stratum_stats(as_dataset(m), fixed_strata({30}));
  double pooled = 0.0;
  for (int f = 0; f < 3; ++f) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 30; ++i) mean += m(i, f) / 30.0;
    for (std::size_t i = 0; i < 30; ++i) var += (m(i, f) - mean) * (m(i, f) - mean) / 30.0;
    pooled += var / 3.0;
  }
  EXPECT_NEAR(s.stds[0], std::sqrt(pooled), 1e-12);
}

TEST(StratifiedSrs, PaperSizesExactTarget) {
  const std::vector<std::size_t> sizes{5, 5, 5, 85};
  Matrix m(100, 1);
  for (std::size_t i = 0; i < 100; ++i) m(i, 0) = static_cast<double>(i);
  const LabeledDataset data = as_dataset(m);
  const StrataAssignment a = fixed_strata(sizes);
  // Proportional plan, and a stale plan whose quotas overrun the small strata.
  AllocationPlan stale = proportional_allocation(sizes, 81);
  stale.quotas = {20, 20, 20, 21};
  for (const AllocationPlan& plan : {proportional_allocation(sizes, 81), stale}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto rows = stratified_srs(data, a, plan, 81, seed);
      ASSERT_EQ(rows.size(), 81u);
      EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), 81u);
      EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
      EXPECT_LT(rows.back(), 100u);
    }
  }
  // The stale plan exhausts the three small strata first.
  const auto rows = stratified_srs(data, a, stale, 81, 3);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](std::size_t r) { return r < 15; }), 15);
}

TEST(StratifiedSrs, FullTargetAndDeterminism) {
  const std::vector<std::size_t> sizes{3, 7, 10};
  Matrix m(20, 1, 0.0);
  const LabeledDataset data = as_dataset(m);
  const StrataAssignment a = fixed_strata(sizes);
  const auto plan = neyman_allocation(sizes, std::vector<double>{1, 2, 3}, 20);
  std::vector<std::size_t> all(20);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(stratified_srs(data, a, plan, 20, 0), all);
  const auto p9 = neyman_allocation(sizes, std::vector<double>{1, 2, 3}, 9);
  EXPECT_EQ(stratified_srs(data, a, p9, 9, 5), stratified_srs(data, a, p9, 9, 5));
  EXPECT_THROW(stratified_srs(data, a, plan, 21, 0), ConfigError);
}

TEST(StratifiedSrs, AdversarialExhaustion) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng() % 6;
    std::vector<std::size_t> sizes(h);
    std::size_t total = 0;
    for (auto& s : sizes) total += (s = 1 + rng() % 20);
    Matrix m(total, 1, 0.0);
    const LabeledDataset data = as_dataset(m);
    const StrataAssignment a = fixed_strata(sizes);
    const std::size_t target = rng() % (total + 1);
    AllocationPlan plan = proportional_allocation(sizes, target);
    for (auto& q : plan.quotas) q = rng() % 40;  // arbitrary quotas, often too big or too small
    const auto rows = stratified_srs(data, a, plan, target, rng());
    ASSERT_EQ(rows.size(), target);
    EXPECT_EQ(std::set<std::size_t>(rows.begin(), rows.end()).size(), target);
  }
}
