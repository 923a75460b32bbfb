#pragma once

#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"

namespace rebalance {

struct FeatureStatsRow {
  std::string feature;
  double original_mean = 0.0;
  double subset_mean = 0.0;
  double original_std = 0.0;
  double subset_std = 0.0;
  double mean_gap = 0.0;
  double std_gap = 0.0;
};

struct FeatureStatsReport {
  std::vector<FeatureStatsRow> rows;
  std::string std_convention = "population";
};

// Per-feature population mean/std of both datasets and their absolute gaps.
FeatureStatsReport feature_stats(const LabeledDataset& original, const LabeledDataset& subset);

struct KSTestResult {
  double statistic = 0.0;  // D
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// sup_t |F_a(t) - F_b(t)| with right-continuous ECDFs, by a merged sweep.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Kolmogorov survival function Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2),
// clamped to [0, 1].
double kolmogorov_q(double lambda);

// Two-sample KS test with the asymptotic p-value at
// lambda = D (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)), ne = n1 n2 / (n1 + n2).
KSTestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Exact two-sided P(D >= d) under the null by lattice-path counting; assumes
// no ties. Only offered for n1 * n2 <= 10000.
double ks_exact_p_value(double d, std::size_t n1, std::size_t n2);

struct ValidationReport {
  FeatureStatsReport stats;
  std::vector<KSTestResult> ks;  // one per feature
  double alpha = 0.05;
  std::size_t flagged = 0;       // features with p < alpha
};

ValidationReport validate_subset(const LabeledDataset& original_majority,
                                 const LabeledDataset& subset, double alpha = 0.05);

}  // namespace rebalance
