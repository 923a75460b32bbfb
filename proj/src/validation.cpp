#include "rebalance/validation.hpp"

#include <algorithm>
#include <cmath>

#include "rebalance/errors.hpp"

namespace rebalance {

namespace {

void check_schema(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dims() != b.dims()) throw DataError("validation: feature counts differ");
  if (!a.feature_names.empty() && !b.feature_names.empty() &&
      a.feature_names != b.feature_names) {
    throw DataError("validation: feature names differ");
  }
}

std::pair<double, double> mean_and_std(const Matrix& m, std::size_t col) {
  const auto n = static_cast<double>(m.rows());
  double mean = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, col);
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double t = m(i, col) - mean;
    var += t * t;
  }
  return {mean, std::sqrt(var / n)};
}

std::vector<double> column(const Matrix& m, std::size_t col) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, col);
  return out;
}

}  // namespace

FeatureStatsReport feature_stats(const LabeledDataset& original, const LabeledDataset& subset) {
  check_schema(original, subset);
  if (original.size() == 0 || subset.size() == 0) throw DataError("feature_stats: empty dataset");
  FeatureStatsReport report;
  for (std::size_t f = 0; f < original.dims(); ++f) {
    FeatureStatsRow row;
    row.feature = f < original.feature_names.size() ? original.feature_names[f]
                                                    : "f" + std::to_string(f);
    std::tie(row.original_mean, row.original_std) = mean_and_std(original.features, f);
    std::tie(row.subset_mean, row.subset_std) = mean_and_std(subset.features, f);
    row.mean_gap = std::abs(row.original_mean - row.subset_mean);
    row.std_gap = std::abs(row.original_std - row.subset_std);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("ks: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n1 = static_cast<double>(x.size());
  const auto n2 = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  return d;
}

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSTestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  KSTestResult r;
  r.statistic = ks_statistic(a, b);
  r.n1 = a.size();
  r.n2 = b.size();
  const double ne = static_cast<double>(r.n1) * static_cast<double>(r.n2) /
                    static_cast<double>(r.n1 + r.n2);
  const double root = std::sqrt(ne);
  r.p_value = kolmogorov_q(r.statistic * (root + 0.12 + 0.11 / root));
  return r;
}

double ks_exact_p_value(double d, std::size_t n1, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw DataError("ks: empty sample");
  if (n1 * n2 > 10000) throw ConfigError("ks exact mode is limited to n1 * n2 <= 10000");
  if (!(d > 0.0)) return 1.0;
  // Paths from (0,0) to (n1,n2) whose every vertex keeps |i/n1 - j/n2| < d.
  const double limit = d - 1e-12;
  const auto inside = [&](std::size_t i, std::size_t j) {
    return std::abs(static_cast<double>(i) / static_cast<double>(n1) -
                    static_cast<double>(j) / static_cast<double>(n2)) < limit;
  };
  std::vector<double> paths(n2 + 1, 0.0);
  for (std::size_t i = 0; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      if (i == 0 && j == 0) {
        paths[j] = 1.0;
      } else {
        const double from_left = j > 0 ? paths[j - 1] : 0.0;
        const double from_below = i > 0 ? paths[j] : 0.0;
        paths[j] = from_left + from_below;
      }
      if (!inside(i, j)) paths[j] = 0.0;
    }
  }
  // log C(n1 + n2, n1)
  const double log_total = std::lgamma(static_cast<double>(n1 + n2) + 1.0) -
                           std::lgamma(static_cast<double>(n1) + 1.0) -
                           std::lgamma(static_cast<double>(n2) + 1.0);
  const double within = paths[n2] > 0.0 ? std::exp(std::log(paths[n2]) - log_total) : 0.0;
  return std::clamp(1.0 - within, 0.0, 1.0);
}

ValidationReport validate_subset(const LabeledDataset& original_majority,
                                 const LabeledDataset& subset, double alpha) {
  ValidationReport report;
  report.alpha = alpha;
  report.stats = feature_stats(original_majority, subset);
  for (std::size_t f = 0; f < original_majority.dims(); ++f) {
    const auto a = column(original_majority.features, f);
    const auto b = column(subset.features, f);
    report.ks.push_back(ks_two_sample(a, b));
    if (report.ks.back().p_value < alpha) ++report.flagged;
  }
  return report;
}

}  // namespace rebalance
