#pragma once

// Per-row bodies shared by the serial and OpenMP kernels. Keeping the row
// arithmetic in one place is what makes the two backends bitwise-identical.

#include <algorithm>
#include <vector>

#include "rebalance/kernels.hpp"

namespace rebalance::kernels::rows {

inline double distance_row_sum(std::span<const double> a, const Matrix& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += euclidean(a, x.row(i));
  return s;
}

// Writes row j of the energy gradient into `out` and returns the two distance
// row sums (against x and against z).
inline EnergyPass energy_gradient_row(const Matrix& x, const Matrix& z, std::size_t j,
                                      double epsilon, std::span<double> out,
                                      std::vector<double>& toward_x,
                                      std::vector<double>& toward_z) {
  const std::size_t d = z.cols();
  const auto zj = z.row(j);
  std::fill(toward_x.begin(), toward_x.end(), 0.0);
  std::fill(toward_z.begin(), toward_z.end(), 0.0);
  EnergyPass sums;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const double dist = euclidean(zj, xi);
    sums.cross_sum += dist;
    if (dist < epsilon) continue;
    const double inv = 1.0 / dist;
    for (std::size_t k = 0; k < d; ++k) toward_x[k] += (zj[k] - xi[k]) * inv;
  }
  for (std::size_t jp = 0; jp < z.rows(); ++jp) {
    const auto zo = z.row(jp);
    const double dist = euclidean(zj, zo);
    sums.self_sum += dist;
    if (jp == j || dist < epsilon) continue;
    const double inv = 1.0 / dist;
    for (std::size_t k = 0; k < d; ++k) toward_z[k] += (zj[k] - zo[k]) * inv;
  }
  const double n = static_cast<double>(x.rows());
  const double m = static_cast<double>(z.rows());
  const double cross_scale = 2.0 / (n * m);
  const double self_scale = 2.0 / (m * m);
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = cross_scale * toward_x[k] - self_scale * toward_z[k];
  }
  return sums;
}

inline int nearest_centroid(std::span<const double> p, const Matrix& centroids, double& best) {
  int arg = 0;
  best = squared_euclidean(p, centroids.row(0));
  for (std::size_t c = 1; c < centroids.rows(); ++c) {
    const double d2 = squared_euclidean(p, centroids.row(c));
    if (d2 < best) {
      best = d2;
      arg = static_cast<int>(c);
    }
  }
  return arg;
}

inline std::vector<std::pair<double, std::size_t>> k_nearest(std::span<const double> q,
                                                            const Matrix& x, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> cand(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) cand[i] = {euclidean(q, x.row(i)), i};
  k = std::min(k, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  cand.resize(k);
  cand.shrink_to_fit();
  return cand;
}

}  // namespace rebalance::kernels::rows
