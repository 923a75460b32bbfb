#pragma once

// Hot loops shared by the samplers. Each kernel exists twice: a plain serial
// reference and an OpenMP version. Both accumulate per-row partial results
// and reduce them in row order, so the two produce bitwise-identical output
// for any thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rebalance/matrix.hpp"

namespace rebalance::kernels {

enum class Backend { serial, parallel };

inline double euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double squared_euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Scratch buffers for one plug-in MI evaluation over `bins` discrete levels.
struct MiScratch {
  explicit MiScratch(std::size_t bins) : joint(bins * bins), left(bins), right(bins) {}
  std::vector<std::uint32_t> joint;
  std::vector<std::uint32_t> left;
  std::vector<std::uint32_t> right;
};

// Plug-in mutual information (nats) of two equal-length code vectors.
// Joint cells are summed as (a,a) and (a,b)+(b,a) pairs, which makes the
// result exactly symmetric in its arguments; 0 log 0 := 0.
inline double mi_from_codes(std::span<const std::uint16_t> x, std::span<const std::uint16_t> y,
                            std::size_t bins, MiScratch& s) {
  std::fill(s.joint.begin(), s.joint.end(), 0U);
  std::fill(s.left.begin(), s.left.end(), 0U);
  std::fill(s.right.begin(), s.right.end(), 0U);
  const std::size_t d = x.size();
  for (std::size_t k = 0; k < d; ++k) {
    ++s.joint[x[k] * bins + y[k]];
    ++s.left[x[k]];
    ++s.right[y[k]];
  }
  const double total = static_cast<double>(d);
  const auto term = [&](std::size_t a, std::size_t b) {
    const std::uint64_t n_ab = s.joint[a * bins + b];
    if (n_ab == 0) return 0.0;
    const double ratio = static_cast<double>(n_ab * d) /
                         static_cast<double>(std::uint64_t{s.left[a]} * s.right[b]);
    return (static_cast<double>(n_ab) / total) * std::log(ratio);
  };
  double mi = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    mi += term(a, a);
    for (std::size_t b = a + 1; b < bins; ++b) mi += term(a, b) + term(b, a);
  }
  return mi > 0.0 ? mi : 0.0;
}

// Result of one pass over (X, Z) for the energy objective.
struct EnergyPass {
  double cross_sum = 0.0;  // sum_j sum_i |z_j - x_i|
  double self_sum = 0.0;   // sum_j sum_j' |z_j - z_j'|
};

namespace serial {
// out(i,j) = MI(codes_i, codes_j) for all i, j; codes holds n rows of d codes.
void mi_matrix(std::span<const std::uint16_t> codes, std::size_t n, std::size_t d,
               std::size_t bins, Matrix& out);
// sum_j sum_i |z_j - x_i|
double cross_distance_sum(const Matrix& x, const Matrix& z);
// sum_a sum_b |x_a - x_b| over all ordered pairs
double self_distance_sum(const Matrix& x);
// Fills grad (m x d) with the energy gradient and returns both distance sums.
// Pairs closer than epsilon contribute nothing to the gradient.
EnergyPass energy_gradient(const Matrix& x, const Matrix& z, double epsilon, Matrix& grad);
// Nearest centroid per point, ties to the lower index. Returns sum of dist2.
double assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> labels,
                      std::span<double> dist2);
// dist2[i] = min(dist2[i], |points_i - c|^2)
void relax_min_distance(const Matrix& points, std::span<const double> c,
                        std::span<double> dist2);
// For each row of z, its k nearest rows of x as (distance, row) ascending.
std::vector<std::vector<std::pair<double, std::size_t>>> nearest_rows(const Matrix& z,
                                                                     const Matrix& x,
                                                                     std::size_t k);
}  // namespace serial

namespace omp {
// out(i,j) = MI(codes_i, codes_j) for all i, j; codes holds n rows of d codes.
void mi_matrix(std::span<const std::uint16_t> codes, std::size_t n, std::size_t d,
               std::size_t bins, Matrix& out);
// sum_j sum_i |z_j - x_i|
double cross_distance_sum(const Matrix& x, const Matrix& z);
// sum_a sum_b |x_a - x_b| over all ordered pairs
double self_distance_sum(const Matrix& x);
// Fills grad (m x d) with the energy gradient and returns both distance sums.
// Pairs closer than epsilon contribute nothing to the gradient.
EnergyPass energy_gradient(const Matrix& x, const Matrix& z, double epsilon, Matrix& grad);
// Nearest centroid per point, ties to the lower index. Returns sum of dist2.
double assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> labels,
                      std::span<double> dist2);
// dist2[i] = min(dist2[i], |points_i - c|^2)
void relax_min_distance(const Matrix& points, std::span<const double> c,
                        std::span<double> dist2);
// For each row of z, its k nearest rows of x as (distance, row) ascending.
std::vector<std::vector<std::pair<double, std::size_t>>> nearest_rows(const Matrix& z,
                                                                     const Matrix& x,
                                                                     std::size_t k);
// Worker count the OpenMP runtime will use for the next parallel region.
int max_threads();
}  // namespace omp

}  // namespace rebalance::kernels
