#include "kernel_rows.hpp"

namespace rebalance::kernels::serial {

void mi_matrix(std::span<const std::uint16_t> codes, std::size_t n, std::size_t d,
               std::size_t bins, Matrix& out) {
  out = Matrix(n, n);
  MiScratch scratch(bins);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = codes.subspan(i * d, d);
    for (std::size_t j = i; j < n; ++j) {
      const double v = mi_from_codes(xi, codes.subspan(j * d, d), bins, scratch);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
}

double cross_distance_sum(const Matrix& x, const Matrix& z) {
  double total = 0.0;
  for (std::size_t j = 0; j < z.rows(); ++j) total += rows::distance_row_sum(z.row(j), x);
  return total;
}

double self_distance_sum(const Matrix& x) { return cross_distance_sum(x, x); }

EnergyPass energy_gradient(const Matrix& x, const Matrix& z, double epsilon, Matrix& grad) {
  grad = Matrix(z.rows(), z.cols());
  std::vector<double> toward_x(z.cols());
  std::vector<double> toward_z(z.cols());
  EnergyPass total;
  for (std::size_t j = 0; j < z.rows(); ++j) {
    const EnergyPass row =
        rows::energy_gradient_row(x, z, j, epsilon, grad.row(j), toward_x, toward_z);
    total.cross_sum += row.cross_sum;
    total.self_sum += row.self_sum;
  }
  return total;
}

double assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> labels,
                      std::span<double> dist2) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    labels[i] = rows::nearest_centroid(points.row(i), centroids, dist2[i]);
    total += dist2[i];
  }
  return total;
}

void relax_min_distance(const Matrix& points, std::span<const double> c,
                        std::span<double> dist2) {
  for (std::size_t i = 0; i < points.rows(); ++i) {
    dist2[i] = std::min(dist2[i], squared_euclidean(points.row(i), c));
  }
}

std::vector<std::vector<std::pair<double, std::size_t>>> nearest_rows(const Matrix& z,
                                                                     const Matrix& x,
                                                                     std::size_t k) {
  std::vector<std::vector<std::pair<double, std::size_t>>> out(z.rows());
  for (std::size_t j = 0; j < z.rows(); ++j) out[j] = rows::k_nearest(z.row(j), x, k);
  return out;
}

}  // namespace rebalance::kernels::serial
