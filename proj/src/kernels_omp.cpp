#include <omp.h>

#include "kernel_rows.hpp"

namespace rebalance::kernels::omp {

namespace {

double ordered_sum(const std::vector<double>& parts) {
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void mi_matrix(std::span<const std::uint16_t> codes, std::size_t n, std::size_t d,
               std::size_t bins, Matrix& out) {
  out = Matrix(n, n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    MiScratch scratch(bins);
    // Row i has n - i cells; dynamic scheduling evens out the triangle.
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      const auto xi = codes.subspan(i * d, d);
      for (std::size_t j = i; j < n; ++j) {
        const double v = mi_from_codes(xi, codes.subspan(j * d, d), bins, scratch);
        out(i, j) = v;
        out(j, i) = v;
      }
    }
  }
}

double cross_distance_sum(const Matrix& x, const Matrix& z) {
  std::vector<double> parts(z.rows());
  const auto m = static_cast<std::ptrdiff_t>(z.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    parts[static_cast<std::size_t>(j)] = rows::distance_row_sum(z.row(static_cast<std::size_t>(j)), x);
  }
  return ordered_sum(parts);
}

double self_distance_sum(const Matrix& x) { return cross_distance_sum(x, x); }

EnergyPass energy_gradient(const Matrix& x, const Matrix& z, double epsilon, Matrix& grad) {
  grad = Matrix(z.rows(), z.cols());
  std::vector<double> cross(z.rows());
  std::vector<double> self(z.rows());
  const auto m = static_cast<std::ptrdiff_t>(z.rows());
#pragma omp parallel
  {
    std::vector<double> toward_x(z.cols());
    std::vector<double> toward_z(z.cols());
#pragma omp for schedule(static)
    for (std::ptrdiff_t jj = 0; jj < m; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      const EnergyPass row =
          rows::energy_gradient_row(x, z, j, epsilon, grad.row(j), toward_x, toward_z);
      cross[j] = row.cross_sum;
      self[j] = row.self_sum;
    }
  }
  EnergyPass total;
  for (std::size_t j = 0; j < z.rows(); ++j) {
    total.cross_sum += cross[j];
    total.self_sum += self[j];
  }
  return total;
}

double assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> labels,
                      std::span<double> dist2) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    labels[i] = rows::nearest_centroid(points.row(i), centroids, dist2[i]);
  }
  double total = 0.0;
  for (double v : dist2) total += v;
  return total;
}

void relax_min_distance(const Matrix& points, std::span<const double> c,
                        std::span<double> dist2) {
  const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    dist2[i] = std::min(dist2[i], squared_euclidean(points.row(i), c));
  }
}

std::vector<std::vector<std::pair<double, std::size_t>>> nearest_rows(const Matrix& z,
                                                                     const Matrix& x,
                                                                     std::size_t k) {
  std::vector<std::vector<std::pair<double, std::size_t>>> out(z.rows());
  const auto m = static_cast<std::ptrdiff_t>(z.rows());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t jj = 0; jj < m; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    out[j] = rows::k_nearest(z.row(j), x, k);
  }
  return out;
}

}  // namespace rebalance::kernels::omp
