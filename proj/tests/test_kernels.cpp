#include <gtest/gtest.h>

#include <random>

#include "rebalance/kernels.hpp"

using namespace rebalance;
namespace sk = rebalance::kernels::serial;
namespace ok = rebalance::kernels::omp;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(n, d);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

}  // namespace

TEST(Kernels, MiMatrixBitwise) {
  std::mt19937_64 rng(1);
  const std::size_t n = 37, d = 9, bins = 3;
  std::vector<std::uint16_t> codes(n * d);
  for (auto& c : codes) c = static_cast<std::uint16_t>(rng() % bins);
  Matrix a, b;
  sk::mi_matrix(codes, n, d, bins, a);
  ok::mi_matrix(codes, n, d, bins, b);
  EXPECT_EQ(a, b);
}

TEST(Kernels, DistanceSumsBitwise) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const Matrix x = random_matrix(113, 4, rng);
    const Matrix z = random_matrix(17, 4, rng);
    EXPECT_EQ(sk::cross_distance_sum(x, z), ok::cross_distance_sum(x, z));
    EXPECT_EQ(sk::self_distance_sum(z), ok::self_distance_sum(z));
  }
}

TEST(Kernels, EnergyGradientBitwise) {
  std::mt19937_64 rng(3);
  const Matrix x = random_matrix(200, 5, rng);
  const Matrix z = random_matrix(20, 5, rng);
  Matrix ga(20, 5), gb(20, 5);
  const auto pa = sk::energy_gradient(x, z, 1e-10, ga);
  const auto pb = ok::energy_gradient(x, z, 1e-10, gb);
  EXPECT_EQ(ga, gb);
  EXPECT_EQ(pa.cross_sum, pb.cross_sum);
  EXPECT_EQ(pa.self_sum, pb.self_sum);
}

TEST(Kernels, AssignAndRelaxBitwise) {
  std::mt19937_64 rng(4);
  const Matrix p = random_matrix(300, 3, rng);
  const Matrix c = random_matrix(6, 3, rng);
  std::vector<int> la(300), lb(300);
  std::vector<double> da(300), db(300);
  EXPECT_EQ(sk::assign_nearest(p, c, la, da), ok::assign_nearest(p, c, lb, db));
  EXPECT_EQ(la, lb);
  EXPECT_EQ(da, db);
  sk::relax_min_distance(p, c.row(2), da);
  ok::relax_min_distance(p, c.row(2), db);
  EXPECT_EQ(da, db);
}

TEST(Kernels, AssignTiesGoToLowerIndex) {
  const Matrix p = Matrix::from_rows({{0.0}});
  const Matrix c = Matrix::from_rows({{1.0}, {-1.0}});
  std::vector<int> l(1);
  std::vector<double> d(1);
  sk::assign_nearest(p, c, l, d);
  EXPECT_EQ(l[0], 0);
  ok::assign_nearest(p, c, l, d);
  EXPECT_EQ(l[0], 0);
}

TEST(Kernels, NearestRowsBitwise) {
  std::mt19937_64 rng(5);
  const Matrix x = random_matrix(150, 3, rng);
  const Matrix z = random_matrix(12, 3, rng);
  const auto a = sk::nearest_rows(z, x, 7);
  EXPECT_EQ(a, ok::nearest_rows(z, x, 7));
  for (const auto& list : a) {
    ASSERT_EQ(list.size(), 7u);
    for (std::size_t i = 1; i < list.size(); ++i) EXPECT_LE(list[i - 1].first, list[i].first);
  }
}

TEST(Kernels, ThreadCountPositive) { EXPECT_GE(ok::max_threads(), 1); }
