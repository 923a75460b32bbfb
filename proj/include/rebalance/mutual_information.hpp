#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/kernels.hpp"
#include "rebalance/matrix.hpp"

namespace rebalance {

enum class BinningStrategy { equal_width, quantile };

std::string to_string(BinningStrategy s);
BinningStrategy parse_binning_strategy(const std::string& text);

// Global discretization shared by every feature cell of a dataset. The outer
// edges are -inf/+inf; coinciding interior edges are merged, so the effective
// bin count can be below the requested one (a constant dataset has one bin).
struct BinningSpec {
  std::size_t n_bins = 2;
  BinningStrategy strategy = BinningStrategy::quantile;
  std::vector<double> edges;

  std::size_t bin_count() const noexcept { return edges.size() - 1; }
  // Bin b holds values in [edges[b], edges[b+1]).
  std::uint16_t bin_of(double v) const;
};

// max(2, floor(sqrt(d)))
std::size_t default_bin_count(std::size_t dims);

BinningSpec make_binning(const Matrix& features, std::size_t n_bins, BinningStrategy strategy);
inline BinningSpec make_binning(const LabeledDataset& data, std::size_t n_bins,
                                BinningStrategy strategy) {
  return make_binning(data.features, n_bins, strategy);
}

std::vector<std::uint16_t> discretize(std::span<const double> values, const BinningSpec& binning);

// Plug-in entropy (nats) of one row's binned coordinates.
double entropy(std::span<const double> x, const BinningSpec& binning);

// MI (nats) between two data rows, estimated from the joint histogram of
// their d coordinate pairs under the shared binning.
double pairwise_mi_rows(std::span<const double> x, std::span<const double> y,
                        const BinningSpec& binning);

struct MIMatrix {
  Matrix values;
  BinningSpec binning;
};

struct DissimilarityMatrix {
  Matrix values;
  std::string derivation = "max-minus-mi";
};

inline constexpr std::size_t kDefaultMatrixBudgetBytes = std::size_t{2} << 30;

struct MIOptions {
  kernels::Backend backend = kernels::Backend::parallel;
  std::size_t memory_budget_bytes = kDefaultMatrixBudgetBytes;
};

// Throws ResourceGuardError when an n x n matrix of doubles exceeds the budget.
void check_pairwise_budget(std::size_t n, std::size_t budget_bytes);

MIMatrix mi_matrix(const LabeledDataset& majority, const BinningSpec& binning,
                   const MIOptions& options = {});

DissimilarityMatrix mi_to_dissimilarity(const MIMatrix& mi);

// Dense layout: little-endian uint64 n, then n*n float64 row-major.
void write_square_binary(const Matrix& m, const std::filesystem::path& path);
Matrix read_square_binary(const std::filesystem::path& path);
std::string square_to_csv(const Matrix& m);

}  // namespace rebalance
