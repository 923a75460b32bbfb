#include "rebalance/mutual_information.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "rebalance/errors.hpp"
#include "rebalance/format.hpp"

namespace rebalance {

std::string to_string(BinningStrategy s) {
  return s == BinningStrategy::equal_width ? "equal_width" : "quantile";
}

BinningStrategy parse_binning_strategy(const std::string& text) {
  if (text == "equal_width") return BinningStrategy::equal_width;
  if (text == "quantile") return BinningStrategy::quantile;
  throw ConfigError("unknown binning strategy '" + text + "'");
}

std::uint16_t BinningSpec::bin_of(double v) const {
  const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
  return static_cast<std::uint16_t>(it - (edges.begin() + 1));
}

std::size_t default_bin_count(std::size_t dims) {
  const auto root = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(dims))));
  return std::max<std::size_t>(2, root);
}

BinningSpec make_binning(const Matrix& features, std::size_t n_bins, BinningStrategy strategy) {
  if (n_bins < 2) throw ConfigError("make_binning: n_bins must be at least 2");
  if (n_bins > std::numeric_limits<std::uint16_t>::max()) {
    throw ConfigError("make_binning: n_bins too large");
  }
  const auto cells = features.data();
  if (cells.empty()) throw DataError("make_binning: empty data");

  std::vector<double> interior;
  if (strategy == BinningStrategy::equal_width) {
    const auto [lo, hi] = std::minmax_element(cells.begin(), cells.end());
    const double width = *hi - *lo;
    if (width > 0.0) {
      for (std::size_t b = 1; b < n_bins; ++b) {
        interior.push_back(*lo + width * static_cast<double>(b) / static_cast<double>(n_bins));
      }
    }
  } else {
    std::vector<double> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < sorted.back()) {
      // Linear interpolation between order statistics at q * (count - 1).
      const double last = static_cast<double>(sorted.size() - 1);
      for (std::size_t b = 1; b < n_bins; ++b) {
        const double pos = last * static_cast<double>(b) / static_cast<double>(n_bins);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double v = lo + 1 < sorted.size()
                             ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
                             : sorted[lo];
        interior.push_back(v);
      }
    }
  }
  interior.erase(std::unique(interior.begin(), interior.end()), interior.end());

  BinningSpec spec;
  spec.n_bins = n_bins;
  spec.strategy = strategy;
  spec.edges.push_back(-std::numeric_limits<double>::infinity());
  spec.edges.insert(spec.edges.end(), interior.begin(), interior.end());
  spec.edges.push_back(std::numeric_limits<double>::infinity());
  return spec;
}

std::vector<std::uint16_t> discretize(std::span<const double> values, const BinningSpec& binning) {
  std::vector<std::uint16_t> codes(values.size());
  std::transform(values.begin(), values.end(), codes.begin(),
                 [&](double v) { return binning.bin_of(v); });
  return codes;
}

double entropy(std::span<const double> x, const BinningSpec& binning) {
  std::vector<std::size_t> counts(binning.bin_count());
  for (double v : x) ++counts[binning.bin_of(v)];
  const auto d = static_cast<double>(x.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const auto n = static_cast<double>(c);
    // Written as p * log(d / n) so that it matches I(x, x) term for term.
    h += (n / d) * std::log(static_cast<double>(c * x.size()) / static_cast<double>(c * c));
  }
  return h;
}

double pairwise_mi_rows(std::span<const double> x, std::span<const double> y,
                        const BinningSpec& binning) {
  if (x.size() != y.size() || x.empty()) {
    throw ConfigError("pairwise_mi_rows: rows must have equal nonzero length");
  }
  kernels::MiScratch scratch(binning.bin_count());
  const auto cx = discretize(x, binning);
  const auto cy = discretize(y, binning);
  return kernels::mi_from_codes(cx, cy, binning.bin_count(), scratch);
}

void check_pairwise_budget(std::size_t n, std::size_t budget_bytes) {
  const long double bytes = static_cast<long double>(n) * n * sizeof(double);
  if (bytes > static_cast<long double>(budget_bytes)) {
    throw ResourceGuardError("pairwise matrix for " + std::to_string(n) + " rows needs " +
                             format_number(static_cast<double>(bytes) / (1 << 30)) +
                             " GiB, over the " +
                             format_number(static_cast<double>(budget_bytes) / (1 << 30)) +
                             " GiB budget; use the support_points method for data this size");
  }
}

MIMatrix mi_matrix(const LabeledDataset& majority, const BinningSpec& binning,
                   const MIOptions& options) {
  const std::size_t n = majority.size();
  if (n < 2) throw DataError("mi_matrix: needs at least two rows");
  check_pairwise_budget(n, options.memory_budget_bytes);
  const auto codes = discretize(majority.features.data(), binning);
  MIMatrix out;
  out.binning = binning;
  if (options.backend == kernels::Backend::parallel) {
    kernels::omp::mi_matrix(codes, n, majority.dims(), binning.bin_count(), out.values);
  } else {
    kernels::serial::mi_matrix(codes, n, majority.dims(), binning.bin_count(), out.values);
  }
  return out;
}

DissimilarityMatrix mi_to_dissimilarity(const MIMatrix& mi) {
  const std::size_t n = mi.values.rows();
  if (n < 2) throw DataError("mi_to_dissimilarity: needs at least two rows");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) top = std::max(top, mi.values(i, j));
    }
  }
  DissimilarityMatrix out;
  out.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out.values(i, j) = top - mi.values(i, j);
    }
  }
  return out;
}

void write_square_binary(const Matrix& m, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "binary layout is little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const std::uint64_t n = m.rows();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size_bytes()));
}

Matrix read_square_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in) throw DataError("truncated matrix header in '" + path.string() + "'");
  const auto size = std::filesystem::file_size(path);
  if (n > (1ULL << 28) || size != sizeof(n) + n * n * sizeof(double)) {
    throw DataError("matrix file '" + path.string() + "' does not hold an n x n body");
  }
  Matrix m(n, n);
  in.read(reinterpret_cast<char*>(m.data().data()),
          static_cast<std::streamsize>(m.data().size_bytes()));
  if (!in) throw DataError("truncated matrix body in '" + path.string() + "'");
  return m;
}

std::string square_to_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_number(m(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace rebalance
