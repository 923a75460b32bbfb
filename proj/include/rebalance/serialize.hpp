#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rebalance/dataset.hpp"
#include "rebalance/evaluation.hpp"
#include "rebalance/stratification.hpp"
#include "rebalance/support_points.hpp"
#include "rebalance/undersampling.hpp"
#include "rebalance/validation.hpp"

namespace rebalance {

using Json = nlohmann::json;  // std::map-backed: keys come out sorted

inline constexpr int kSchemaVersion = 1;

// Pretty-printed, trailing newline. Adds schema_version to objects that lack it.
std::string dump_json(Json doc);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

Json to_json(const PreprocessReport& report);
Json to_json(const BinningSpec& binning);
Json to_json(const AllocationPlan& plan);
Json to_json(const ElbowReport& report);
Json to_json(const SupportPointConfig& config);
Json to_json(const MiConfig& config);
// Config, final energy, learning rate, trace length and the index map; the
// points themselves go to matrix_csv.
Json to_json(const SupportPointSet& set, const SupportPointConfig& config);
Json to_json(const KSTestResult& ks);
Json to_json(const ValidationReport& report);
Json to_json(const ClassificationReport& report);
Json to_json(const BenchmarkTable& table);

// "row,stratum" per point.
std::string strata_csv(const StrataAssignment& assignment);
// "iteration,energy"
std::string energy_trace_csv(const std::vector<double>& trace);
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& column_names);

// Aligned columns: feature, means, stds, gaps, KS statistic and p-value.
std::string validation_text(const ValidationReport& report);

std::string benchmark_csv(const BenchmarkTable& table);
// Methods as rows, balanced accuracy (mean, std over seeds) and per-class F1.
std::string benchmark_text(const BenchmarkTable& table);

}  // namespace rebalance
