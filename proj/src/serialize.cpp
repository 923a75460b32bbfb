#include "rebalance/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rebalance/errors.hpp"
#include "rebalance/format.hpp"

namespace rebalance {

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

// First column left-aligned, the rest right-aligned, two spaces between.
std::string render_table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) line += "  ";
      line += c == 0 ? pad_right(cells[r][c], width[c]) : pad_left(cells[r][c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace

std::string dump_json(Json doc) {
  if (doc.is_object() && !doc.contains("schema_version")) doc["schema_version"] = kSchemaVersion;
  return doc.dump(2) + '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failure on '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json to_json(const PreprocessReport& report) {
  Json doc;
  doc["rows_dropped_null"] = report.rows_dropped_null;
  doc["rows_dropped_duplicate"] = report.rows_dropped_duplicate;
  doc["imputations"] = Json::object();
  for (const auto& [feature, rec] : report.imputations) {
    doc["imputations"][feature] = {{"strategy", rec.strategy}, {"fill_value", rec.fill_value}};
  }
  doc["encodings"] = Json::object();
  for (const auto& [feature, codes] : report.encodings) doc["encodings"][feature] = codes;
  doc["label_encoding"] = report.label_encoding;
  return doc;
}

Json to_json(const BinningSpec& binning) {
  Json edges = Json::array();
  // +-inf outer edges have no JSON spelling; they are implied.
  for (std::size_t i = 1; i + 1 < binning.edges.size(); ++i) edges.push_back(binning.edges[i]);
  return {{"requested_bins", binning.n_bins},
          {"effective_bins", binning.bin_count()},
          {"strategy", to_string(binning.strategy)},
          {"interior_edges", edges}};
}

Json to_json(const AllocationPlan& plan) {
  return {{"strategy", to_string(plan.strategy)},
          {"total", plan.total},
          {"sizes", plan.sizes},
          {"stds", plan.stds},
          {"costs", plan.costs},
          {"quotas", plan.quotas}};
}

Json to_json(const ElbowReport& report) {
  return {{"candidate_ks", report.candidate_ks},
          {"wcss", report.wcss_curve},
          {"chosen_k", report.chosen_k}};
}

Json to_json(const SupportPointConfig& c) {
  return {{"m", c.m},
          {"eta", c.eta},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"epsilon", c.epsilon},
          {"subset_target", c.subset_target},
          {"stage1_clusters", c.stage1_clusters},
          {"stage1_batch", c.stage1_batch},
          {"stage1_iterations", c.stage1_iterations},
          {"unique_mapping", c.unique_mapping}};
}

Json to_json(const MiConfig& c) {
  return {{"bins", c.n_bins},
          {"binning", to_string(c.binning)},
          {"k_min", c.k_min},
          {"k_max", c.k_max},
          {"allocation", to_string(c.allocation)},
          {"cost_model", to_string(c.cost_model)},
          {"kmeans_max_iter", c.kmeans.max_iter},
          {"kmeans_n_init", c.kmeans.n_init},
          {"memory_budget_bytes", c.memory_budget_bytes}};
}

Json to_json(const SupportPointSet& set, const SupportPointConfig& config) {
  return {{"config", to_json(config)},
          {"m", set.points.rows()},
          {"eta", set.eta},
          {"final_energy", set.final_energy},
          {"initial_energy", set.energy_trace.empty() ? 0.0 : set.energy_trace.front()},
          {"trace_length", set.energy_trace.size()},
          {"nearest_indices", set.nearest_indices}};
}

Json to_json(const KSTestResult& ks) {
  return {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"n1", ks.n1}, {"n2", ks.n2}};
}

Json to_json(const ValidationReport& report) {
  Json features = Json::array();
  for (std::size_t f = 0; f < report.stats.rows.size(); ++f) {
    const auto& r = report.stats.rows[f];
    features.push_back({{"feature", r.feature},
                        {"original_mean", r.original_mean},
                        {"subset_mean", r.subset_mean},
                        {"original_std", r.original_std},
                        {"subset_std", r.subset_std},
                        {"mean_gap", r.mean_gap},
                        {"std_gap", r.std_gap},
                        {"ks", to_json(report.ks[f])},
                        {"flagged", report.ks[f].p_value < report.alpha}});
  }
  return {{"alpha", report.alpha},
          {"std_convention", report.stats.std_convention},
          {"flagged", report.flagged},
          {"features", features}};
}

Json to_json(const ClassificationReport& r) {
  return {{"classes", r.classes},
          {"confusion", r.confusion},
          {"balanced_accuracy", r.balanced_accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"n_test", r.n_test}};
}

Json to_json(const BenchmarkTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"method", row.method}, {"seed", row.seed}, {"report", to_json(row.report)}});
  }
  Json aggregates = Json::array();
  for (const auto& a : table.aggregates) {
    aggregates.push_back({{"method", a.method},
                          {"runs", a.runs},
                          {"mean_balanced_accuracy", a.mean_balanced_accuracy},
                          {"std_balanced_accuracy", a.std_balanced_accuracy},
                          {"mean_f1", a.mean_f1}});
  }
  return {{"metric", "balanced_accuracy"}, {"rows", rows}, {"aggregates", aggregates}};
}

std::string strata_csv(const StrataAssignment& assignment) {
  std::string out = "row,stratum\n";
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(assignment.labels[i]) + '\n';
  }
  return out;
}

std::string energy_trace_csv(const std::vector<double>& trace) {
  std::string out = "iteration,energy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i) + ',' + format_number(trace[i]) + '\n';
  }
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& column_names) {
  std::string out;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (c) out += ',';
    out += c < column_names.size() ? column_names[c] : "x" + std::to_string(c);
  }
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_number(m(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string validation_text(const ValidationReport& report) {
  std::vector<std::vector<std::string>> cells{{"Feature", "Orig mean", "Subset mean", "Orig std",
                                               "Subset std", "Mean gap", "Std gap", "KS D",
                                               "p-value", ""}};
  for (std::size_t f = 0; f < report.stats.rows.size(); ++f) {
    const auto& r = report.stats.rows[f];
    cells.push_back({r.feature, fixed(r.original_mean), fixed(r.subset_mean),
                     fixed(r.original_std), fixed(r.subset_std), fixed(r.mean_gap),
                     fixed(r.std_gap), fixed(report.ks[f].statistic), fixed(report.ks[f].p_value),
                     report.ks[f].p_value < report.alpha ? "*" : ""});
  }
  std::string out = render_table(cells);
  out += "* p < " + format_number(report.alpha) + "; flagged " + std::to_string(report.flagged) +
         " of " + std::to_string(report.ks.size()) + " features\n";
  return out;
}

std::string benchmark_csv(const BenchmarkTable& table) {
  std::string out = "method,seed,balanced_accuracy,f1_class0,f1_class1,n_test\n";
  for (const auto& row : table.rows) {
    out += row.method + ',' + std::to_string(row.seed) + ',' +
           format_number(row.report.balanced_accuracy) + ',' + format_number(row.report.f1[0]) +
           ',' + format_number(row.report.f1[1]) + ',' + std::to_string(row.report.n_test) + '\n';
  }
  return out;
}

std::string benchmark_text(const BenchmarkTable& table) {
  std::vector<std::vector<std::string>> cells{
      {"Method", "Runs", "Balanced accuracy", "Std", "F1 class 0", "F1 class 1"}};
  for (const auto& a : table.aggregates) {
    cells.push_back({a.method, std::to_string(a.runs), fixed(a.mean_balanced_accuracy),
                     fixed(a.std_balanced_accuracy), fixed(a.mean_f1[0]), fixed(a.mean_f1[1])});
  }
  return "Summary of classification accuracies (logistic regression)\n\n" + render_table(cells);
}

}  // namespace rebalance
