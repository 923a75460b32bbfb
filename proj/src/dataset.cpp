#include "rebalance/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rebalance/errors.hpp"
#include "rebalance/format.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

namespace {

// Splits RFC-4180 text into records of fields. `quoted` marks fields that were
// enclosed in double quotes so missing-token matching only applies to bare text.
struct Field {
  std::string text;
  bool quoted = false;
};

std::vector<std::vector<Field>> tokenize_csv(std::string_view text) {
  std::vector<std::vector<Field>> records;
  std::vector<Field> record;
  Field field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  const auto end_field = [&] {
    record.push_back(std::move(field));
    field = Field{};
    field_started = false;
  };
  const auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // BOM
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.text.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.text.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          in_quotes = true;
          field.quoted = true;
          field_started = true;
        } else {
          field.text.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.text.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("CSV: unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  // Drop blank lines (a record with one empty unquoted field).
  std::erase_if(records, [](const std::vector<Field>& r) {
    return r.size() == 1 && r[0].text.empty() && !r[0].quoted;
  });
  return records;
}

std::string cell_text(const Cell& c) {
  if (std::holds_alternative<double>(c)) return format_number(std::get<double>(c));
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  return {};
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::map<int, std::size_t> count_classes(std::span<const int> labels) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  return counts;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.features = features.select_rows(rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels[r]);
  out.class_counts = count_classes(out.labels);
  out.feature_names = feature_names;
  out.class_names = class_names;
  return out;
}

void check_labeled(const LabeledDataset& data) {
  if (data.features.rows() != data.labels.size()) {
    throw DataError("dataset: feature rows and labels differ in length");
  }
  if (data.dims() < 1) throw DataError("dataset: needs at least one feature");
  if (data.size() < 2) throw DataError("dataset: needs at least two rows");
  for (double v : data.features.data()) {
    if (!std::isfinite(v)) throw DataError("dataset: non-finite feature value");
  }
  if (data.class_counts != count_classes(data.labels)) {
    throw DataError("dataset: class_counts disagree with labels");
  }
  if (data.class_counts.size() < 2) throw DataError("dataset: needs at least two classes");
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dims() != b.dims()) throw DataError("concat: feature count mismatch");
  LabeledDataset out;
  std::vector<double> values(a.features.data().begin(), a.features.data().end());
  values.insert(values.end(), b.features.data().begin(), b.features.data().end());
  out.features = Matrix(a.size() + b.size(), a.dims(), std::move(values));
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.class_counts = count_classes(out.labels);
  out.feature_names = a.feature_names;
  out.class_names = a.class_names.size() >= b.class_names.size() ? a.class_names : b.class_names;
  return out;
}

LabeledDataset shuffled(const LabeledDataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, "shuffle");
  std::shuffle(order.begin(), order.end(), rng);
  return data.subset(order);
}

RawTable parse_csv(std::string_view text, const std::string& label_column,
                   const std::set<std::string>& missing_tokens) {
  auto records = tokenize_csv(text);
  if (records.empty()) throw DataError("CSV: missing header row");
  RawTable table;
  for (auto& f : records.front()) table.column_names.push_back(std::move(f.text));
  {
    std::set<std::string> seen;
    for (const auto& name : table.column_names) {
      if (!seen.insert(name).second) throw DataError("CSV: duplicate column name '" + name + "'");
    }
  }
  const auto it = std::find(table.column_names.begin(), table.column_names.end(), label_column);
  if (it == table.column_names.end()) {
    throw DataError("CSV: label column '" + label_column + "' not found");
  }
  table.label_column = static_cast<std::size_t>(it - table.column_names.begin());

  const std::size_t n_cols = table.column_names.size();
  table.n_rows = records.size() - 1;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != n_cols) {
      throw DataError("CSV: row " + std::to_string(r + 1) + " has " +
                      std::to_string(records[r].size()) + " fields, expected " +
                      std::to_string(n_cols));
    }
  }

  // A column is numeric iff every non-missing cell parses as a finite number.
  table.columns.assign(n_cols, {});
  for (std::size_t c = 0; c < n_cols; ++c) {
    auto& column = table.columns[c];
    column.reserve(table.n_rows);
    bool numeric = true;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const Field& f = records[r][c];
      if (!f.quoted && missing_tokens.contains(f.text)) continue;
      const auto v = parse_number(f.text);
      if (!v || !std::isfinite(*v)) {
        numeric = false;
        break;
      }
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
      Field& f = records[r][c];
      if (!f.quoted && missing_tokens.contains(f.text)) {
        column.emplace_back(Missing{});
      } else if (numeric) {
        column.emplace_back(*parse_number(f.text));
      } else {
        column.emplace_back(std::move(f.text));
      }
    }
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const std::string& label_column,
                  const std::set<std::string>& missing_tokens) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw DataError("read failure on '" + path.string() + "'");
  return parse_csv(buffer.str(), label_column, missing_tokens);
}

std::pair<LabeledDataset, PreprocessReport> preprocess(const RawTable& table,
                                                       const PreprocessPolicy& policy) {
  PreprocessReport report;
  const std::size_t n_cols = table.columns.size();
  const auto& label_cells = table.columns.at(table.label_column);

  std::vector<std::size_t> keep;
  keep.reserve(table.n_rows);
  for (std::size_t r = 0; r < table.n_rows; ++r) {
    bool drop = std::holds_alternative<Missing>(label_cells[r]);
    if (!policy.impute) {
      for (std::size_t c = 0; c < n_cols && !drop; ++c) {
        drop = std::holds_alternative<Missing>(table.columns[c][r]);
      }
    }
    if (drop) {
      ++report.rows_dropped_null;
    } else {
      keep.push_back(r);
    }
  }

  if (policy.drop_duplicates) {
    std::set<std::vector<Cell>> seen;
    std::vector<std::size_t> unique_rows;
    for (std::size_t r : keep) {
      std::vector<Cell> row;
      row.reserve(n_cols);
      for (std::size_t c = 0; c < n_cols; ++c) row.push_back(table.columns[c][r]);
      if (seen.insert(std::move(row)).second) {
        unique_rows.push_back(r);
      } else {
        ++report.rows_dropped_duplicate;
      }
    }
    keep = std::move(unique_rows);
  }
  if (keep.empty()) throw DataError("preprocess: zero rows after cleaning");

  LabeledDataset data;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c != table.label_column) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw DataError("preprocess: no feature columns");
  data.features = Matrix(keep.size(), feature_cols.size());

  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const auto& column = table.columns[feature_cols[f]];
    const std::string& name = table.column_names[feature_cols[f]];
    data.feature_names.push_back(name);

    std::size_t n_missing = 0;
    bool categorical = false;
    for (std::size_t r : keep) {
      n_missing += std::holds_alternative<Missing>(column[r]);
      categorical = categorical || std::holds_alternative<std::string>(column[r]);
    }
    if (n_missing == keep.size()) {
      throw DataError("preprocess: column '" + name + "' has no values");
    }

    if (!categorical) {
      double fill = 0.0;
      if (n_missing > 0) {
        double sum = 0.0;
        for (std::size_t r : keep) {
          if (const double* v = std::get_if<double>(&column[r])) sum += *v;
        }
        fill = sum / static_cast<double>(keep.size() - n_missing);
        report.imputations[name] = {"mean", format_number(fill)};
      }
      for (std::size_t i = 0; i < keep.size(); ++i) {
        const double* v = std::get_if<double>(&column[keep[i]]);
        data.features(i, f) = v ? *v : fill;
      }
      continue;
    }

    std::map<std::string, std::size_t> freq;
    for (std::size_t r : keep) {
      if (const auto* s = std::get_if<std::string>(&column[r])) ++freq[*s];
    }
    std::string mode;
    std::size_t best = 0;
    for (const auto& [value, count] : freq) {
      if (count > best) {
        best = count;
        mode = value;
      }
    }
    if (n_missing > 0) report.imputations[name] = {"mode", mode};
    auto& codes = report.encodings[name];
    int next = 0;
    for (const auto& [value, count] : freq) codes[value] = next++;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto* s = std::get_if<std::string>(&column[keep[i]]);
      data.features(i, f) = codes.at(s ? *s : mode);
    }
  }

  // Labels: class ids by descending frequency, ties by the label's natural order.
  std::map<Cell, std::size_t> label_freq;
  for (std::size_t r : keep) ++label_freq[label_cells[r]];
  if (label_freq.size() < 2) throw DataError("preprocess: label column has a single class");
  std::vector<std::pair<Cell, std::size_t>> ranked(label_freq.begin(), label_freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<Cell, int> label_ids;
  for (std::size_t id = 0; id < ranked.size(); ++id) {
    label_ids[ranked[id].first] = static_cast<int>(id);
    data.class_names.push_back(cell_text(ranked[id].first));
    report.label_encoding[data.class_names.back()] = static_cast<int>(id);
  }
  data.labels.reserve(keep.size());
  for (std::size_t r : keep) data.labels.push_back(label_ids.at(label_cells[r]));
  data.class_counts = count_classes(data.labels);

  check_labeled(data);
  return {std::move(data), std::move(report)};
}

ClassSplit split_by_class(const LabeledDataset& data) {
  std::vector<std::pair<int, std::size_t>> present;
  for (const auto& [id, count] : data.class_counts) {
    if (count > 0) present.emplace_back(id, count);
  }
  if (present.size() < 2) throw DataError("split_by_class: needs two classes");
  if (present.size() > 2) {
    throw DataError("split_by_class: " + std::to_string(present.size()) +
                    " classes present; only binary tasks are supported");
  }
  // class_counts iterates ids ascending, so on a tie the lower id stays majority.
  ClassSplit split;
  const bool swap = present[1].second > present[0].second;
  split.majority_class = swap ? present[1].first : present[0].first;
  split.minority_class = swap ? present[0].first : present[1].first;
  std::vector<std::size_t> major_rows;
  std::vector<std::size_t> minor_rows;
  for (std::size_t r = 0; r < data.size(); ++r) {
    (data.labels[r] == split.majority_class ? major_rows : minor_rows).push_back(r);
  }
  split.majority = data.subset(major_rows);
  split.minority = data.subset(minor_rows);
  return split;
}

std::size_t stratified_test_count(std::size_t class_count, double test_fraction) {
  const auto rounded =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(class_count)));
  return std::max<std::size_t>(1, rounded);
}

TrainTestSplit train_test_split(const LabeledDataset& data, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("train_test_split: test_fraction must lie in (0, 1)");
  }
  Rng rng = make_rng(seed, "train_test_split");
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (const auto& [id, count] : data.class_counts) {
    const std::size_t n_test = stratified_test_count(count, test_fraction);
    if (count < 2 || n_test >= count) {
      throw DataError("train_test_split: class " + std::to_string(id) + " has " +
                      std::to_string(count) + " rows, too few for both parts");
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.size(); ++r) {
      if (data.labels[r] == id) rows.push_back(r);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + n_test);
    train_rows.insert(train_rows.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows)};
}

std::string to_csv(const LabeledDataset& data, const std::string& label_column) {
  std::string out;
  for (const auto& name : data.feature_names) out += csv_escape(name) + ",";
  out += csv_escape(label_column) + "\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (double v : data.features.row(r)) out += format_number(v) + ",";
    const int id = data.labels[r];
    const bool named = id >= 0 && static_cast<std::size_t>(id) < data.class_names.size();
    out += csv_escape(named ? data.class_names[id] : std::to_string(id)) + "\n";
  }
  return out;
}

void write_csv(const LabeledDataset& data, const std::filesystem::path& path,
               const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_csv(data, label_column);
}

}  // namespace rebalance
