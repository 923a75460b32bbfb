#include "rebalance/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "rebalance/errors.hpp"

namespace rebalance {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::array<int, 2> binary_classes(const std::map<int, std::size_t>& counts) {
  std::vector<int> present;
  for (const auto& [id, count] : counts) {
    if (count > 0) present.push_back(id);
  }
  if (present.size() != 2) {
    throw DataError("logistic regression needs exactly two classes, found " +
                    std::to_string(present.size()));
  }
  return {present[0], present[1]};
}

}  // namespace

double LogisticModel::predict_proba(std::span<const double> x) const {
  double t = bias;
  for (std::size_t f = 0; f < weights.size(); ++f) t += weights[f] * (x[f] - mean[f]) / scale[f];
  return sigmoid(t);
}

int LogisticModel::predict(std::span<const double> x) const {
  return predict_proba(x) >= 0.5 ? classes[1] : classes[0];
}

LogisticModel train_logistic(const LabeledDataset& train, const LogisticConfig& config) {
  LogisticModel model;
  model.classes = binary_classes(train.class_counts);
  model.config = config;
  const std::size_t n = train.size();
  const std::size_t d = train.dims();
  const auto nd = static_cast<double>(n);

  model.mean.assign(d, 0.0);
  model.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) model.mean[f] += train.features(i, f);
  }
  for (double& m : model.mean) m /= nd;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      const double t = train.features(i, f) - model.mean[f];
      model.scale[f] += t * t;
    }
  }
  for (double& s : model.scale) {
    s = std::sqrt(s / nd);
    if (!(s > 0.0)) s = 1.0;  // constant feature: centered to 0 either way
  }

  Matrix z(n, d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      z(i, f) = (train.features(i, f) - model.mean[f]) / model.scale[f];
    }
    y[i] = train.labels[i] == model.classes[1] ? 1.0 : 0.0;
  }

  model.weights.assign(d, 0.0);
  std::vector<double> grad(d);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double t = model.bias;
      const auto row = z.row(i);
      for (std::size_t f = 0; f < d; ++f) t += model.weights[f] * row[f];
      loss += y[i] > 0.5 ? softplus(-t) : softplus(t);
      const double residual = sigmoid(t) - y[i];
      grad_bias += residual;
      for (std::size_t f = 0; f < d; ++f) grad[f] += residual * row[f];
    }
    double penalty = 0.0;
    for (double w : model.weights) penalty += w * w;
    model.loss_trace.push_back(loss / nd + 0.5 * config.l2 * penalty);
    for (std::size_t f = 0; f < d; ++f) {
      model.weights[f] -= config.learning_rate * (grad[f] / nd + config.l2 * model.weights[f]);
    }
    model.bias -= config.learning_rate * grad_bias / nd;
  }
  return model;
}

ClassificationReport report_from_confusion(
    const std::array<std::array<std::size_t, 2>, 2>& confusion, std::array<int, 2> classes) {
  ClassificationReport r;
  r.classes = classes;
  r.confusion = confusion;
  r.n_test = confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  double recall_sum = 0.0;
  int supported = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const std::size_t tp = confusion[c][c];
    const std::size_t support = confusion[c][0] + confusion[c][1];
    const std::size_t predicted = confusion[0][c] + confusion[1][c];
    r.recall[c] = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    r.precision[c] = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double denom = r.precision[c] + r.recall[c];
    r.f1[c] = denom > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / denom : 0.0;
    if (support) {
      recall_sum += r.recall[c];
      ++supported;
    }
  }
  r.balanced_accuracy = supported ? recall_sum / supported : 0.0;
  return r;
}

ClassificationReport report_from_predictions(std::span<const int> truth,
                                             std::span<const int> predicted,
                                             std::array<int, 2> classes) {
  if (truth.size() != predicted.size()) throw DataError("report: length mismatch");
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  const auto index = [&](int label) -> std::size_t {
    if (label == classes[0]) return 0;
    if (label == classes[1]) return 1;
    throw DataError("report: label " + std::to_string(label) + " is not one of the two classes");
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++confusion[index(truth[i])][index(predicted[i])];
  return report_from_confusion(confusion, classes);
}

ClassificationReport evaluate(const LogisticModel& model, const LabeledDataset& test) {
  if (test.size() == 0) throw DataError("evaluate: empty test set");
  if (test.dims() != model.weights.size()) throw DataError("evaluate: feature count mismatch");
  std::vector<int> predicted(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) predicted[i] = model.predict(test.features.row(i));
  return report_from_predictions(test.labels, predicted, model.classes);
}

LabeledDataset undersample(const LabeledDataset& data, Method method, const BenchmarkConfig& config,
                           std::uint64_t seed) {
  switch (method) {
    case Method::random:
      return undersample_random(data, seed).balanced;
    case Method::mi:
      return undersample_mi(data, config.mi, seed).balanced;
    case Method::support_points:
      return undersample_support_points(data, config.support_points, seed).balanced;
  }
  throw ConfigError("unknown method");
}

BenchmarkTable run_benchmark(const LabeledDataset& data, const BenchmarkConfig& config) {
  if (config.methods.empty() || config.seeds.empty()) {
    throw ConfigError("benchmark: needs at least one method and one seed");
  }
  BenchmarkTable table;
  for (Method method : config.methods) {
    for (std::uint64_t seed : config.seeds) {
      const LabeledDataset balanced = undersample(data, method, config, seed);
      const TrainTestSplit split = train_test_split(balanced, config.test_fraction, seed);
      const LogisticModel model = train_logistic(split.train, config.logistic);
      table.rows.push_back({to_string(method), seed, evaluate(model, split.test)});
    }
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.method, a.seed) < std::tie(b.method, b.seed);
  });

  std::map<std::string, std::vector<const BenchmarkRow*>> by_method;
  for (const auto& row : table.rows) by_method[row.method].push_back(&row);
  for (const auto& [method, rows] : by_method) {
    BenchmarkAggregate agg;
    agg.method = method;
    agg.runs = rows.size();
    const auto runs = static_cast<double>(rows.size());
    for (const auto* r : rows) {
      agg.mean_balanced_accuracy += r->report.balanced_accuracy;
      agg.mean_f1[0] += r->report.f1[0];
      agg.mean_f1[1] += r->report.f1[1];
    }
    agg.mean_balanced_accuracy /= runs;
    agg.mean_f1[0] /= runs;
    agg.mean_f1[1] /= runs;
    if (rows.size() > 1) {
      double ss = 0.0;
      for (const auto* r : rows) {
        const double t = r->report.balanced_accuracy - agg.mean_balanced_accuracy;
        ss += t * t;
      }
      agg.std_balanced_accuracy = std::sqrt(ss / (runs - 1.0));
    }
    table.aggregates.push_back(agg);
  }
  return table;
}

}  // namespace rebalance
