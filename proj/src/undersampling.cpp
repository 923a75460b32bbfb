#include "rebalance/undersampling.hpp"

#include <algorithm>

#include "rebalance/errors.hpp"
#include "rebalance/random.hpp"

namespace rebalance {

std::string to_string(Method m) {
  switch (m) {
    case Method::random:
      return "random";
    case Method::mi:
      return "mi";
    case Method::support_points:
      return "support_points";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  if (text == "random") return Method::random;
  if (text == "mi") return Method::mi;
  if (text == "support_points") return Method::support_points;
  throw ConfigError("unknown method '" + text + "'");
}

RandomRun undersample_random(const LabeledDataset& data, std::uint64_t seed) {
  const ClassSplit split = split_by_class(data);
  Rng rng = make_rng(seed, "random_undersample");
  RandomRun run;
  run.kept_rows = sample_without_replacement(split.majority.size(), split.minority.size(), rng);
  std::sort(run.kept_rows.begin(), run.kept_rows.end());
  run.balanced = shuffled(concat(split.majority.subset(run.kept_rows), split.minority), seed);
  return run;
}

MiRun undersample_mi(const LabeledDataset& data, const MiConfig& config, std::uint64_t seed) {
  const ClassSplit split = split_by_class(data);
  const LabeledDataset& majority = split.majority;
  const std::size_t n = majority.size();
  check_pairwise_budget(n, config.memory_budget_bytes);

  MiRun run;
  const std::size_t bins = config.n_bins ? config.n_bins : default_bin_count(majority.dims());
  run.binning = make_binning(majority, bins, config.binning);
  MIOptions mi_options;
  mi_options.backend = config.kmeans.backend;
  mi_options.memory_budget_bytes = config.memory_budget_bytes;
  // Each majority row is embedded as its row of the dissimilarity matrix.
  Matrix embedding = mi_to_dissimilarity(mi_matrix(majority, run.binning, mi_options)).values;

  const std::size_t k_max = std::min(config.k_max, n);
  std::size_t k = std::min(config.k_min, n);
  if (k_max >= config.k_min + 2) {
    run.elbow = elbow_select(embedding, config.k_min, k_max, derive_seed(seed, "elbow"),
                             config.kmeans);
    k = run.elbow.chosen_k;
  }
  run.strata = kmeans(embedding, k, derive_seed(seed, "strata"), config.kmeans);

  const StratumStats stats = stratum_stats(majority, run.strata);
  const auto costs = stratum_costs(config.cost_model, stats.sizes);
  const std::size_t target = split.minority.size();
  run.plan = allocate(config.allocation, stats.sizes, stats.stds, costs, target);
  run.kept_rows = stratified_srs(majority, run.strata, run.plan, target, derive_seed(seed, "srs"));
  run.balanced = shuffled(concat(majority.subset(run.kept_rows), split.minority), seed);
  return run;
}

}  // namespace rebalance
