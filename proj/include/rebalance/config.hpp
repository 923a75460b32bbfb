#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rebalance/dataset.hpp"
#include "rebalance/evaluation.hpp"
#include "rebalance/undersampling.hpp"

namespace rebalance {

// Config grammar, one statement per line:
//
//   # comment            (also ';'; whole lines only)
//   key = value          top-level key
//   [section]            following keys are "section.key"
//
// Whitespace around keys and values is trimmed. Keys may appear once.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(std::string_view text);
ConfigMap load_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::string input;
  std::string label = "label";
  Method method = Method::random;
  std::uint64_t seed = 0;
  std::string output = "out";
  kernels::Backend backend = kernels::Backend::parallel;

  PreprocessPolicy preprocess;
  std::set<std::string> missing_tokens = default_missing_tokens();

  MiConfig mi;
  SupportPointConfig support_points;

  std::vector<Method> bench_methods{Method::random, Method::mi, Method::support_points};
  std::vector<std::uint64_t> bench_seeds{0};
  double test_fraction = 0.2;
  LogisticConfig logistic;

  BenchmarkConfig benchmark() const;
};

// Applies every key; unknown keys and unparsable values raise ConfigError.
void apply_config(RunConfig& config, const ConfigMap& values);

// Which sections a command records. undersample keeps only the section of
// the chosen method.
enum class ConfigScope { ingest, undersample, bench };

ConfigMap to_config_map(const RunConfig& config, ConfigScope scope);
// Canonical text: top-level keys, then sections, each sorted by key.
std::string config_text(const ConfigMap& values);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// "0,3,5-9" -> {0, 3, 5, 6, 7, 8, 9}
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<Method> parse_method_list(const std::string& text);

}  // namespace rebalance
