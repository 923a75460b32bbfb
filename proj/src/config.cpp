#include "rebalance/config.hpp"

#include <cmath>
#include <limits>

#include "rebalance/errors.hpp"
#include "rebalance/format.hpp"
#include "rebalance/serialize.hpp"

namespace rebalance {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto part = trim(std::string_view(text).substr(start, comma - start));
    if (!part.empty()) parts.emplace_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  const auto v = parse_number(value);
  if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a number, got '" + value + "'");
  return *v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + value + "'");
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

kernels::Backend parse_backend(const std::string& value) {
  if (value == "parallel") return kernels::Backend::parallel;
  if (value == "serial") return kernels::Backend::serial;
  throw ConfigError("backend: expected parallel or serial, got '" + value + "'");
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

}  // namespace

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap values;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!values.emplace(full, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError(where + ": duplicate key '" + full + "'");
    }
  }
  return values;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text);
}

BenchmarkConfig RunConfig::benchmark() const {
  BenchmarkConfig b;
  b.methods = bench_methods;
  b.seeds = bench_seeds;
  b.mi = mi;
  b.support_points = support_points;
  b.logistic = logistic;
  b.test_fraction = test_fraction;
  return b;
}

void apply_config(RunConfig& c, const ConfigMap& values) {
  for (const auto& [key, v] : values) {
    if (key == "input") c.input = v;
    else if (key == "label") c.label = v;
    else if (key == "method") c.method = parse_method(v);
    else if (key == "seed") c.seed = parse_uint(key, v);
    else if (key == "output") c.output = v;
    else if (key == "backend") {
      c.backend = parse_backend(v);
      c.mi.kmeans.backend = c.backend;
      c.support_points.backend = c.backend;
    }
    else if (key == "preprocess.drop_duplicates") c.preprocess.drop_duplicates = parse_bool(key, v);
    else if (key == "preprocess.impute") c.preprocess.impute = parse_bool(key, v);
    else if (key == "preprocess.missing_tokens") {
      // An empty cell always counts as missing.
      c.missing_tokens = {""};
      for (const auto& t : split_list(v)) c.missing_tokens.insert(t);
    }
    else if (key == "mi.bins") c.mi.n_bins = parse_uint(key, v);
    else if (key == "mi.binning") c.mi.binning = parse_binning_strategy(v);
    else if (key == "mi.k_min") c.mi.k_min = parse_uint(key, v);
    else if (key == "mi.k_max") c.mi.k_max = parse_uint(key, v);
    else if (key == "mi.allocation") c.mi.allocation = parse_allocation_strategy(v);
    else if (key == "mi.cost_model") c.mi.cost_model = parse_cost_model(v);
    else if (key == "mi.kmeans_max_iter") c.mi.kmeans.max_iter = parse_uint(key, v);
    else if (key == "mi.kmeans_n_init") c.mi.kmeans.n_init = parse_uint(key, v);
    else if (key == "mi.memory_budget_bytes") c.mi.memory_budget_bytes = parse_uint(key, v);
    else if (key == "support_points.m") c.support_points.m = parse_uint(key, v);
    else if (key == "support_points.eta") c.support_points.eta = parse_real(key, v);
    else if (key == "support_points.max_iter") c.support_points.max_iter = parse_uint(key, v);
    else if (key == "support_points.tol") c.support_points.tol = parse_real(key, v);
    else if (key == "support_points.epsilon") c.support_points.epsilon = parse_real(key, v);
    else if (key == "support_points.subset_target") c.support_points.subset_target = parse_uint(key, v);
    else if (key == "support_points.stage1_clusters") c.support_points.stage1_clusters = parse_uint(key, v);
    else if (key == "support_points.stage1_batch") c.support_points.stage1_batch = parse_uint(key, v);
    else if (key == "support_points.stage1_iterations") c.support_points.stage1_iterations = parse_uint(key, v);
    else if (key == "support_points.unique_mapping") c.support_points.unique_mapping = parse_bool(key, v);
    else if (key == "bench.methods") c.bench_methods = parse_method_list(v);
    else if (key == "bench.seeds") c.bench_seeds = parse_seed_list(v);
    else if (key == "bench.test_fraction") c.test_fraction = parse_real(key, v);
    else if (key == "bench.learning_rate") c.logistic.learning_rate = parse_real(key, v);
    else if (key == "bench.epochs") c.logistic.epochs = parse_uint(key, v);
    else if (key == "bench.l2") c.logistic.l2 = parse_real(key, v);
    else throw ConfigError("unknown config key '" + key + "'");
  }

  if (c.mi.k_min < 1 || c.mi.k_max < c.mi.k_min) throw ConfigError("mi: need 1 <= k_min <= k_max");
  if (c.mi.kmeans.n_init < 1) throw ConfigError("mi.kmeans_n_init must be >= 1");
  if (c.support_points.eta < 0.0) throw ConfigError("support_points.eta must be > 0 (0 = auto)");
  if (!(c.support_points.epsilon > 0.0)) throw ConfigError("support_points.epsilon must be > 0");
  if (c.support_points.tol < 0.0) throw ConfigError("support_points.tol must be >= 0");
  if (c.support_points.m > c.support_points.subset_target) {
    throw ConfigError("support_points.m must not exceed subset_target");
  }
  if (c.support_points.stage1_clusters < 1) throw ConfigError("support_points.stage1_clusters must be >= 1");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
    throw ConfigError("bench.test_fraction must lie in (0, 1)");
  }
  if (c.bench_methods.empty() || c.bench_seeds.empty()) {
    throw ConfigError("bench: needs at least one method and one seed");
  }
}

ConfigMap to_config_map(const RunConfig& c, ConfigScope scope) {
  ConfigMap m;
  m["input"] = c.input;
  m["label"] = c.label;
  m["output"] = c.output;
  m["preprocess.drop_duplicates"] = bool_text(c.preprocess.drop_duplicates);
  m["preprocess.impute"] = bool_text(c.preprocess.impute);
  {
    std::vector<std::string> tokens;
    for (const auto& t : c.missing_tokens) {
      if (!t.empty()) tokens.push_back(t);
    }
    m["preprocess.missing_tokens"] = join(tokens);
  }
  if (scope == ConfigScope::ingest) return m;

  m["seed"] = std::to_string(c.seed);
  m["backend"] = c.backend == kernels::Backend::serial ? "serial" : "parallel";
  const bool with_mi = scope == ConfigScope::bench || c.method == Method::mi;
  const bool with_sp = scope == ConfigScope::bench || c.method == Method::support_points;
  if (scope == ConfigScope::undersample) m["method"] = to_string(c.method);
  if (with_mi) {
    m["mi.bins"] = std::to_string(c.mi.n_bins);
    m["mi.binning"] = to_string(c.mi.binning);
    m["mi.k_min"] = std::to_string(c.mi.k_min);
    m["mi.k_max"] = std::to_string(c.mi.k_max);
    m["mi.allocation"] = to_string(c.mi.allocation);
    m["mi.cost_model"] = to_string(c.mi.cost_model);
    m["mi.kmeans_max_iter"] = std::to_string(c.mi.kmeans.max_iter);
    m["mi.kmeans_n_init"] = std::to_string(c.mi.kmeans.n_init);
    m["mi.memory_budget_bytes"] = std::to_string(c.mi.memory_budget_bytes);
  }
  if (with_sp) {
    const auto& s = c.support_points;
    m["support_points.m"] = std::to_string(s.m);
    m["support_points.eta"] = format_number(s.eta);
    m["support_points.max_iter"] = std::to_string(s.max_iter);
    m["support_points.tol"] = format_number(s.tol);
    m["support_points.epsilon"] = format_number(s.epsilon);
    m["support_points.subset_target"] = std::to_string(s.subset_target);
    m["support_points.stage1_clusters"] = std::to_string(s.stage1_clusters);
    m["support_points.stage1_batch"] = std::to_string(s.stage1_batch);
    m["support_points.stage1_iterations"] = std::to_string(s.stage1_iterations);
    m["support_points.unique_mapping"] = bool_text(s.unique_mapping);
  }
  if (scope == ConfigScope::bench) {
    std::vector<std::string> methods;
    for (Method x : c.bench_methods) methods.push_back(to_string(x));
    std::vector<std::string> seeds;
    for (auto s : c.bench_seeds) seeds.push_back(std::to_string(s));
    m["bench.methods"] = join(methods);
    m["bench.seeds"] = join(seeds);
    m["bench.test_fraction"] = format_number(c.test_fraction);
    m["bench.learning_rate"] = format_number(c.logistic.learning_rate);
    m["bench.epochs"] = std::to_string(c.logistic.epochs);
    m["bench.l2"] = format_number(c.logistic.l2);
  }
  return m;
}

std::string config_text(const ConfigMap& values) {
  std::string top;
  std::map<std::string, std::string> sections;
  for (const auto& [key, value] : values) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      top += key + " = " + value + '\n';
    } else {
      sections[key.substr(0, dot)] += key.substr(dot + 1) + " = " + value + '\n';
    }
  }
  std::string out = top;
  for (const auto& [name, body] : sections) out += "\n[" + name + "]\n" + body;
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xF];
  return s;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split_list(text)) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_uint("seeds", part));
      continue;
    }
    const auto lo = parse_uint("seeds", std::string(trim(part.substr(0, dash))));
    const auto hi = parse_uint("seeds", std::string(trim(part.substr(dash + 1))));
    if (hi < lo || hi - lo > 1000000) throw ConfigError("seeds: bad range '" + part + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("seeds: empty list");
  return seeds;
}

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> methods;
  for (const auto& part : split_list(text)) methods.push_back(parse_method(part));
  if (methods.empty()) throw ConfigError("methods: empty list");
  return methods;
}

}  // namespace rebalance
