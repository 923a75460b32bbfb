// rebalance: ingest, undersample, validate, bench, gen-synth.
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 resource guard, 1 other.

#include <CLI11.hpp>

#include <deque>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rebalance/config.hpp"
#include "rebalance/errors.hpp"
#include "rebalance/evaluation.hpp"
#include "rebalance/format.hpp"
#include "rebalance/serialize.hpp"
#include "rebalance/synth.hpp"
#include "rebalance/undersampling.hpp"
#include "rebalance/validation.hpp"

namespace fs = std::filesystem;
using namespace rebalance;

namespace {

// Flags shared by the config-driven commands. Each one, when given, becomes a
// config key that overrides the file.
struct ConfigFlags {
  std::string config_file;
  std::string manifest_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, CLI::Option*>> options;  // (config key, flag)
};

void add_shorthand(CLI::App* cmd, ConfigFlags& flags, std::deque<std::string>& storage,
                   const std::string& flag, const std::string& key, const std::string& help) {
  storage.emplace_back();
  CLI::Option* opt = cmd->add_option(flag, storage.back(), help);
  flags.options.emplace_back(key, opt);
}

void add_common(CLI::App* cmd, ConfigFlags& flags, bool manifest) {
  cmd->add_option("--config", flags.config_file, "Config file (key = value, [section] headers)");
  if (manifest) {
    cmd->add_option("--manifest", flags.manifest_file, "Replay the config recorded in a manifest.json");
  }
  cmd->add_option("--set", flags.sets, "Override one key, e.g. --set mi.k_max=8")->take_all();
}

RunConfig resolve(const ConfigFlags& flags, const std::deque<std::string>& storage) {
  ConfigMap values;
  if (!flags.manifest_file.empty()) {
    Json manifest;
    try {
      manifest = Json::parse(read_text(flags.manifest_file));
    } catch (const Json::exception& e) {
      throw ConfigError("manifest: " + std::string(e.what()));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (!manifest.contains("config") || !manifest["config"].is_string()) {
      throw ConfigError("manifest: no config text recorded");
    }
    values = parse_config_text(manifest["config"].get<std::string>());
  }
  if (!flags.config_file.empty()) {
    for (auto& [k, v] : load_config_file(flags.config_file)) values[k] = v;
  }
  for (std::size_t i = 0; i < flags.options.size(); ++i) {
    if (flags.options[i].second->count()) values[flags.options[i].first] = storage[i];
  }
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    values[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  RunConfig config;
  apply_config(config, values);
  return config;
}

fs::path prepare_output(const std::string& dir) {
  if (dir.empty()) throw ConfigError("output directory is empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::pair<LabeledDataset, PreprocessReport> load_dataset(const std::string& path,
                                                         const std::string& label,
                                                         const RunConfig& config) {
  if (path.empty()) throw ConfigError("no input file given");
  return preprocess(load_csv(path, label, config.missing_tokens), config.preprocess);
}

Json class_counts_json(const LabeledDataset& data) {
  Json j = Json::object();
  for (const auto& [id, count] : data.class_counts) j[data.class_names.at(id)] = count;
  return j;
}

// Writes every artifact and a manifest that records the config and a hash of
// each file written.
class Artifacts {
 public:
  Artifacts(fs::path dir, std::string command, std::uint64_t seed, ConfigMap config)
      : dir_(std::move(dir)), command_(std::move(command)), seed_(seed),
        config_text_(config_text(config)), config_hash_(hex64(fnv1a64(config_text_))) {}

  const std::string& config_hash() const { return config_hash_; }
  std::uint64_t seed() const { return seed_; }

  // JSON artifacts also carry the seed and the config hash.
  void json(const std::string& name, Json doc) {
    doc["seed"] = seed_;
    doc["config_hash"] = config_hash_;
    text(name, dump_json(std::move(doc)));
  }

  void text(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    outputs_[name] = hex64(fnv1a64(content));
  }

  void input(const std::string& role, const std::string& path) {
    inputs_[role] = {{"path", path}, {"fnv1a64", hex64(fnv1a64(read_text(path)))}};
  }

  void finish() {
    Json manifest{{"command", command_},
                  {"seed", seed_},
                  {"config", config_text_},
                  {"config_hash", config_hash_},
                  {"inputs", inputs_},
                  {"outputs", outputs_}};
    write_text(dir_ / "manifest.json", dump_json(std::move(manifest)));
  }

 private:
  fs::path dir_;
  std::string command_;
  std::uint64_t seed_;
  std::string config_text_;
  std::string config_hash_;
  Json inputs_ = Json::object();
  Json outputs_ = Json::object();
};

int cmd_ingest(const RunConfig& config) {
  auto [data, report] = load_dataset(config.input, config.label, config);
  Artifacts out(prepare_output(config.output), "ingest", 0,
                to_config_map(config, ConfigScope::ingest));
  out.input("input", config.input);
  out.text("clean.csv", to_csv(data, config.label));
  Json doc = to_json(report);
  doc["rows"] = data.size();
  doc["features"] = data.feature_names;
  doc["class_counts"] = class_counts_json(data);
  out.json("preprocess_report.json", doc);
  out.finish();
  std::cout << "ingested " << data.size() << " rows x " << data.dims() << " features -> "
            << (fs::path(config.output) / "clean.csv").string() << '\n';
  return 0;
}

int cmd_undersample(const RunConfig& config) {
  auto [data, prep] = load_dataset(config.input, config.label, config);
  Artifacts out(prepare_output(config.output), "undersample", config.seed,
                to_config_map(config, ConfigScope::undersample));
  out.input("input", config.input);

  Json report{{"method", to_string(config.method)},
              {"input_class_counts", class_counts_json(data)},
              {"preprocess", to_json(prep)}};
  LabeledDataset balanced;
  switch (config.method) {
    case Method::random: {
      RandomRun run = undersample_random(data, config.seed);
      report["kept_rows"] = run.kept_rows;
      balanced = std::move(run.balanced);
      break;
    }
    case Method::mi: {
      MiRun run = undersample_mi(data, config.mi, config.seed);
      report["binning"] = to_json(run.binning);
      report["elbow"] = to_json(run.elbow);
      report["strata"] = {{"k", run.strata.k}, {"wcss", run.strata.wcss},
                          {"iterations", run.strata.iterations}};
      report["allocation"] = to_json(run.plan);
      report["kept_rows"] = run.kept_rows;
      out.text("strata.csv", strata_csv(run.strata));
      balanced = std::move(run.balanced);
      break;
    }
    case Method::support_points: {
      SupportPointsRun run = undersample_support_points(data, config.support_points, config.seed);
      report["stage1_rows"] = run.stage1_rows.size();
      report["kept_rows"] = run.kept_rows;
      Json sp = to_json(run.support, config.support_points);
      out.json("support_points.json", sp);
      out.text("support_points.csv", matrix_csv(run.support.points, data.feature_names));
      out.text("energy_trace.csv", energy_trace_csv(run.support.energy_trace));
      report["support_points"] = {{"final_energy", run.support.final_energy},
                                  {"eta", run.support.eta}};
      balanced = std::move(run.balanced);
      break;
    }
  }
  report["output_class_counts"] = class_counts_json(balanced);
  out.text("balanced.csv", to_csv(balanced, config.label));
  out.json("report.json", report);
  out.finish();
  std::cout << to_string(config.method) << ": " << data.size() << " -> " << balanced.size()
            << " rows; config " << out.config_hash() << '\n';
  return 0;
}

struct ValidateArgs {
  std::string original;
  std::string subset;
  std::string label = "label";
  std::string output = "out";
  double alpha = 0.05;
  bool all_rows = false;
};

int cmd_validate(const ValidateArgs& args) {
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  RunConfig base;
  base.preprocess.drop_duplicates = false;  // compare the files as they are
  auto original = load_dataset(args.original, args.label, base).first;
  auto subset = load_dataset(args.subset, args.label, base).first;
  if (original.feature_names != subset.feature_names) {
    throw DataError("validate: the two files have different feature columns");
  }
  std::string compared = "all rows";
  if (!args.all_rows) {
    // Majority class of the original, matched in the subset by label text.
    const std::string name = original.class_names.at(split_by_class(original).majority_class);
    const auto keep = [&](const LabeledDataset& d) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.class_names.at(d.labels[i]) == name) rows.push_back(i);
      }
      if (rows.size() < 2) throw DataError("validate: fewer than two '" + name + "' rows in a file");
      return d.subset(rows);
    };
    original = keep(original);
    subset = keep(subset);
    compared = "class " + name;
  }
  const ValidationReport report = validate_subset(original, subset, args.alpha);
  ConfigMap recorded{{"alpha", format_number(args.alpha)},
                     {"all_rows", args.all_rows ? "true" : "false"},
                     {"label", args.label},
                     {"original", args.original},
                     {"subset", args.subset}};
  Artifacts out(prepare_output(args.output), "validate", 0, recorded);
  out.input("original", args.original);
  out.input("subset", args.subset);
  Json doc = to_json(report);
  doc["compared"] = compared;
  out.json("validation.json", doc);
  const std::string text = "Feature-wise statistics (" + compared + ")\n\n" + validation_text(report);
  out.text("validation.txt", text);
  out.finish();
  std::cout << text;
  return 0;
}

int cmd_bench(const RunConfig& config) {
  auto [data, prep] = load_dataset(config.input, config.label, config);
  const BenchmarkTable table = run_benchmark(data, config.benchmark());
  Artifacts out(prepare_output(config.output), "bench", config.bench_seeds.front(),
                to_config_map(config, ConfigScope::bench));
  out.input("input", config.input);
  out.text("bench.csv", benchmark_csv(table));
  Json doc = to_json(table);
  doc["seeds"] = config.bench_seeds;
  out.json("bench.json", doc);
  const std::string text = benchmark_text(table);
  out.text("bench.txt", text);
  out.finish();
  std::cout << text;
  return 0;
}

struct SynthArgs {
  SynthConfig config;
  std::string label = "label";
  std::string output = "synth.csv";
};

int cmd_gen_synth(const SynthArgs& args) {
  const LabeledDataset data = generate_synthetic(args.config);
  const fs::path path(args.output);
  if (path.has_parent_path()) prepare_output(path.parent_path().string());
  write_text(path, to_csv(data, args.label));
  std::cout << "wrote " << data.size() << " rows (" << data.class_counts.at(0) << " majority, "
            << data.class_counts.at(1) << " minority) to " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Undersampling toolkit for imbalanced binary tabular data"};
  app.require_subcommand(1);

  // ingest
  ConfigFlags ingest_flags;
  std::deque<std::string> ingest_storage;
  bool no_dedupe = false;
  bool no_impute = false;
  auto* ingest = app.add_subcommand("ingest", "Load a CSV, clean and encode it, write clean.csv");
  add_common(ingest, ingest_flags, false);
  add_shorthand(ingest, ingest_flags, ingest_storage, "--input,-i", "input", "Input CSV");
  add_shorthand(ingest, ingest_flags, ingest_storage, "--label,-l", "label", "Label column");
  add_shorthand(ingest, ingest_flags, ingest_storage, "--output,-o", "output", "Output directory");
  ingest->add_flag("--no-dedupe", no_dedupe, "Keep duplicate rows");
  ingest->add_flag("--no-impute", no_impute, "Drop rows with missing cells instead of imputing");

  // undersample
  ConfigFlags us_flags;
  std::deque<std::string> us_storage;
  auto* us = app.add_subcommand("undersample", "Undersample the majority class");
  add_common(us, us_flags, true);
  add_shorthand(us, us_flags, us_storage, "--input,-i", "input", "Input CSV");
  add_shorthand(us, us_flags, us_storage, "--label,-l", "label", "Label column");
  add_shorthand(us, us_flags, us_storage, "--output,-o", "output", "Output directory");
  add_shorthand(us, us_flags, us_storage, "--method,-m", "method", "random | mi | support_points");
  add_shorthand(us, us_flags, us_storage, "--seed,-s", "seed", "Random seed");
  add_shorthand(us, us_flags, us_storage, "--backend", "backend", "parallel | serial");

  // validate
  ValidateArgs vargs;
  auto* val = app.add_subcommand("validate", "Compare feature statistics of a subset with the original");
  val->add_option("--original", vargs.original, "Original CSV")->required();
  val->add_option("--subset", vargs.subset, "Subset CSV")->required();
  val->add_option("--label,-l", vargs.label, "Label column");
  val->add_option("--output,-o", vargs.output, "Output directory");
  val->add_option("--alpha", vargs.alpha, "KS significance level");
  val->add_flag("--all-rows", vargs.all_rows, "Compare all rows instead of the majority class");

  // bench
  ConfigFlags bench_flags;
  std::deque<std::string> bench_storage;
  auto* bench = app.add_subcommand("bench", "Logistic-regression benchmark of undersampling methods");
  add_common(bench, bench_flags, true);
  add_shorthand(bench, bench_flags, bench_storage, "--input,-i", "input", "Input CSV");
  add_shorthand(bench, bench_flags, bench_storage, "--label,-l", "label", "Label column");
  add_shorthand(bench, bench_flags, bench_storage, "--output,-o", "output", "Output directory");
  add_shorthand(bench, bench_flags, bench_storage, "--methods", "bench.methods",
                "Comma list, e.g. random,mi,support_points");
  add_shorthand(bench, bench_flags, bench_storage, "--seeds", "bench.seeds", "e.g. 0-19 or 1,2,5");
  add_shorthand(bench, bench_flags, bench_storage, "--backend", "backend", "parallel | serial");

  // gen-synth
  SynthArgs sargs;
  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic imbalanced dataset");
  gen->add_option("--n", sargs.config.n, "Rows");
  gen->add_option("--d", sargs.config.d, "Features");
  gen->add_option("--imbalance", sargs.config.majority_fraction,
                  "Majority fraction, e.g. 0.9 for 90/10");
  gen->add_option("--clusters", sargs.config.clusters, "Majority clusters");
  gen->add_option("--separation", sargs.config.separation,
                  "Distance between majority cluster centres in within-cluster std units");
  gen->add_option("--seed", sargs.config.seed, "Random seed");
  gen->add_option("--label,-l", sargs.label, "Label column name");
  gen->add_option("--output,-o", sargs.output, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) {
      RunConfig config = resolve(ingest_flags, ingest_storage);
      if (no_dedupe) config.preprocess.drop_duplicates = false;
      if (no_impute) config.preprocess.impute = false;
      return cmd_ingest(config);
    }
    if (*us) return cmd_undersample(resolve(us_flags, us_storage));
    if (*val) return cmd_validate(vargs);
    if (*bench) return cmd_bench(resolve(bench_flags, bench_storage));
    if (*gen) return cmd_gen_synth(sargs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const ResourceGuardError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
