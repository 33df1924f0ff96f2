#ifndef MLAL_CONFIG_H_
#define MLAL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlal/experiment.h"

namespace mlal {

struct DataFiles {
  std::filesystem::path train;
  std::filesystem::path test;
  bool operator==(const DataFiles&) const = default;
};

// Fully resolved experiment configuration. Paths are absolute.
//
// JSON layout (relative paths resolve against the config file's directory):
//   task         "classification" | "tagging" | "parsing"            required
//   languages    ["en", ...]                                         required
//   data         {"en": {"train": path, "test": path}, ...}          required
//   settings     [{"kind": "MonoA", "source": "en"}, {"kind": "MMA"}, {"kind": "SMA"}]
//                default: MonoA on the first language, MMA, SMA
//   strategy     acquisition strategy used when AL is on; default per task
//   al           [true, false]: AL flags to run per setting
//   budget       {"seed", "acquisition", "validation", "rounds"}; seed
//                required, the others default to seed and 4
//   training     {"learning_rates", "batch_size", "max_epochs", "patience", "l2"}
//   features     {"hash_bits", "ngram_min", "ngram_max"}
//   preprocess   {"max_tokens", "dedup"}; max_tokens defaults to 175, or
//                256 for classification
//   baselines    also train the full-data single and per-language models
//   replicates   default 1; replicate k uses seed + k
//   seed         default 0
//   output_dir   default "results"
struct ExperimentConfig {
  TaskKind task = TaskKind::kClassification;
  std::vector<LanguageTag> languages;
  std::map<LanguageTag, DataFiles> data;
  std::vector<Setting> settings;
  StrategyKind strategy = StrategyKind::kLC;
  std::vector<bool> al_flags{true, false};
  BudgetSpec budget;
  TrainingConfig training;
  FeatureSpace features;
  std::size_t max_tokens = 175;
  bool dedup = true;
  bool baselines = false;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  ExperimentOptions options() const;
  // Settings in order, each with the AL flags in order.
  std::vector<CellSpec> cells() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigCheck {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;  // every violation found, not just the first

  bool ok() const { return errors.empty(); }
};

ConfigCheck check_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ConfigCheck validate_config(const std::filesystem::path& path);

// Inverse of check_config for a valid config; all defaults written out.
nlohmann::json config_to_json(const ExperimentConfig& config);

// Reads every language's files. Training data is deduplicated (if enabled)
// and length-filtered; test data is only truncated for classification. Ids
// run consecutively over languages in config order, training files first.
ExperimentData load_experiment_data(const ExperimentConfig& config);

}  // namespace mlal

#endif  // MLAL_CONFIG_H_
