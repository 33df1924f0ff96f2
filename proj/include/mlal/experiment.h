#ifndef MLAL_EXPERIMENT_H_
#define MLAL_EXPERIMENT_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlal/acquisition.h"
#include "mlal/corpus.h"
#include "mlal/features.h"
#include "mlal/models.h"
#include "mlal/tasks.h"

namespace mlal {

// Seed, acquisition and validation allotments in the task's cost unit.
// rounds counts the seed round, so rounds - 1 acquisitions take place.
struct BudgetSpec {
  Cost seed = 0;
  Cost acquisition = 0;
  Cost validation = 0;
  int rounds = 4;
  BudgetUnit unit = BudgetUnit::kInstance;

  void validate() const;  // throws ConfigError
  bool operator==(const BudgetSpec&) const = default;
};

enum class SettingKind { kMonoA, kMMA, kSMA };

struct Setting {
  SettingKind kind = SettingKind::kSMA;
  LanguageTag source;  // MonoA only

  // "MonoA-<source>", "MMA" or "SMA".
  std::string label() const;
  bool operator==(const Setting&) const = default;
};

std::string_view setting_kind_name(SettingKind kind);
SettingKind parse_setting_kind(std::string_view name);  // throws ConfigError

// One trained model: the languages it draws seed, validation and acquisitions
// from, and its budgets.
struct ModelPlan {
  std::vector<LanguageTag> scope;
  Cost seed = 0;
  Cost acquisition = 0;
  Cost validation = 0;
  Cost per_round = 0;  // acquisition / (rounds - 1), floored

  std::string scope_label() const;  // languages joined with '+'
  bool operator==(const ModelPlan&) const = default;
};

struct AllocationPlan {
  Setting setting;
  std::vector<LanguageTag> languages;  // every language evaluated each round
  std::vector<ModelPlan> models;
  int rounds = 4;

  // Sum of the models' per-round budgets.
  Cost per_round_budget() const;
  // Index of the model that is evaluated on `language`.
  std::size_t evaluator(const LanguageTag& language) const;
};

// MonoA: one model with the whole budget on the source language. MMA: one
// model per language, each with floor(budget / n). SMA: one model over the
// pooled languages. Throws ConfigError on an unknown MonoA source or when an
// MMA budget is smaller than n.
AllocationPlan allocate(const Setting& setting, const BudgetSpec& spec,
                        std::span<const LanguageTag> languages);

// Gold-annotated training data (source of seed, validation and the simulated
// unlabeled pool) and per-language test data.
struct ExperimentData {
  TaskKind task = TaskKind::kClassification;
  std::vector<LanguageTag> languages;
  std::vector<Instance> train;
  std::vector<Instance> test;
};

struct ExperimentOptions {
  BudgetSpec budget;
  TrainingConfig training;
  FeatureSpace features;
  StrategyKind strategy = StrategyKind::kLC;
};

struct ModelSummary {
  std::string scope;
  double validation_score = 0.0;
  double learning_rate = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;

  bool operator==(const ModelSummary&) const = default;
};

struct RoundResult {
  int round = 0;
  std::map<LanguageTag, LanguageMetrics> metrics;  // test-set metrics
  std::map<LanguageTag, Cost> spend;               // acquired this round
  std::vector<ModelSummary> models;
  std::vector<std::string> warnings;

  bool operator==(const RoundResult&) const = default;
};

struct RunOutput {
  AllocationPlan plan;
  std::vector<RoundResult> rounds;
  std::vector<AcquisitionRecord> log;
  std::map<LanguageTag, double> alpha;  // pool composition
};

// Seeded pool for a plan: seed and validation per model scope, the rest of
// those languages' training data unlabeled, and every language's test data.
Pool build_pool(const ExperimentData& data, const AllocationPlan& plan, std::uint64_t seed);

struct RoundSettings {
  TaskKind task = TaskKind::kClassification;
  FeatureSpace features;
  TrainingConfig training;
  StrategyKind strategy = StrategyKind::kLC;
  bool with_al = true;  // false replaces the strategy with Random
  std::uint64_t seed = 0;
  std::vector<std::string> labels;  // fixed output vocabulary
};

// Round 0 trains every model on its seed; each later round scores the
// model's unlabeled scope, acquires up to its per-round budget, retrains from
// zero weights and evaluates. Every language's test set is evaluated every
// round by the model responsible for it.
RunOutput run_rounds(const AllocationPlan& plan, Pool& pool, const RoundSettings& settings);

struct CellSpec {
  Setting setting;
  bool with_al = true;

  std::string name() const;  // "<setting>_al" or "<setting>_noal"
  bool operator==(const CellSpec&) const = default;
};

// allocate + build_pool + run_rounds with the label vocabulary of all data.
RunOutput run_cell(const ExperimentData& data, const ExperimentOptions& options, const CellSpec& cell,
                   std::uint64_t seed);

// Share of each language in the labeled + unlabeled partitions, in cost units.
std::map<LanguageTag, double> pool_composition(const Pool& pool);

struct CurriculumRow {
  int round = 0;
  LanguageTag language;
  double alpha = 0.0;
  Cost acquired = 0;    // this round
  Cost cumulative = 0;  // rounds 1..round
  double relative = 0.0;

  bool operator==(const CurriculumRow&) const = default;
};

struct CurriculumReport {
  std::map<LanguageTag, double> alpha;
  Cost per_round_budget = 0;
  std::vector<CurriculumRow> rows;  // by round, then language
  // Per acquisition round: sum_j alpha_j (1 + r_ij) and cumulative spend / (i * budget).
  std::vector<double> weighted_sum;
  std::vector<double> spend_ratio;

  double max_identity_error() const;
};

// r_ij = (cumulative_ij - alpha_j * b * i) / (alpha_j * b * i) with b the
// configured per-round budget. Throws ConfigError when a language in alpha
// or in the log has zero share, or when there is no acquisition round.
CurriculumReport curriculum(std::span<const AcquisitionRecord> log,
                            const std::map<LanguageTag, double>& alpha, Cost per_round_budget,
                            int acquisition_rounds);

// Metrics summarised per task: accuracy; f1; uas and las.
std::vector<std::string> report_metrics(TaskKind task);

// Mean of a metric over all rounds and languages of one run.
double run_mean(std::span<const RoundResult> rounds, const std::string& metric);

struct AggregateCell {
  std::string setting;
  bool with_al = true;
  std::string metric;
  std::vector<double> replicate_values;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one replicate
};

AggregateCell aggregate(const std::string& setting, bool with_al, const std::string& metric,
                        std::span<const std::vector<RoundResult>> replicates);

struct BaselineReport {
  std::map<LanguageTag, LanguageMetrics> single_model;  // SM-Full
  std::map<LanguageTag, LanguageMetrics> multi_model;   // MM-Full
};

// Trains one pooled model and one model per language on all training data
// except a validation draw of floor(validation / n) per language.
BaselineReport run_full_data_baselines(const ExperimentData& data, const ExperimentOptions& options,
                                       std::uint64_t seed);

}  // namespace mlal

#endif  // MLAL_EXPERIMENT_H_
