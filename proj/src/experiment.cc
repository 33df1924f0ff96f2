#include "mlal/experiment.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mlal/error.h"
#include "mlal/random.h"

namespace mlal {

namespace {

// Sub-stream tags for derive_seed.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kRandomStream = 3;
constexpr std::uint64_t kBaselineStream = 4;

std::string join(std::span<const LanguageTag> languages) {
  std::string out;
  for (const auto& l : languages) out += (out.empty() ? "" : "+") + l.str();
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void BudgetSpec::validate() const {
  if (seed <= 0 || acquisition <= 0 || validation <= 0) {
    throw ConfigError("seed, acquisition and validation budgets must be positive");
  }
  if (rounds < 2) throw ConfigError("rounds must be at least 2 (seed round plus one acquisition)");
  if (acquisition < rounds - 1) {
    throw ConfigError("acquisition budget " + std::to_string(acquisition) + " is smaller than the " +
                      std::to_string(rounds - 1) + " acquisition rounds");
  }
}

std::string_view setting_kind_name(SettingKind kind) {
  switch (kind) {
    case SettingKind::kMonoA: return "MonoA";
    case SettingKind::kMMA: return "MMA";
    case SettingKind::kSMA: return "SMA";
  }
  return "?";
}

SettingKind parse_setting_kind(std::string_view name) {
  for (auto k : {SettingKind::kMonoA, SettingKind::kMMA, SettingKind::kSMA}) {
    if (setting_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown setting '" + std::string(name) + "' (expected MonoA, MMA or SMA)");
}

std::string Setting::label() const {
  if (kind == SettingKind::kMonoA) return "MonoA-" + source.str();
  return std::string(setting_kind_name(kind));
}

std::string ModelPlan::scope_label() const { return join(scope); }

Cost AllocationPlan::per_round_budget() const {
  Cost total = 0;
  for (const auto& m : models) total += m.per_round;
  return total;
}

std::size_t AllocationPlan::evaluator(const LanguageTag& language) const {
  if (setting.kind != SettingKind::kMMA) return 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].scope.front() == language) return i;
  }
  throw StateError("no model evaluates language " + language.str());
}

AllocationPlan allocate(const Setting& setting, const BudgetSpec& spec,
                        std::span<const LanguageTag> languages) {
  spec.validate();
  if (languages.empty()) throw ConfigError("language set is empty");
  std::set<LanguageTag> unique(languages.begin(), languages.end());
  if (unique.size() != languages.size()) throw ConfigError("duplicate language in language set");

  AllocationPlan plan;
  plan.setting = setting;
  plan.languages.assign(languages.begin(), languages.end());
  plan.rounds = spec.rounds;
  const Cost acquisitions = spec.rounds - 1;
  auto model = [&](std::vector<LanguageTag> scope, Cost divisor) {
    ModelPlan m;
    m.scope = std::move(scope);
    m.seed = spec.seed / divisor;
    m.acquisition = spec.acquisition / divisor;
    m.validation = spec.validation / divisor;
    m.per_round = m.acquisition / acquisitions;
    return m;
  };

  switch (setting.kind) {
    case SettingKind::kMonoA:
      if (!unique.count(setting.source)) {
        throw ConfigError("MonoA source '" + setting.source.str() + "' is not in the language set");
      }
      plan.models.push_back(model({setting.source}, 1));
      break;
    case SettingKind::kMMA: {
      const Cost n = static_cast<Cost>(languages.size());
      if (spec.seed < n || spec.acquisition < n || spec.validation < n) {
        throw ConfigError("MMA needs every budget to be at least the number of languages (" +
                          std::to_string(n) + ")");
      }
      if (spec.acquisition / n < acquisitions) {
        throw ConfigError("MMA per-language acquisition budget " + std::to_string(spec.acquisition / n) +
                          " is smaller than the number of acquisition rounds");
      }
      for (const auto& l : languages) plan.models.push_back(model({l}, n));
      break;
    }
    case SettingKind::kSMA:
      plan.models.push_back(model(plan.languages, 1));
      break;
  }
  return plan;
}

Pool build_pool(const ExperimentData& data, const AllocationPlan& plan, std::uint64_t seed) {
  std::vector<std::vector<LanguageTag>> groups;
  std::set<LanguageTag> scoped;
  for (const auto& m : plan.models) {
    groups.push_back(m.scope);
    scoped.insert(m.scope.begin(), m.scope.end());
  }
  // MMA models share one budget triple, so a single SplitSpec covers all groups.
  const SplitSpec spec{plan.models.front().seed, plan.models.front().validation,
                       derive_seed(seed, {kSplitStream})};
  std::vector<Instance> train;
  for (const auto& inst : data.train) {
    if (scoped.count(inst.language)) train.push_back(inst);
  }
  Pool pool = sample_splits(train, spec, groups);
  for (const auto& inst : data.test) pool.insert(Partition::kTest, inst);
  return pool;
}

RunOutput run_rounds(const AllocationPlan& plan, Pool& pool, const RoundSettings& settings) {
  if (plan.rounds < 2) throw ConfigError("rounds must be at least 2");
  const StrategyKind strategy = settings.with_al ? settings.strategy : StrategyKind::kRandom;
  if (!strategy_compatible(strategy, settings.task)) {
    throw ConfigError(std::string(strategy_name(strategy)) + " does not apply to " +
                      std::string(task_name(settings.task)));
  }

  RunOutput out;
  out.plan = plan;
  out.alpha = pool_composition(pool);

  std::vector<std::unique_ptr<TaskModel>> models(plan.models.size());
  std::vector<std::vector<Instance>> test_sets;
  for (const auto& lang : plan.languages) {
    const LanguageTag one[] = {lang};
    test_sets.push_back(pool.instances(Partition::kTest, one));
    if (test_sets.back().empty()) throw ConfigError("no test data for language " + lang.str());
  }

  for (int round = 0; round < plan.rounds; ++round) {
    RoundResult result;
    result.round = round;
    for (const auto& lang : plan.languages) result.spend[lang] = 0;

    for (std::size_t m = 0; m < plan.models.size(); ++m) {
      const ModelPlan& mp = plan.models[m];
      if (round > 0) {
        auto candidates = pool.instances(Partition::kUnlabeled, mp.scope);
        const auto scores =
            score_candidates(*models[m], candidates, strategy,
                             derive_seed(settings.seed, {kRandomStream, m}), round);
        const Selection sel = select_batch(scores, mp.per_round);
        std::map<InstanceId, const AcquisitionScore*> by_id;
        for (const auto& s : scores) by_id[s.instance_id] = &s;
        for (InstanceId id : sel.ids) {
          const AcquisitionScore& s = *by_id.at(id);
          pool.move_to_labeled(id);
          result.spend[s.language] += s.cost;
          out.log.push_back({round, id, s.language, s.cost, s.score, strategy});
        }
        if (sel.spent < mp.per_round && sel.ids.size() == candidates.size()) {
          result.warnings.push_back("unlabeled pool of " + mp.scope_label() + " exhausted in round " +
                                    std::to_string(round) + ": spent " + std::to_string(sel.spent) +
                                    " of " + std::to_string(mp.per_round));
        }
      }

      const auto labeled = pool.instances(Partition::kLabeled, mp.scope);
      const auto validation = pool.instances(Partition::kValidation, mp.scope);
      auto model = make_model(settings.task, settings.features);
      model->initialize(settings.labels);
      TrainingConfig config = settings.training;
      config.rng_seed = derive_seed(settings.seed, {kTrainStream, static_cast<std::uint64_t>(round), m});
      const TrainResult tr = model->train(labeled, validation, config);
      result.models.push_back({mp.scope_label(), tr.best_score, tr.learning_rate, tr.best_epoch, tr.epochs_run});
      models[m] = std::move(model);
    }

    for (std::size_t i = 0; i < plan.languages.size(); ++i) {
      result.metrics[plan.languages[i]] = models[plan.evaluator(plan.languages[i])]->evaluate(test_sets[i]);
    }
    out.rounds.push_back(std::move(result));
  }
  return out;
}

std::string CellSpec::name() const { return setting.label() + (with_al ? "_al" : "_noal"); }

RunOutput run_cell(const ExperimentData& data, const ExperimentOptions& options, const CellSpec& cell,
                   std::uint64_t seed) {
  const AllocationPlan plan = allocate(cell.setting, options.budget, data.languages);
  Pool pool = build_pool(data, plan, seed);
  std::vector<Instance> all = data.train;
  all.insert(all.end(), data.test.begin(), data.test.end());

  RoundSettings settings;
  settings.task = data.task;
  settings.features = options.features;
  settings.training = options.training;
  settings.strategy = options.strategy;
  settings.with_al = cell.with_al;
  settings.seed = seed;
  settings.labels = label_vocabulary(all);
  return run_rounds(plan, pool, settings);
}

std::map<LanguageTag, double> pool_composition(const Pool& pool) {
  std::map<LanguageTag, Cost> cost;
  Cost total = 0;
  for (Partition p : {Partition::kLabeled, Partition::kUnlabeled}) {
    for (const auto& [id, inst] : pool.partition(p)) {
      cost[inst.language] += inst.cost;
      total += inst.cost;
    }
  }
  std::map<LanguageTag, double> alpha;
  for (const auto& [lang, c] : cost) alpha[lang] = static_cast<double>(c) / static_cast<double>(total);
  return alpha;
}

double CurriculumReport::max_identity_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < weighted_sum.size(); ++i) {
    worst = std::max(worst, std::abs(weighted_sum[i] - spend_ratio[i]));
  }
  return worst;
}

CurriculumReport curriculum(std::span<const AcquisitionRecord> log,
                            const std::map<LanguageTag, double>& alpha, Cost per_round_budget,
                            int acquisition_rounds) {
  if (acquisition_rounds < 1) throw ConfigError("curriculum needs at least one acquisition round");
  if (per_round_budget <= 0) throw ConfigError("per-round budget must be positive");
  if (alpha.empty()) throw ConfigError("empty pool composition");
  for (const auto& [lang, a] : alpha) {
    if (!(a > 0.0)) throw ConfigError("language " + lang.str() + " has zero share of the pool");
  }

  // acquired[round][language]
  std::vector<std::map<LanguageTag, Cost>> acquired(acquisition_rounds + 1);
  for (const auto& r : log) {
    if (!alpha.count(r.language)) {
      throw ConfigError("language " + r.language.str() + " was acquired but has zero share of the pool");
    }
    if (r.round < 1 || r.round > acquisition_rounds) {
      throw ConfigError("acquisition log has round " + std::to_string(r.round) + " outside 1.." +
                        std::to_string(acquisition_rounds));
    }
    acquired[r.round][r.language] += r.cost;
  }

  CurriculumReport report;
  report.alpha = alpha;
  report.per_round_budget = per_round_budget;
  std::map<LanguageTag, Cost> cumulative;
  Cost total = 0;
  for (int i = 1; i <= acquisition_rounds; ++i) {
    const double budget_so_far = static_cast<double>(per_round_budget) * i;
    double weighted = 0.0;
    for (const auto& [lang, a] : alpha) {
      const Cost beta = acquired[i].count(lang) ? acquired[i].at(lang) : 0;
      cumulative[lang] += beta;
      total += beta;
      const double expected = a * budget_so_far;
      const double r = (static_cast<double>(cumulative[lang]) - expected) / expected;
      weighted += a * (1.0 + r);
      report.rows.push_back({i, lang, a, beta, cumulative[lang], r});
    }
    report.weighted_sum.push_back(weighted);
    report.spend_ratio.push_back(static_cast<double>(total) / budget_so_far);
  }
  return report;
}

std::vector<std::string> report_metrics(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return {"accuracy"};
    case TaskKind::kSequenceTagging: return {"f1"};
    case TaskKind::kDependencyParsing: return {"uas", "las"};
  }
  return {};
}

double run_mean(std::span<const RoundResult> rounds, const std::string& metric) {
  std::vector<double> xs;
  for (const auto& r : rounds) {
    for (const auto& [lang, m] : r.metrics) {
      auto it = m.values.find(metric);
      if (it == m.values.end()) throw EvaluationError("round result lacks metric " + metric);
      xs.push_back(it->second);
    }
  }
  if (xs.empty()) throw EvaluationError("no round results to average");
  return mean(xs);
}

AggregateCell aggregate(const std::string& setting, bool with_al, const std::string& metric,
                        std::span<const std::vector<RoundResult>> replicates) {
  if (replicates.empty()) throw EvaluationError("aggregate needs at least one replicate");
  AggregateCell cell{setting, with_al, metric, {}, 0.0, 0.0};
  for (const auto& rep : replicates) cell.replicate_values.push_back(run_mean(rep, metric));
  cell.mean = mean(cell.replicate_values);
  if (cell.replicate_values.size() > 1) {
    double ss = 0.0;
    for (double v : cell.replicate_values) ss += (v - cell.mean) * (v - cell.mean);
    cell.stddev = std::sqrt(ss / static_cast<double>(cell.replicate_values.size() - 1));
  }
  return cell;
}

BaselineReport run_full_data_baselines(const ExperimentData& data, const ExperimentOptions& options,
                                       std::uint64_t seed) {
  if (data.languages.empty()) throw ConfigError("language set is empty");
  const Cost n = static_cast<Cost>(data.languages.size());
  const Cost val = options.budget.validation / n;
  if (val <= 0) throw ConfigError("validation budget is smaller than the number of languages");

  std::vector<std::vector<LanguageTag>> groups;
  for (const auto& l : data.languages) groups.push_back({l});
  // Seed budget 0: everything except validation stays in the unlabeled
  // partition, which here holds gold data used for training.
  std::vector<Instance> train;
  std::set<LanguageTag> langs(data.languages.begin(), data.languages.end());
  for (const auto& inst : data.train) {
    if (langs.count(inst.language)) train.push_back(inst);
  }
  Pool pool = sample_splits(train, SplitSpec{0, val, derive_seed(seed, {kBaselineStream})}, groups);

  std::vector<Instance> all = data.train;
  all.insert(all.end(), data.test.begin(), data.test.end());
  const auto labels = label_vocabulary(all);

  auto fit = [&](std::span<const LanguageTag> scope, std::uint64_t stream) {
    auto model = make_model(data.task, options.features);
    model->initialize(labels);
    TrainingConfig config = options.training;
    config.rng_seed = derive_seed(seed, {kBaselineStream, stream});
    model->train(pool.instances(Partition::kUnlabeled, scope), pool.instances(Partition::kValidation, scope),
                 config);
    return model;
  };
  auto test_of = [&](const LanguageTag& lang) {
    std::vector<Instance> out;
    for (const auto& inst : data.test) {
      if (inst.language == lang) out.push_back(inst);
    }
    if (out.empty()) throw ConfigError("no test data for language " + lang.str());
    return out;
  };

  BaselineReport report;
  const auto pooled = fit(data.languages, 0);
  for (std::size_t i = 0; i < data.languages.size(); ++i) {
    const auto& lang = data.languages[i];
    const auto test = test_of(lang);
    report.single_model[lang] = pooled->evaluate(test);
    const LanguageTag one[] = {lang};
    report.multi_model[lang] = fit(one, i)->evaluate(test);
  }
  return report;
}

}  // namespace mlal
