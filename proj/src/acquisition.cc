#include "mlal/acquisition.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "mlal/csv.h"
#include "mlal/error.h"
#include "mlal/random.h"

namespace mlal {

std::string_view strategy_name(StrategyKind strategy) {
  switch (strategy) {
    case StrategyKind::kRandom: return "Random";
    case StrategyKind::kLC: return "LC";
    case StrategyKind::kMNLP: return "MNLP";
    case StrategyKind::kNLPDT: return "NLPDT";
    case StrategyKind::kNLPDT_N2: return "NLPDT_N2";
    case StrategyKind::kNLPDT_Global: return "NLPDT_Global";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto s : {StrategyKind::kRandom, StrategyKind::kLC, StrategyKind::kMNLP, StrategyKind::kNLPDT,
                 StrategyKind::kNLPDT_N2, StrategyKind::kNLPDT_Global}) {
    if (strategy_name(s) == name) return s;
  }
  throw ConfigError("unknown acquisition strategy '" + std::string(name) + "'");
}

bool strategy_compatible(StrategyKind strategy, TaskKind task) {
  switch (strategy) {
    case StrategyKind::kRandom: return true;
    case StrategyKind::kLC: return task == TaskKind::kClassification;
    case StrategyKind::kMNLP: return task == TaskKind::kSequenceTagging;
    case StrategyKind::kNLPDT:
    case StrategyKind::kNLPDT_N2:
    case StrategyKind::kNLPDT_Global: return task == TaskKind::kDependencyParsing;
  }
  return false;
}

StrategyKind default_strategy(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return StrategyKind::kLC;
    case TaskKind::kSequenceTagging: return StrategyKind::kMNLP;
    case TaskKind::kDependencyParsing: return StrategyKind::kNLPDT;
  }
  return StrategyKind::kRandom;
}

double lc_score(std::span<const double> distribution) {
  if (distribution.empty()) throw ScoringError("empty distribution");
  double sum = 0.0;
  for (double p : distribution) {
    if (!(p >= 0.0)) throw ScoringError("distribution has a negative or NaN component");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ScoringError("distribution sums to " + format_double(sum));
  return *std::max_element(distribution.begin(), distribution.end());
}

double mnlp_score(std::span<const std::vector<double>> token_distributions) {
  if (token_distributions.empty()) throw ScoringError("MNLP of an empty sentence");
  double total = 0.0;
  for (const auto& dist : token_distributions) {
    if (dist.empty()) throw ScoringError("empty tag distribution");
    total += std::log(*std::max_element(dist.begin(), dist.end()));
  }
  return total / static_cast<double>(token_distributions.size());
}

double nlpdt_score(const HeadProbabilities& probs, const Arborescence& decoded, StrategyKind variant) {
  const double n = static_cast<double>(probs.size());
  const double log_prob = tree_log_prob(probs, decoded);
  switch (variant) {
    case StrategyKind::kNLPDT: return log_prob / n;
    case StrategyKind::kNLPDT_N2: return log_prob / (n * n);
    case StrategyKind::kNLPDT_Global: return log_prob - log_partition(log_scores(probs));
    default: throw ScoringError("not an NLPDT variant: " + std::string(strategy_name(variant)));
  }
}

std::vector<double> random_scores(std::span<const InstanceId> ids, std::uint64_t seed, int round) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  Rng rng(derive_seed(seed, {0x5241u, static_cast<std::uint64_t>(round)}));
  std::vector<double> out(ids.size());
  for (std::size_t i : order) out[i] = rng.uniform();
  return out;
}

double score_instance(const TaskModel& model, const Instance& instance, StrategyKind strategy) {
  if (!strategy_compatible(strategy, model.task()) || strategy == StrategyKind::kRandom) {
    throw ScoringError(std::string(strategy_name(strategy)) + " cannot score a " +
                       std::string(task_name(model.task())) + " model");
  }
  switch (model.task()) {
    case TaskKind::kClassification:
      return lc_score(static_cast<const Classifier&>(model).predict_class_proba(instance));
    case TaskKind::kSequenceTagging:
      return mnlp_score(static_cast<const Tagger&>(model).predict_tag_probas(instance));
    case TaskKind::kDependencyParsing: {
      const auto pred = static_cast<const ArcParser&>(model).predict_arc_probas(instance, false);
      const auto tree = chu_liu_edmonds(log_scores(pred.heads));
      return nlpdt_score(pred.heads, tree, strategy);
    }
  }
  throw ScoringError("unknown task");
}

std::vector<AcquisitionScore> score_candidates(const TaskModel& model,
                                               std::span<const Instance> candidates,
                                               StrategyKind strategy, std::uint64_t seed, int round) {
  std::vector<AcquisitionScore> out;
  out.reserve(candidates.size());
  if (strategy == StrategyKind::kRandom) {
    std::vector<InstanceId> ids;
    for (const auto& c : candidates) ids.push_back(c.id);
    const auto draws = random_scores(ids, seed, round);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out.push_back({candidates[i].id, draws[i], candidates[i].language, candidates[i].cost});
    }
    return out;
  }
  for (const auto& c : candidates) {
    out.push_back({c.id, score_instance(model, c, strategy), c.language, c.cost});
  }
  return out;
}

Selection select_batch(std::span<const AcquisitionScore> scores, Cost budget) {
  if (budget < 0) throw ConfigError("negative acquisition budget");
  std::vector<const AcquisitionScore*> ranked;
  ranked.reserve(scores.size());
  for (const auto& s : scores) {
    if (std::isnan(s.score)) throw ScoringError("NaN score for instance " + std::to_string(s.instance_id));
    if (s.cost <= 0) throw ScoringError("non-positive cost for instance " + std::to_string(s.instance_id));
    ranked.push_back(&s);
  }
  std::sort(ranked.begin(), ranked.end(), [](const AcquisitionScore* a, const AcquisitionScore* b) {
    if (a->score != b->score) return a->score < b->score;
    return a->instance_id < b->instance_id;
  });
  // suffix_min[i]: cheapest cost among ranked[i..]
  std::vector<Cost> suffix_min(ranked.size() + 1, std::numeric_limits<Cost>::max());
  for (std::size_t i = ranked.size(); i-- > 0;) suffix_min[i] = std::min(suffix_min[i + 1], ranked[i]->cost);

  Selection sel;
  Cost remaining = budget;
  for (std::size_t i = 0; i < ranked.size() && remaining >= suffix_min[i]; ++i) {
    if (ranked[i]->cost <= remaining) {
      sel.ids.push_back(ranked[i]->instance_id);
      remaining -= ranked[i]->cost;
    }
  }
  sel.spent = budget - remaining;
  return sel;
}

void write_acquisition_log(std::ostream& out, std::span<const AcquisitionRecord> records) {
  write_csv_row(out, {"round", "instance_id", "language", "cost", "score", "strategy"});
  for (const auto& r : records) {
    write_csv_row(out, {std::to_string(r.round), std::to_string(r.instance_id), r.language.str(),
                        std::to_string(r.cost), format_double(r.score),
                        std::string(strategy_name(r.strategy))});
  }
}

std::vector<AcquisitionRecord> read_acquisition_log(std::istream& in, const std::string& source) {
  const auto rows = read_csv(in, source);
  const CsvRow header{"round", "instance_id", "language", "cost", "score", "strategy"};
  if (rows.empty() || rows[0] != header) throw ParseError(source, 1, "missing acquisition log header");
  std::vector<AcquisitionRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size()) {
      throw ParseError(source, i + 1, "expected 6 fields, found " + std::to_string(row.size()));
    }
    try {
      AcquisitionRecord r;
      r.round = std::stoi(row[0]);
      r.instance_id = std::stoll(row[1]);
      r.language = LanguageTag(row[2]);
      r.cost = std::stoll(row[3]);
      r.score = parse_double(row[4]);
      r.strategy = parse_strategy(row[5]);
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  return out;
}

}  // namespace mlal
