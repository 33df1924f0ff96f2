#ifndef MLAL_ACQUISITION_H_
#define MLAL_ACQUISITION_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlal/corpus.h"
#include "mlal/graph.h"
#include "mlal/models.h"
#include "mlal/tasks.h"

namespace mlal {

enum class StrategyKind { kRandom, kLC, kMNLP, kNLPDT, kNLPDT_N2, kNLPDT_Global };

std::string_view strategy_name(StrategyKind strategy);
StrategyKind parse_strategy(std::string_view name);  // throws ConfigError

// LC for classification, MNLP for tagging, the NLPDT family for parsing,
// Random for anything.
bool strategy_compatible(StrategyKind strategy, TaskKind task);
StrategyKind default_strategy(TaskKind task);

// Lower scores are acquired first, for every strategy.
struct AcquisitionScore {
  InstanceId instance_id = 0;
  double score = 0.0;
  LanguageTag language;
  Cost cost = 1;
};

// Confidence of the predicted class, max_y P(y). Throws ScoringError when
// the input is not a distribution (sum off by more than 1e-6).
double lc_score(std::span<const double> distribution);

// Mean over tokens of log max_t P(t | token).
double mnlp_score(std::span<const std::vector<double>> token_distributions);

// NLPDT: tree log-probability / N; NLPDT_N2: / N^2; NLPDT_Global: tree
// log-probability minus the log partition over all single-root trees.
double nlpdt_score(const HeadProbabilities& probs, const Arborescence& decoded, StrategyKind variant);

// One uniform [0, 1) draw per id, drawn in ascending id order from a stream
// keyed by (seed, round). The result is aligned with `ids`.
std::vector<double> random_scores(std::span<const InstanceId> ids, std::uint64_t seed, int round);

// Uncertainty score of one instance under a trained model (not Random).
double score_instance(const TaskModel& model, const Instance& instance, StrategyKind strategy);

// Scores every candidate. Random ignores the model and uses (seed, round).
std::vector<AcquisitionScore> score_candidates(const TaskModel& model,
                                               std::span<const Instance> candidates,
                                               StrategyKind strategy, std::uint64_t seed, int round);

struct Selection {
  std::vector<InstanceId> ids;  // in selection order
  Cost spent = 0;
};

// Ranks by (score, instance_id) ascending, then takes every instance whose
// cost still fits the remaining budget, skipping those that do not.
Selection select_batch(std::span<const AcquisitionScore> scores, Cost budget);

// One row of the acquisition log.
struct AcquisitionRecord {
  int round = 0;
  InstanceId instance_id = 0;
  LanguageTag language;
  Cost cost = 0;
  double score = 0.0;
  StrategyKind strategy = StrategyKind::kRandom;

  bool operator==(const AcquisitionRecord&) const = default;
};

// CSV with header round,instance_id,language,cost,score,strategy.
void write_acquisition_log(std::ostream& out, std::span<const AcquisitionRecord> records);
std::vector<AcquisitionRecord> read_acquisition_log(std::istream& in, const std::string& source);

}  // namespace mlal

#endif  // MLAL_ACQUISITION_H_
