#ifndef MLAL_TASKS_H_
#define MLAL_TASKS_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlal/corpus.h"

namespace mlal {

enum class TaskKind { kClassification, kSequenceTagging, kDependencyParsing };
enum class BudgetUnit { kInstance, kToken };

// Classification is budgeted in instances, the token-level tasks in tokens.
BudgetUnit budget_unit(TaskKind task);

std::string_view task_name(TaskKind task);  // "classification" | "tagging" | "parsing"
TaskKind parse_task(std::string_view name);
std::string_view budget_unit_name(BudgetUnit unit);

// Metric the experiment reports and early-stops on: accuracy, f1 or las.
std::string_view primary_metric(TaskKind task);

// Metric values for one language together with the integer counts they were
// computed from, so that reports can be re-aggregated exactly.
struct LanguageMetrics {
  std::map<std::string, double> values;
  std::map<std::string, std::int64_t> counts;

  bool operator==(const LanguageMetrics&) const = default;
};

struct MetricReport {
  TaskKind task = TaskKind::kClassification;
  std::map<LanguageTag, LanguageMetrics> languages;

  bool operator==(const MetricReport&) const = default;

  // Micro-average over all languages, recomputed from the retained counts.
  LanguageMetrics micro() const;
};

// Recomputes values from counts for a task's metric family.
LanguageMetrics metrics_from_counts(TaskKind task, const std::map<std::string, std::int64_t>& counts);

// Fraction of positions where pred equals gold.
double accuracy(std::span<const std::string> pred, std::span<const std::string> gold);

struct Span {
  std::string type;
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  auto operator<=>(const Span&) const = default;
};

// Maximal typed chunks of a BIO sequence. An I-X that follows O, the sentence
// start, or a chunk of another type opens a new chunk (conlleval convention).
// Throws EvaluationError on strings that are not BIO tags.
std::vector<Span> extract_spans(std::span<const std::string> tags);

struct SpanScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t true_positives = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;
};

// Exact-match micro-averaged span precision/recall/F1 over sentences.
SpanScores span_f1(std::span<const std::vector<std::string>> pred,
                   std::span<const std::vector<std::string>> gold);

struct AttachmentScores {
  double uas = 0.0;
  double las = 0.0;
  std::int64_t correct_heads = 0;
  std::int64_t correct_labeled = 0;
  std::int64_t tokens = 0;
};

// UAS/LAS over all tokens, punctuation included. Both trees need heads and labels.
AttachmentScores attachment_scores(std::span<const DepTree> pred, std::span<const DepTree> gold);

}  // namespace mlal

#endif  // MLAL_TASKS_H_
