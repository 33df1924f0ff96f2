#include "mlal/tasks.h"

#include "mlal/error.h"

namespace mlal {

BudgetUnit budget_unit(TaskKind task) {
  return task == TaskKind::kClassification ? BudgetUnit::kInstance : BudgetUnit::kToken;
}

std::string_view task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return "classification";
    case TaskKind::kSequenceTagging: return "tagging";
    case TaskKind::kDependencyParsing: return "parsing";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  if (name == "classification") return TaskKind::kClassification;
  if (name == "tagging") return TaskKind::kSequenceTagging;
  if (name == "parsing") return TaskKind::kDependencyParsing;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string_view budget_unit_name(BudgetUnit unit) {
  return unit == BudgetUnit::kInstance ? "instance" : "token";
}

std::string_view primary_metric(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return "accuracy";
    case TaskKind::kSequenceTagging: return "f1";
    case TaskKind::kDependencyParsing: return "las";
  }
  return "?";
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::int64_t count_or_zero(const std::map<std::string, std::int64_t>& counts, const char* key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

LanguageMetrics metrics_from_counts(TaskKind task, const std::map<std::string, std::int64_t>& counts) {
  LanguageMetrics m;
  m.counts = counts;
  switch (task) {
    case TaskKind::kClassification:
      m.values["accuracy"] = ratio(count_or_zero(counts, "correct"), count_or_zero(counts, "total"));
      break;
    case TaskKind::kSequenceTagging: {
      const auto tp = count_or_zero(counts, "tp");
      const double p = ratio(tp, count_or_zero(counts, "pred"));
      const double r = ratio(tp, count_or_zero(counts, "gold"));
      m.values["precision"] = p;
      m.values["recall"] = r;
      m.values["f1"] = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      break;
    }
    case TaskKind::kDependencyParsing: {
      const auto n = count_or_zero(counts, "tokens");
      m.values["uas"] = ratio(count_or_zero(counts, "head_correct"), n);
      m.values["las"] = ratio(count_or_zero(counts, "label_correct"), n);
      break;
    }
  }
  return m;
}

LanguageMetrics MetricReport::micro() const {
  std::map<std::string, std::int64_t> total;
  for (const auto& [lang, m] : languages) {
    for (const auto& [k, v] : m.counts) total[k] += v;
  }
  return metrics_from_counts(task, total);
}

double accuracy(std::span<const std::string> pred, std::span<const std::string> gold) {
  if (pred.size() != gold.size()) {
    throw EvaluationError("accuracy: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw EvaluationError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += pred[i] == gold[i];
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

std::vector<Span> extract_spans(std::span<const std::string> tags) {
  std::vector<Span> spans;
  bool open = false;
  Span cur;
  auto close = [&](std::size_t at) {
    if (open) {
      cur.end = at;
      spans.push_back(cur);
      open = false;
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& tag = tags[i];
    if (!is_bio_tag(tag)) throw EvaluationError("'" + tag + "' is not a BIO tag");
    if (tag == "O") {
      close(i);
      continue;
    }
    std::string type = tag.substr(2);
    if (tag[0] == 'I' && open && cur.type == type) continue;
    close(i);
    cur = Span{std::move(type), i, i};
    open = true;
  }
  close(tags.size());
  return spans;
}

SpanScores span_f1(std::span<const std::vector<std::string>> pred,
                   std::span<const std::vector<std::string>> gold) {
  if (pred.size() != gold.size()) {
    throw EvaluationError("span_f1: sentence count mismatch");
  }
  SpanScores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred[i].size() != gold[i].size()) {
      throw EvaluationError("span_f1: sentence " + std::to_string(i) + " has " +
                            std::to_string(pred[i].size()) + " predicted tags for " +
                            std::to_string(gold[i].size()) + " tokens");
    }
    auto p = extract_spans(pred[i]);
    auto g = extract_spans(gold[i]);
    s.predicted += static_cast<std::int64_t>(p.size());
    s.gold += static_cast<std::int64_t>(g.size());
    // Both lists are sorted by begin and non-overlapping.
    std::size_t a = 0, b = 0;
    while (a < p.size() && b < g.size()) {
      if (p[a] == g[b]) {
        ++s.true_positives;
        ++a;
        ++b;
      } else if (p[a] < g[b]) {
        ++a;
      } else {
        ++b;
      }
    }
  }
  s.precision = ratio(s.true_positives, s.predicted);
  s.recall = ratio(s.true_positives, s.gold);
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

AttachmentScores attachment_scores(std::span<const DepTree> pred, std::span<const DepTree> gold) {
  if (pred.size() != gold.size()) throw EvaluationError("attachment_scores: sentence count mismatch");
  AttachmentScores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = pred[i];
    const auto& g = gold[i];
    if (!p.heads || !p.labels || !g.heads || !g.labels) {
      throw EvaluationError("attachment_scores: sentence " + std::to_string(i) +
                            " lacks heads or labels");
    }
    const std::size_t n = g.tokens.size();
    if (p.heads->size() != n || p.labels->size() != n || g.heads->size() != n ||
        g.labels->size() != n) {
      throw EvaluationError("attachment_scores: token count mismatch in sentence " +
                            std::to_string(i));
    }
    for (std::size_t t = 0; t < n; ++t) {
      if ((*p.heads)[t] == (*g.heads)[t]) {
        ++s.correct_heads;
        if ((*p.labels)[t] == (*g.labels)[t]) ++s.correct_labeled;
      }
    }
    s.tokens += static_cast<std::int64_t>(n);
  }
  s.uas = ratio(s.correct_heads, s.tokens);
  s.las = ratio(s.correct_labeled, s.tokens);
  return s;
}

}  // namespace mlal
