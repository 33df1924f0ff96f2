#include <algorithm>
#include <cmath>

#include "mlal/error.h"
#include "mlal/models.h"

namespace mlal {

namespace {

const TaggedSentence& sentence_of(const Instance& instance) {
  const auto* s = std::get_if<TaggedSentence>(&instance.payload);
  if (!s) throw StateError("tagger given a non-tagging instance");
  return *s;
}

}  // namespace

std::vector<std::size_t> Tagger::matrix_rows() const { return {labels().size()}; }

std::vector<double> Tagger::tag_proba(const SparseVector& x) const {
  std::vector<double> p(labels().size());
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = matrices_[0].dot(t, x);
  softmax(p);
  return p;
}

std::vector<std::vector<double>> Tagger::predict_tag_probas(const Instance& instance) const {
  require_initialized();
  std::vector<std::vector<double>> out;
  for (const auto& x : featurize_tokens(sentence_of(instance).tokens, feature_space())) {
    out.push_back(tag_proba(x));
  }
  return out;
}

std::vector<std::string> Tagger::predict_tags(const Instance& instance) const {
  std::vector<std::string> tags;
  for (const auto& p : predict_tag_probas(instance)) {
    tags.push_back(labels()[std::max_element(p.begin(), p.end()) - p.begin()]);
  }
  return tags;
}

void Tagger::prepare_one(const Instance& instance, PreparedExample& out) const {
  const auto& s = sentence_of(instance);
  out.n = s.tokens.size();
  out.vectors = featurize_tokens(s.tokens, feature_space());
  if (s.tags) {
    for (const auto& tag : *s.tags) out.gold.push_back(label_index(tag));
  }
}

double Tagger::example_gradient(const PreparedExample& example,
                                std::vector<GradientTerm>& terms) const {
  double loglik = 0.0;
  for (std::size_t i = 0; i < example.n; ++i) {
    const auto& x = example.vectors[i];
    const auto p = tag_proba(x);
    const int gold = example.gold.at(i);
    for (std::size_t t = 0; t < p.size(); ++t) {
      terms.push_back({0, static_cast<std::uint32_t>(t), &x,
                       (static_cast<int>(t) == gold ? 1.0 : 0.0) - p[t]});
    }
    loglik += std::log(p[gold]);
  }
  return loglik;
}

void Tagger::accumulate_counts(const PreparedExample& example,
                               std::map<std::string, std::int64_t>& counts) const {
  const auto& s = sentence_of(*example.source);
  if (!s.tags) throw EvaluationError("instance " + std::to_string(example.source->id) + " has no gold tags");
  std::vector<std::vector<std::string>> pred(1), gold{*s.tags};
  for (const auto& x : example.vectors) {
    const auto p = tag_proba(x);
    pred[0].push_back(labels()[std::max_element(p.begin(), p.end()) - p.begin()]);
  }
  const auto scores = span_f1(pred, gold);
  counts["tp"] += scores.true_positives;
  counts["pred"] += scores.predicted;
  counts["gold"] += scores.gold;
}

}  // namespace mlal
