#include <cmath>

#include "mlal/error.h"
#include "mlal/models.h"

namespace mlal {

namespace {

const ClassificationText& text_of(const Instance& instance) {
  const auto* c = std::get_if<ClassificationText>(&instance.payload);
  if (!c) throw StateError("classifier given a non-classification instance");
  return *c;
}

}  // namespace

std::vector<std::size_t> Classifier::matrix_rows() const { return {labels().size()}; }

std::vector<double> Classifier::class_proba(const SparseVector& x) const {
  require_initialized();
  std::vector<double> p(labels().size());
  for (std::size_t c = 0; c < p.size(); ++c) p[c] = matrices_[0].dot(c, x);
  softmax(p);
  return p;
}

std::vector<double> Classifier::predict_class_proba(const Instance& instance) const {
  require_initialized();
  return class_proba(featurize_text(text_of(instance).text, feature_space()));
}

std::string Classifier::predict(const Instance& instance) const {
  auto p = predict_class_proba(instance);
  return labels()[std::max_element(p.begin(), p.end()) - p.begin()];
}

void Classifier::prepare_one(const Instance& instance, PreparedExample& out) const {
  const auto& c = text_of(instance);
  out.n = 1;
  out.vectors.push_back(featurize_text(c.text, feature_space()));
  if (c.label) out.gold.push_back(label_index(*c.label));
}

double Classifier::example_gradient(const PreparedExample& example,
                                    std::vector<GradientTerm>& terms) const {
  const auto& x = example.vectors[0];
  const auto p = class_proba(x);
  const int gold = example.gold.at(0);
  for (std::size_t c = 0; c < p.size(); ++c) {
    terms.push_back({0, static_cast<std::uint32_t>(c), &x,
                     (static_cast<int>(c) == gold ? 1.0 : 0.0) - p[c]});
  }
  return std::log(p[gold]);
}

void Classifier::accumulate_counts(const PreparedExample& example,
                                   std::map<std::string, std::int64_t>& counts) const {
  const auto& gold = text_of(*example.source).label;
  if (!gold) throw EvaluationError("instance " + std::to_string(example.source->id) + " has no gold label");
  const auto p = class_proba(example.vectors[0]);
  const auto pred = std::max_element(p.begin(), p.end()) - p.begin();
  counts["total"] += 1;
  counts["correct"] += labels()[pred] == *gold ? 1 : 0;
}

}  // namespace mlal
