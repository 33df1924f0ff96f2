// Small random instances for model tests.
#ifndef MLAL_TESTS_FIXTURES_H_
#define MLAL_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mlal/corpus.h"
#include "mlal/models.h"
#include "mlal/tasks.h"
#include "oracles.h"

namespace fixture {

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> w{"ka", "lomi", "tre", "su", "abba", "ner", "qi", "zo"};
  return w;
}

inline std::vector<std::string> labels_for(mlal::TaskKind task) {
  switch (task) {
    case mlal::TaskKind::kClassification: return {"neg", "neu", "pos"};
    case mlal::TaskKind::kSequenceTagging: return {"B-LOC", "B-PER", "I-LOC", "I-PER", "O"};
    case mlal::TaskKind::kDependencyParsing: return {"dep", "nsubj", "root"};
  }
  return {};
}

inline mlal::Instance random_instance(mlal::TaskKind task, std::mt19937_64& rng, mlal::InstanceId id,
                                      std::size_t max_len = 4) {
  const auto& w = words();
  const auto labels = labels_for(task);
  const std::size_t n = 1 + rng() % max_len;
  std::vector<std::string> tokens(n);
  for (auto& t : tokens) t = w[rng() % w.size()];
  const mlal::LanguageTag lang(rng() % 2 ? "en" : "de");
  switch (task) {
    case mlal::TaskKind::kClassification: {
      std::string text;
      for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
      return {id, lang, mlal::ClassificationText{text, labels[rng() % labels.size()]}, 1};
    }
    case mlal::TaskKind::kSequenceTagging: {
      mlal::TaggedSentence s{tokens, std::vector<std::string>(n)};
      for (auto& t : *s.tags) t = labels[rng() % labels.size()];
      return {id, lang, s, static_cast<mlal::Cost>(n)};
    }
    case mlal::TaskKind::kDependencyParsing: {
      const auto trees = oracle::all_trees(static_cast<int>(n));
      mlal::DepTree t;
      t.tokens = tokens;
      t.upos.resize(n);
      for (auto& u : t.upos) u = rng() % 2 ? "NOUN" : "VERB";
      t.heads = trees[rng() % trees.size()];
      t.labels = std::vector<std::string>(n);
      for (auto& l : *t.labels) l = labels[rng() % labels.size()];
      return {id, lang, t, static_cast<mlal::Cost>(n)};
    }
  }
  throw std::logic_error("unknown task");
}

inline std::vector<mlal::Instance> random_batch(mlal::TaskKind task, std::mt19937_64& rng, std::size_t count) {
  std::vector<mlal::Instance> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_instance(task, rng, i));
  return out;
}

inline mlal::FeatureSpace small_space() { return {1u << 10, 1, 3}; }

// Parameter indices whose gradient can be non-zero on `data`: every row of
// every matrix at every feature index the data touches.
inline std::vector<std::size_t> touched_parameters(const mlal::TaskModel& model,
                                                   std::span<const mlal::Instance> data) {
  std::set<std::uint32_t> features;
  for (const auto& ex : model.prepare(data, true)) {
    for (const auto& v : ex.vectors) {
      for (const auto& f : v) features.insert(f.index);
    }
  }
  const std::size_t dim = model.feature_space().hash_dimension;
  std::vector<std::size_t> out;
  const std::size_t rows = model.num_parameters() / dim;
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto f : features) out.push_back(r * dim + f);
  }
  return out;
}

// Largest relative error between the analytic gradient and central
// differences of the objective, over the touched parameters after
// randomizing them.
inline double gradient_check(mlal::TaskModel& model, std::span<const mlal::Instance> data,
                             std::mt19937_64& rng, double step = 1e-5, double l2 = 1e-2) {
  std::normal_distribution<double> g(0.0, 0.5);
  const auto params = touched_parameters(model, data);
  for (auto i : params) model.set_parameter(i, g(rng));
  const auto analytic = model.gradient(data, l2);
  double worst = 0.0;
  for (auto i : params) {
    const double w = model.parameter(i);
    model.set_parameter(i, w + step);
    const double up = model.objective(data, l2);
    model.set_parameter(i, w - step);
    const double down = model.objective(data, l2);
    model.set_parameter(i, w);
    const double numeric = (up - down) / (2 * step);
    worst = std::max(worst, std::abs(numeric - analytic[i]) / std::max({1e-6, std::abs(numeric), std::abs(analytic[i])}));
  }
  return worst;
}

}  // namespace fixture

#endif  // MLAL_TESTS_FIXTURES_H_
