#include <algorithm>
#include <cmath>

#include "mlal/error.h"
#include "mlal/models.h"

namespace mlal {

namespace {

const DepTree& tree_of(const Instance& instance) {
  const auto* t = std::get_if<DepTree>(&instance.payload);
  if (!t) throw StateError("parser given a non-parsing instance");
  if (t->tokens.empty()) throw StateError("empty sentence");
  return *t;
}

std::vector<SparseVector> arc_vectors(const DepTree& tree, const FeatureSpace& space) {
  const int n = static_cast<int>(tree.tokens.size());
  std::vector<SparseVector> arcs(static_cast<std::size_t>(n + 1) * n);
  for (int h = 0; h <= n; ++h) {
    for (int d = 1; d <= n; ++d) {
      if (h != d) arcs[h * n + d - 1] = featurize_arc(tree, h, d, space);
    }
  }
  return arcs;
}

}  // namespace

std::vector<std::size_t> ArcParser::matrix_rows() const { return {1, labels().size()}; }

HeadProbabilities ArcParser::head_probas(const std::vector<SparseVector>& arcs, std::size_t n) const {
  HeadProbabilities probs(n);
  std::vector<double> column;
  for (std::size_t d = 1; d <= n; ++d) {
    column.clear();
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d) column.push_back(matrices_[0].dot(0, arcs[h * n + d - 1]));
    }
    softmax(column);
    std::size_t k = 0;
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d) probs.at(h, d) = column[k++];
    }
  }
  return probs;
}

std::vector<double> ArcParser::label_proba(const SparseVector& arc) const {
  std::vector<double> p(labels().size());
  for (std::size_t l = 0; l < p.size(); ++l) p[l] = matrices_[1].dot(l, arc);
  softmax(p);
  return p;
}

ArcPrediction ArcParser::predict_arc_probas(const Instance& instance, bool with_labels) const {
  require_initialized();
  const auto& tree = tree_of(instance);
  const std::size_t n = tree.tokens.size();
  const auto arcs = arc_vectors(tree, feature_space());
  ArcPrediction out{head_probas(arcs, n), {}};
  if (with_labels) {
    out.labels.resize(arcs.size());
    for (std::size_t h = 0; h <= n; ++h) {
      for (std::size_t d = 1; d <= n; ++d) {
        if (h != d) out.labels[h * n + d - 1] = label_proba(arcs[h * n + d - 1]);
      }
    }
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> ArcParser::decode(const std::vector<SparseVector>& arcs,
                                                                std::size_t n) const {
  const auto tree = chu_liu_edmonds(log_scores(head_probas(arcs, n)));
  std::vector<int> labels;
  for (std::size_t d = 1; d <= n; ++d) {
    const auto p = label_proba(arcs[tree.heads[d - 1] * n + d - 1]);
    labels.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
  }
  return {tree.heads, labels};
}

DepTree ArcParser::decode_tree(const Instance& instance) const {
  require_initialized();
  const auto& gold = tree_of(instance);
  const auto [heads, label_ids] = decode(arc_vectors(gold, feature_space()), gold.tokens.size());
  DepTree out{gold.tokens, gold.upos, heads, std::vector<std::string>{}};
  for (int l : label_ids) out.labels->push_back(labels()[l]);
  return out;
}

void ArcParser::prepare_one(const Instance& instance, PreparedExample& out) const {
  const auto& tree = tree_of(instance);
  out.n = tree.tokens.size();
  out.vectors = arc_vectors(tree, feature_space());
  if (tree.heads && tree.labels) {
    out.gold = *tree.heads;
    for (const auto& l : *tree.labels) out.gold.push_back(label_index(l));
  }
}

double ArcParser::example_gradient(const PreparedExample& example,
                                   std::vector<GradientTerm>& terms) const {
  const std::size_t n = example.n;
  const auto probs = head_probas(example.vectors, n);
  double loglik = 0.0;
  for (std::size_t d = 1; d <= n; ++d) {
    const int gold_head = example.gold.at(d - 1);
    for (std::size_t h = 0; h <= n; ++h) {
      if (h == d) continue;
      const double target = static_cast<int>(h) == gold_head ? 1.0 : 0.0;
      terms.push_back({0, 0, &example.vectors[h * n + d - 1], target - probs.at(h, d)});
    }
    loglik += std::log(probs.at(gold_head, d));

    const auto& arc = example.vectors[gold_head * n + d - 1];
    const auto q = label_proba(arc);
    const int gold_label = example.gold.at(n + d - 1);
    for (std::size_t l = 0; l < q.size(); ++l) {
      terms.push_back({1, static_cast<std::uint32_t>(l), &arc,
                       (static_cast<int>(l) == gold_label ? 1.0 : 0.0) - q[l]});
    }
    loglik += std::log(q[gold_label]);
  }
  return loglik;
}

void ArcParser::accumulate_counts(const PreparedExample& example,
                                  std::map<std::string, std::int64_t>& counts) const {
  const auto& gold = tree_of(*example.source);
  if (!gold.heads || !gold.labels) {
    throw EvaluationError("instance " + std::to_string(example.source->id) + " has no gold tree");
  }
  const auto [heads, label_ids] = decode(example.vectors, example.n);
  auto& head_correct = counts["head_correct"];
  auto& label_correct = counts["label_correct"];
  for (std::size_t i = 0; i < example.n; ++i) {
    if (heads[i] == (*gold.heads)[i]) {
      ++head_correct;
      if (labels()[label_ids[i]] == (*gold.labels)[i]) ++label_correct;
    }
  }
  counts["tokens"] += static_cast<std::int64_t>(example.n);
}

}  // namespace mlal
