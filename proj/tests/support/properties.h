// Randomized property checks shared by the unit tests and the acceptance
// binary. Each returns the number of violating cases.
#ifndef MLAL_TESTS_PROPERTIES_H_
#define MLAL_TESTS_PROPERTIES_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "mlal/acquisition.h"
#include "oracles.h"

namespace props {

inline std::vector<mlal::AcquisitionScore> random_candidates(std::mt19937_64& rng, std::size_t count,
                                                             mlal::InstanceId first_id = 0) {
  static const mlal::LanguageTag langs[] = {mlal::LanguageTag("en"), mlal::LanguageTag("de"),
                                            mlal::LanguageTag("fi")};
  std::vector<mlal::AcquisitionScore> out;
  for (std::size_t i = 0; i < count; ++i) {
    // coarse scores so ties occur
    out.push_back({first_id + static_cast<mlal::InstanceId>(i), static_cast<double>(rng() % 7) / 7.0, langs[rng() % 3],
                   static_cast<mlal::Cost>(1 + rng() % 12)});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Plain first-fit over the (score, id) order without any early exit.
inline mlal::Selection reference_selection(std::vector<mlal::AcquisitionScore> scores, mlal::Cost budget) {
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score < b.score : a.instance_id < b.instance_id;
  });
  mlal::Selection s;
  for (const auto& c : scores) {
    if (c.cost <= budget - s.spent) {
      s.ids.push_back(c.instance_id);
      s.spent += c.cost;
    }
  }
  return s;
}

inline int budget_safety(std::mt19937_64& rng, int cases) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto scores = random_candidates(rng, rng() % 40);
    const mlal::Cost budget = 1 + rng() % 80;
    const auto sel = mlal::select_batch(scores, budget);
    mlal::Cost total = 0;
    for (auto id : sel.ids) {
      for (const auto& c : scores) total += c.instance_id == id ? c.cost : 0;
    }
    const auto ref = reference_selection(scores, budget);
    if (sel.spent > budget || total != sel.spent || sel.ids != ref.ids) ++bad;
  }
  return bad;
}

inline int determinism(std::mt19937_64& rng, int cases) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    auto scores = random_candidates(rng, rng() % 40);
    const mlal::Cost budget = 1 + rng() % 80;
    const auto a = mlal::select_batch(scores, budget);
    std::shuffle(scores.begin(), scores.end(), rng);
    const auto b = mlal::select_batch(scores, budget);
    if (a.ids != b.ids || a.spent != b.spent) ++bad;
  }
  return bad;
}

inline int monotonicity(std::mt19937_64& rng, int cases) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const auto scores = random_candidates(rng, rng() % 40);
    const mlal::Cost budget = 1 + rng() % 60;
    const auto small = mlal::select_batch(scores, budget);
    const auto large = mlal::select_batch(scores, budget + rng() % 30);
    const std::set<mlal::InstanceId> big(large.ids.begin(), large.ids.end());
    // Skip-and-continue can trade a later small item for an earlier large
    // one, so only the greedy prefix of the ranking is guaranteed to persist.
    auto ranked = scores;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.score != b.score ? a.score < b.score : a.instance_id < b.instance_id;
    });
    mlal::Cost prefix = 0;
    for (const auto& c : ranked) {
      if (prefix + c.cost > budget) break;
      prefix += c.cost;
      if (!big.count(c.instance_id)) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

// Simulates rounds of acquisition over a shrinking unlabeled set with fresh
// scores each round; an id may never be acquired twice.
inline int no_duplicates(std::mt19937_64& rng, int cases) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    auto unlabeled = random_candidates(rng, 10 + rng() % 30);
    std::set<mlal::InstanceId> acquired;
    bool ok = true;
    for (int round = 1; round <= 3; ++round) {
      for (auto& c : unlabeled) c.score = std::uniform_real_distribution<double>(0, 1)(rng);
      const auto sel = mlal::select_batch(unlabeled, 1 + rng() % 25);
      for (auto id : sel.ids) ok = ok && acquired.insert(id).second;
      std::erase_if(unlabeled, [&](const auto& c) { return acquired.count(c.instance_id) > 0; });
    }
    bad += !ok;
  }
  return bad;
}

// NLPDT and NLPDT_N2 rank equal-length trees identically.
inline int variant_agreement(std::mt19937_64& rng, int cases) {
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<mlal::AcquisitionScore> a, b;
    for (mlal::InstanceId id = 0; id < 8; ++id) {
      const auto probs = oracle::random_probs(rng, n);
      const auto tree = mlal::chu_liu_edmonds(mlal::log_scores(probs));
      const mlal::LanguageTag lang("en");
      a.push_back({id, mlal::nlpdt_score(probs, tree, mlal::StrategyKind::kNLPDT), lang, 1});
      b.push_back({id, mlal::nlpdt_score(probs, tree, mlal::StrategyKind::kNLPDT_N2), lang, 1});
    }
    for (mlal::Cost k = 1; k <= 8; ++k) {
      if (mlal::select_batch(a, k).ids != mlal::select_batch(b, k).ids) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

}  // namespace props

#endif  // MLAL_TESTS_PROPERTIES_H_
