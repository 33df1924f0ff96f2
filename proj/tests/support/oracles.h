// Brute-force reference implementations used to check the library. Nothing
// here calls into the code under test except for data types.
#ifndef MLAL_TESTS_ORACLES_H_
#define MLAL_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mlal/corpus.h"
#include "mlal/graph.h"

namespace oracle {

// Follows head pointers from every token; valid when exactly one token has
// head 0 and every token reaches 0 within n steps.
inline bool valid_tree(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int d = 1; d <= n; ++d) {
    const int h = heads[d - 1];
    if (h < 0 || h > n || h == d) return false;
    roots += h == 0;
  }
  if (roots != 1) return false;
  for (int d = 1; d <= n; ++d) {
    int cur = d;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) return false;
      cur = heads[cur - 1];
    }
  }
  return true;
}

// Every single-root arborescence over n tokens, in lexicographic order of heads.
inline std::vector<std::vector<int>> all_trees(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> heads(n, 0);
  std::function<void(int)> rec = [&](int d) {
    if (d > n) {
      if (valid_tree(heads)) out.push_back(heads);
      return;
    }
    for (int h = 0; h <= n; ++h) {
      if (h == d) continue;
      heads[d - 1] = h;
      rec(d + 1);
    }
  };
  rec(1);
  return out;
}

inline double score_of(const mlal::ArcScores& s, const std::vector<int>& heads) {
  double total = 0.0;
  for (std::size_t d = 1; d <= heads.size(); ++d) total += s.at(heads[d - 1], d);
  return total;
}

struct Best {
  double score = -std::numeric_limits<double>::infinity();
  std::vector<int> heads;
};

inline Best best_tree(const mlal::ArcScores& s) {
  Best b;
  for (const auto& t : all_trees(static_cast<int>(s.size()))) {
    bool allowed = true;
    for (std::size_t d = 1; d <= t.size(); ++d) allowed = allowed && !mlal::is_forbidden(s.at(t[d - 1], d));
    if (!allowed) continue;
    const double v = score_of(s, t);
    if (v > b.score) b = {v, t};
  }
  return b;
}

inline double log_sum_exp_trees(const mlal::ArcScores& s) {
  std::vector<double> scores;
  for (const auto& t : all_trees(static_cast<int>(s.size()))) scores.push_back(score_of(s, t));
  const double top = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double v : scores) z += std::exp(v - top);
  return top + std::log(z);
}

inline mlal::ArcScores random_scores(std::mt19937_64& rng, std::size_t n, double scale = 3.0) {
  std::normal_distribution<double> g(0.0, scale);
  mlal::ArcScores s(n);
  for (std::size_t h = 0; h <= n; ++h) {
    for (std::size_t d = 1; d <= n; ++d) {
      if (h != d) s.at(h, d) = g(rng);
    }
  }
  return s;
}

// Random column-stochastic head probabilities.
inline mlal::HeadProbabilities random_probs(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  mlal::HeadProbabilities p(n);
  for (std::size_t d = 1; d <= n; ++d) {
    double z = 0.0;
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d) z += p.at(h, d) = u(rng);
    }
    for (std::size_t h = 0; h <= n; ++h) {
      if (h != d) p.at(h, d) /= z;
    }
  }
  return p;
}

// |a - b| / max(1, |a|, |b|)
inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Micro span F1 counted by hand: chunks as (type, begin, end) with the
// conlleval reading of stray I- tags.
struct Chunk {
  std::string type;
  std::size_t begin, end;
  bool operator==(const Chunk&) const = default;
};

inline std::vector<Chunk> chunks(const std::vector<std::string>& tags) {
  std::vector<Chunk> out;
  std::string open;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tags.size(); ++i) {
    const std::string t = i < tags.size() ? tags[i] : "O";
    const std::string prefix = t.substr(0, 2);
    const std::string type = t == "O" ? "" : t.substr(2);
    const bool continues = prefix == "I-" && type == open;
    if (!open.empty() && !continues) {
      out.push_back({open, start, i});
      open.clear();
    }
    if (t != "O" && !continues) {
      open = type;
      start = i;
    }
  }
  return out;
}

}  // namespace oracle

#endif  // MLAL_TESTS_ORACLES_H_
