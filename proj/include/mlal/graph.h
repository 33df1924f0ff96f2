#ifndef MLAL_GRAPH_H_
#define MLAL_GRAPH_H_

#include <cstddef>
#include <limits>
#include <vector>

#include "mlal/error.h"

namespace mlal {

// Stand-in for log(0): unselectable, yet small multiples stay finite.
inline constexpr double kForbiddenScore = std::numeric_limits<double>::lowest() / 4;

inline bool is_forbidden(double log_score) { return !(log_score > kForbiddenScore); }

// Dense (n+1) x n table indexed by (head, dependent) with head in 0..n
// (0 = ROOT) and dependent in 1..n. Self-arcs hold Tag::kSelf.
template <class Tag>
class ArcTable {
 public:
  ArcTable() = default;
  explicit ArcTable(std::size_t n, double fill = 0.0) : n_(n), values_((n + 1) * n, fill) {
    if (n == 0) throw ValidationError("arc table needs at least one token");
    for (std::size_t d = 1; d <= n; ++d) at(d, d) = Tag::kSelf;
  }

  std::size_t size() const { return n_; }

  double& at(std::size_t head, std::size_t dep) { return values_[head * n_ + (dep - 1)]; }
  double at(std::size_t head, std::size_t dep) const { return values_[head * n_ + (dep - 1)]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct LogScoreTag {
  static constexpr double kSelf = kForbiddenScore;
};
struct ProbabilityTag {
  static constexpr double kSelf = 0.0;
};

// Arc log-scores; forbidden arcs carry kForbiddenScore (or -inf).
using ArcScores = ArcTable<LogScoreTag>;
// P(head | dependent); each dependent's column sums to one.
using HeadProbabilities = ArcTable<ProbabilityTag>;

// heads[d-1] is the head of token d; 0 is ROOT.
struct Arborescence {
  std::vector<int> heads;

  bool operator==(const Arborescence&) const = default;
};

// Exactly one ROOT child, no cycles, every head in range.
bool is_single_root_arborescence(const std::vector<int>& heads);

// Sum of arc scores along the tree.
double tree_score(const ArcScores& scores, const Arborescence& tree);

// Maximum-score single-root arborescence. Runs Chu-Liu/Edmonds; when the
// unconstrained optimum has several ROOT children, re-solves once per
// candidate ROOT arc with the other ROOT arcs removed and keeps the best
// (ties: lexicographically smaller heads). Throws InfeasibleError when no
// ROOT arc is allowed or no spanning arborescence exists.
Arborescence chu_liu_edmonds(const ArcScores& scores);

// Sum over dependents of log P(heads[d] | d); -inf if any selected arc has
// probability zero.
double tree_log_prob(const HeadProbabilities& probs, const Arborescence& tree);

// log P elementwise; zero probabilities become kForbiddenScore.
ArcScores log_scores(const HeadProbabilities& probs);

// log of the sum over all single-root arborescences of exp(tree score), via
// the single-root Matrix-Tree construction: the determinant of the Laplacian
// whose first row is replaced by the ROOT arc weights. Each dependent's
// column is shifted by its max score before exponentiation. Throws
// NumericalError when the determinant is not positive.
double log_partition(const ArcScores& scores);

}  // namespace mlal

#endif  // MLAL_GRAPH_H_
