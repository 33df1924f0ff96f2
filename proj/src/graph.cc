#include "mlal/graph.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "mlal/corpus.h"

namespace mlal {

namespace {

// Edmonds' contraction algorithm on a dense m x m matrix (w[u * m + v] is the
// score of u -> v, node 0 is the root). Forbidden arcs are absent. Returns
// the parent of every node; parent[0] = -1.
std::vector<int> max_arborescence(const std::vector<double>& w, int m) {
  std::vector<int> best(m, -1);
  for (int v = 1; v < m; ++v) {
    double top = kForbiddenScore;
    for (int u = 0; u < m; ++u) {
      if (u == v) continue;
      double s = w[u * m + v];
      if (!is_forbidden(s) && (best[v] < 0 || s > top)) {
        top = s;
        best[v] = u;
      }
    }
    if (best[v] < 0) throw InfeasibleError("node has no admissible incoming arc");
  }

  // Look for a cycle in the greedy parent graph.
  std::vector<int> mark(m, -1);
  std::vector<char> in_cycle(m, 0);
  bool found = false;
  for (int start = 1; start < m && !found; ++start) {
    int v = start;
    while (v != 0 && mark[v] < 0) {
      mark[v] = start;
      v = best[v];
    }
    if (v != 0 && mark[v] == start) {
      found = true;
      int u = v;
      do {
        in_cycle[u] = 1;
        u = best[u];
      } while (u != v);
    }
  }
  if (!found) return best;

  // Contract the cycle into a single node placed last.
  std::vector<int> to_new(m, -1), to_old;
  for (int v = 0; v < m; ++v) {
    if (!in_cycle[v]) {
      to_new[v] = static_cast<int>(to_old.size());
      to_old.push_back(v);
    }
  }
  const int c = static_cast<int>(to_old.size());
  const int mc = c + 1;
  for (int v = 0; v < m; ++v) {
    if (in_cycle[v]) to_new[v] = c;
  }

  std::vector<double> wc(static_cast<std::size_t>(mc) * mc, kForbiddenScore);
  std::vector<int> enter_at(mc, -1);  // outside u -> which cycle node it enters
  std::vector<int> leave_from(mc, -1);  // which cycle node reaches outside v
  for (int u = 0; u < m; ++u) {
    for (int v = 1; v < m; ++v) {
      if (u == v) continue;
      const double s = w[u * m + v];
      if (is_forbidden(s)) continue;
      if (in_cycle[u] && in_cycle[v]) continue;
      const int nu = to_new[u], nv = to_new[v];
      if (!in_cycle[u] && !in_cycle[v]) {
        wc[nu * mc + nv] = s;
      } else if (in_cycle[v]) {
        const double reduced = s - w[best[v] * m + v];
        double& slot = wc[nu * mc + c];
        if (enter_at[nu] < 0 || reduced > slot) {
          slot = reduced;
          enter_at[nu] = v;
        }
      } else {
        double& slot = wc[c * mc + nv];
        if (leave_from[nv] < 0 || s > slot) {
          slot = s;
          leave_from[nv] = u;
        }
      }
    }
  }

  const std::vector<int> sub = max_arborescence(wc, mc);

  std::vector<int> parent(m, -1);
  for (int v = 1; v < m; ++v) {
    if (in_cycle[v]) {
      parent[v] = best[v];
    } else {
      const int pu = sub[to_new[v]];
      parent[v] = pu == c ? leave_from[to_new[v]] : to_old[pu];
    }
  }
  const int entering_from = sub[c];
  parent[enter_at[entering_from]] = to_old[entering_from];
  return parent;
}

std::vector<int> solve(const ArcScores& scores, int forced_root_child) {
  const int n = static_cast<int>(scores.size());
  const int m = n + 1;
  std::vector<double> w(static_cast<std::size_t>(m) * m, kForbiddenScore);
  for (int h = 0; h <= n; ++h) {
    for (int d = 1; d <= n; ++d) {
      if (h == d) continue;
      if (h == 0 && forced_root_child > 0 && d != forced_root_child) continue;
      w[h * m + d] = scores.at(h, d);
    }
  }
  auto parent = max_arborescence(w, m);
  return {parent.begin() + 1, parent.end()};
}

}  // namespace

bool is_single_root_arborescence(const std::vector<int>& heads) {
  try {
    validate_heads(heads, "tree");
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

double tree_score(const ArcScores& scores, const Arborescence& tree) {
  double total = 0.0;
  for (std::size_t d = 1; d <= tree.heads.size(); ++d) total += scores.at(tree.heads[d - 1], d);
  return total;
}

Arborescence chu_liu_edmonds(const ArcScores& scores) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> root_candidates;
  for (int d = 1; d <= n; ++d) {
    if (!is_forbidden(scores.at(0, d))) root_candidates.push_back(d);
  }
  if (root_candidates.empty()) throw InfeasibleError("every ROOT arc is forbidden");

  Arborescence tree{solve(scores, 0)};
  if (std::count(tree.heads.begin(), tree.heads.end(), 0) == 1) return tree;

  bool have = false;
  Arborescence best;
  double best_score = 0.0;
  for (int d : root_candidates) {
    Arborescence candidate;
    try {
      candidate.heads = solve(scores, d);
    } catch (const InfeasibleError&) {
      continue;
    }
    const double s = tree_score(scores, candidate);
    if (!have || s > best_score || (s == best_score && candidate.heads < best.heads)) {
      best = std::move(candidate);
      best_score = s;
      have = true;
    }
  }
  if (!have) throw InfeasibleError("no single-root arborescence exists");
  return best;
}

double tree_log_prob(const HeadProbabilities& probs, const Arborescence& tree) {
  if (tree.heads.size() != probs.size()) {
    throw ValidationError("tree has " + std::to_string(tree.heads.size()) +
                          " tokens, distribution has " + std::to_string(probs.size()));
  }
  double total = 0.0;
  for (std::size_t d = 1; d <= tree.heads.size(); ++d) {
    total += std::log(probs.at(static_cast<std::size_t>(tree.heads[d - 1]), d));
  }
  return total;
}

ArcScores log_scores(const HeadProbabilities& probs) {
  const std::size_t n = probs.size();
  ArcScores out(n);
  for (std::size_t h = 0; h <= n; ++h) {
    for (std::size_t d = 1; d <= n; ++d) {
      if (h == d) continue;
      const double p = probs.at(h, d);
      out.at(h, d) = p > 0.0 ? std::log(p) : kForbiddenScore;
    }
  }
  return out;
}

double log_partition(const ArcScores& scores) {
  const std::size_t n = scores.size();
  std::vector<double> shift(n + 1, 0.0);
  for (std::size_t d = 1; d <= n; ++d) {
    bool any = false;
    double top = 0.0;
    for (std::size_t h = 0; h <= n; ++h) {
      if (h == d || is_forbidden(scores.at(h, d))) continue;
      if (!any || scores.at(h, d) > top) top = scores.at(h, d);
      any = true;
    }
    if (!any) throw NumericalError("token " + std::to_string(d) + " has no admissible head");
    shift[d] = top;
  }
  auto weight = [&](std::size_t h, std::size_t d) {
    const double s = scores.at(h, d);
    return is_forbidden(s) ? 0.0 : std::exp(s - shift[d]);
  };

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t d = 1; d <= n; ++d) {
    double incoming = 0.0;
    for (std::size_t h = 1; h <= n; ++h) {
      if (h == d) continue;
      const double a = weight(h, d);
      lap(h - 1, d - 1) = -a;
      incoming += a;
    }
    lap(d - 1, d - 1) = incoming;
  }
  for (std::size_t d = 1; d <= n; ++d) lap(0, d - 1) = weight(0, d);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lap);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  double sign = lu.permutationP().determinant();
  double log_abs = 0.0;
  bool singular = false;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double u = packed(i, i);
    if (u == 0.0 || !std::isfinite(u)) {
      singular = true;
      break;
    }
    if (u < 0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  if (singular || sign <= 0) {
    std::ostringstream msg;
    msg << "Matrix-Tree Laplacian determinant is not positive (n=" << n
        << ", reciprocal condition estimate " << lu.rcond() << ")";
    throw NumericalError(msg.str());
  }
  double total_shift = 0.0;
  for (std::size_t d = 1; d <= n; ++d) total_shift += shift[d];
  return log_abs + total_shift;
}

}  // namespace mlal
