#include <doctest.h>

#include <cmath>
#include <random>

#include "mlal/error.h"
#include "mlal/graph.h"
#include "oracles.h"

using namespace mlal;

TEST_SUITE("graph") {
  TEST_CASE("single token") {
    ArcScores s(1);
    s.at(0, 1) = 2.5;
    CHECK(chu_liu_edmonds(s).heads == std::vector<int>{0});
    CHECK(log_partition(s) == doctest::Approx(2.5).epsilon(1e-15));
  }

  TEST_CASE("two tokens") {
    ArcScores s(2);
    s.at(0, 1) = 0;
    s.at(0, 2) = -5;
    s.at(1, 2) = -1;
    s.at(2, 1) = -3;
    const auto t = chu_liu_edmonds(s);
    CHECK(t.heads == std::vector<int>{0, 1});
    CHECK(tree_score(s, t) == -1.0);

    ArcScores zeros(2, 0.0);
    CHECK(log_partition(zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("contraction of a heavy cycle") {
    ArcScores s(3, -1.0);
    s.at(1, 2) = 10;
    s.at(2, 1) = 10;
    s.at(0, 1) = -4;
    s.at(0, 2) = -2;
    s.at(0, 3) = 1;
    s.at(3, 1) = 0.5;
    REQUIRE(oracle::all_trees(3).size() == 9);
    const auto best = oracle::best_tree(s);
    const auto t = chu_liu_edmonds(s);
    CHECK(is_single_root_arborescence(t.heads));
    CHECK(tree_score(s, t) == doctest::Approx(best.score).epsilon(1e-12));
  }

  TEST_CASE("forbidden root arcs") {
    ArcScores s(2, 0.0);
    s.at(0, 1) = -std::numeric_limits<double>::infinity();
    s.at(0, 2) = kForbiddenScore;
    CHECK_THROWS_AS(chu_liu_edmonds(s), InfeasibleError);
  }

  TEST_CASE("single-root constraint with forbidden arcs matches brute force") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 2 + rng() % 3;
      auto s = oracle::random_scores(rng, n);
      for (std::size_t h = 0; h <= n; ++h) {
        for (std::size_t d = 1; d <= n; ++d) {
          if (h != d && rng() % 5 == 0) s.at(h, d) = kForbiddenScore;
        }
      }
      const auto best = oracle::best_tree(s);
      if (best.heads.empty()) {
        CHECK_THROWS_AS(chu_liu_edmonds(s), InfeasibleError);
        continue;
      }
      const auto t = chu_liu_edmonds(s);
      CHECK(is_single_root_arborescence(t.heads));
      CHECK(oracle::relative_error(tree_score(s, t), best.score) < 1e-9);
    }
  }

  TEST_CASE("tree log probability") {
    HeadProbabilities p(2);
    p.at(0, 1) = 1.0;
    p.at(1, 2) = 1.0;
    CHECK(tree_log_prob(p, {{0, 1}}) == 0.0);
    HeadProbabilities half(2);
    half.at(0, 1) = 0.5;
    half.at(2, 1) = 0.5;
    half.at(0, 2) = 0.5;
    half.at(1, 2) = 0.5;
    CHECK(tree_log_prob(half, {{0, 1}}) == doctest::Approx(2 * std::log(0.5)).epsilon(1e-15));
    CHECK(std::isinf(tree_log_prob(p, {{2, 0}})));

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng() % 5;
      const auto probs = oracle::random_probs(rng, n);
      for (const auto& heads : oracle::all_trees(static_cast<int>(n))) {
        double expected = 0.0;
        for (std::size_t d = 1; d <= n; ++d) expected += std::log(probs.at(heads[d - 1], d));
        CHECK(tree_log_prob(probs, {heads}) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("log partition matches enumeration") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng() % 5;
      const auto s = oracle::random_scores(rng, n);
      CHECK(oracle::relative_error(log_partition(s), oracle::log_sum_exp_trees(s)) < 1e-9);
    }
  }

  TEST_CASE("log partition shifts with dependent-wise constants and bounds every tree") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 1 + rng() % 5;
      auto s = oracle::random_scores(rng, n);
      const double base = log_partition(s);
      for (const auto& heads : oracle::all_trees(static_cast<int>(n))) {
        CHECK(oracle::score_of(s, heads) <= base + 1e-9);
      }
      double total_shift = 0.0;
      for (std::size_t d = 1; d <= n; ++d) {
        const double c = g(rng);
        total_shift += c;
        for (std::size_t h = 0; h <= n; ++h) {
          if (h != d) s.at(h, d) += c;
        }
      }
      CHECK(oracle::relative_error(log_partition(s), base + total_shift) < 1e-9);
    }
  }

  TEST_CASE("log scores map zeros to the forbidden value") {
    HeadProbabilities p(2);
    p.at(0, 1) = 1.0;
    p.at(0, 2) = 0.25;
    p.at(1, 2) = 0.75;
    const auto s = log_scores(p);
    CHECK(is_forbidden(s.at(2, 1)));
    CHECK(s.at(1, 2) == doctest::Approx(std::log(0.75)));
  }
}
