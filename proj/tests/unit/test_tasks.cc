#include <doctest.h>

#include <random>

#include "mlal/error.h"
#include "mlal/tasks.h"
#include "oracles.h"

using namespace mlal;
using Tags = std::vector<std::string>;

namespace {

DepTree tree(std::vector<int> heads, std::vector<std::string> labels) {
  DepTree t;
  t.tokens.assign(heads.size(), "w");
  t.upos.assign(heads.size(), "X");
  t.heads = std::move(heads);
  t.labels = std::move(labels);
  return t;
}

SpanScores score_one(const Tags& pred, const Tags& gold) {
  const std::vector<Tags> p{pred}, g{gold};
  return span_f1(p, g);
}

}  // namespace

TEST_SUITE("tasks") {
  TEST_CASE("accuracy") {
    const Tags a{"pos", "neg", "pos"};
    CHECK(accuracy(a, a) == 1.0);
    CHECK(accuracy(Tags{"pos", "neg"}, Tags{"neg", "pos"}) == 0.0);
    CHECK(accuracy(Tags{"a", "b", "c", "d"}, Tags{"a", "b", "c", "x"}) == 0.75);
    CHECK_THROWS_AS(accuracy(Tags{"a"}, Tags{"a", "b"}), EvaluationError);
  }

  TEST_CASE("span f1 examples") {
    const Tags gold{"B-PER", "I-PER", "O", "B-LOC"};
    const auto same = score_one(gold, gold);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f1 == 1.0);

    const auto half = score_one(Tags{"B-PER", "I-PER", "O", "O"}, gold);
    CHECK(half.precision == 1.0);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto repaired = score_one(Tags{"O", "I-PER", "I-PER"}, Tags{"O", "B-PER", "I-PER"});
    CHECK(repaired.f1 == 1.0);
    CHECK(repaired.true_positives == 1);

    const std::vector<Tags> one{Tags{"O"}};
    const std::vector<Tags> two{Tags{"O", "O"}};
    CHECK_THROWS_AS(span_f1(one, two), EvaluationError);
    CHECK_THROWS_AS(extract_spans(Tags{"PER"}), EvaluationError);
  }

  TEST_CASE("span extraction agrees with an independent chunker") {
    std::mt19937_64 rng(3);
    const Tags vocab{"O", "B-PER", "I-PER", "B-LOC", "I-LOC"};
    for (int trial = 0; trial < 500; ++trial) {
      Tags tags(1 + rng() % 8);
      for (auto& t : tags) t = vocab[rng() % vocab.size()];
      const auto spans = extract_spans(tags);
      const auto expected = oracle::chunks(tags);
      REQUIRE(spans.size() == expected.size());
      for (std::size_t i = 0; i < spans.size(); ++i) {
        CHECK(spans[i].type == expected[i].type);
        CHECK(spans[i].begin == expected[i].begin);
        CHECK(spans[i].end == expected[i].end);
      }
      // repairing stray I- tags never loses a span: every I- run yields one
      Tags strict = tags;
      for (std::size_t i = 0; i < strict.size(); ++i) {
        if (strict[i][0] == 'I' && (i == 0 || strict[i - 1].substr(1) != strict[i].substr(1))) strict[i] = "O";
      }
      CHECK(extract_spans(strict).size() <= spans.size());
    }
  }

  TEST_CASE("attachment scores") {
    const std::vector<DepTree> gold{tree({2, 0, 2}, {"det", "root", "obj"}), tree({0, 1}, {"root", "obj"})};
    CHECK(attachment_scores(gold, gold).uas == 1.0);
    CHECK(attachment_scores(gold, gold).las == 1.0);

    const std::vector<DepTree> g2{tree({0, 1}, {"root", "obj"})};
    const std::vector<DepTree> p2{tree({0, 1}, {"root", "x"})};
    CHECK(attachment_scores(p2, g2).uas == 1.0);
    CHECK(attachment_scores(p2, g2).las == 0.5);

    // 4 of 5 heads right, 3 of those labeled right
    const std::vector<DepTree> pred{tree({2, 0, 1}, {"det", "root", "obj"}), tree({0, 1}, {"root", "x"})};
    const auto s = attachment_scores(pred, gold);
    CHECK(s.uas == 0.8);
    CHECK(s.las == 0.6);
    CHECK(s.tokens == 5);

    const std::vector<DepTree> short_pred{tree({0, 1}, {"root", "obj"}), tree({0, 1}, {"root", "obj"})};
    CHECK_THROWS_AS(attachment_scores(short_pred, gold), EvaluationError);
  }

  TEST_CASE("las never exceeds uas") {
    std::mt19937_64 rng(5);
    const Tags labels{"a", "b", "c"};
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<DepTree> pred, gold;
      for (int s = 0; s < 3; ++s) {
        const int n = 1 + static_cast<int>(rng() % 5);
        std::vector<int> hp(n), hg(n);
        Tags lp(n), lg(n);
        for (int i = 0; i < n; ++i) {
          hp[i] = static_cast<int>(rng() % (n + 1));
          hg[i] = static_cast<int>(rng() % (n + 1));
          lp[i] = labels[rng() % 3];
          lg[i] = labels[rng() % 3];
        }
        pred.push_back(tree(hp, lp));
        gold.push_back(tree(hg, lg));
      }
      const auto s = attachment_scores(pred, gold);
      CHECK(s.las <= s.uas);
      CHECK(s.correct_labeled <= s.correct_heads);
    }
  }

  TEST_CASE("micro average recomputes from counts") {
    MetricReport r;
    r.task = TaskKind::kSequenceTagging;
    r.languages[LanguageTag("en")] = metrics_from_counts(r.task, {{"tp", 3}, {"pred", 4}, {"gold", 6}});
    r.languages[LanguageTag("de")] = metrics_from_counts(r.task, {{"tp", 1}, {"pred", 5}, {"gold", 2}});
    const auto micro = r.micro();
    CHECK(micro.values.at("precision") == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(micro.values.at("recall") == doctest::Approx(4.0 / 8.0).epsilon(1e-12));
    CHECK(micro.counts.at("tp") == 4);
    const auto en = r.languages.at(LanguageTag("en"));
    CHECK(en.values.at("f1") == doctest::Approx(2 * 0.75 * 0.5 / 1.25).epsilon(1e-12));
  }

  TEST_CASE("metrics are invariant to sentence order") {
    std::mt19937_64 rng(9);
    const Tags vocab{"O", "B-X", "I-X", "B-Y"};
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Tags> pred, gold;
      for (int s = 0; s < 5; ++s) {
        Tags p(1 + rng() % 6), g;
        for (auto& t : p) t = vocab[rng() % 4];
        for (std::size_t i = 0; i < p.size(); ++i) g.push_back(vocab[rng() % 4]);
        pred.push_back(p);
        gold.push_back(g);
      }
      const auto a = span_f1(pred, gold);
      std::reverse(pred.begin(), pred.end());
      std::reverse(gold.begin(), gold.end());
      const auto b = span_f1(pred, gold);
      CHECK(a.f1 == b.f1);
      CHECK(a.true_positives == b.true_positives);
    }
  }
}
