#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace hubsearch {
namespace {

using testing::toy_vocab;

TEST(Invert, GreedyRecoversSingleTokenPreimage) {
  MiniMetric m(toy_vocab(12), 3, 16, 8);
  const TokenId t = 9;
  auto target = m.embed(std::vector<TokenId>{t});
  InverterConfig cfg;
  cfg.temperature = 1e-12;
  cfg.beam_width = 1;
  cfg.max_length = 1;
  cfg.num_hypotheses = 4;
  auto set = invert_embedding(target, m, cfg);
  ASSERT_FALSE(set.hypotheses.empty());
  EXPECT_EQ(set.hypotheses[0].ids, std::vector<TokenId>{t});
  EXPECT_EQ(set.distances[0], 0.0);
}

TEST(Invert, BeatsEveryOneTokenSequence) {
  MiniMetric m(toy_vocab(6), 8, 8, 4);  // |V| = 10
  Rng r(5);
  auto target = testing::random_vector(r, 8, -0.2, 0.2);
  InverterConfig cfg;
  cfg.max_length = 2;
  cfg.beam_width = 3;
  cfg.num_hypotheses = 16;
  cfg.seed = 1;
  auto set = invert_embedding(target, m, cfg);
  const double best = *std::min_element(set.distances.begin(), set.distances.end());

  // Brute force over all sequences of length <= 2.
  double best_one = std::numeric_limits<double>::infinity();
  double best_two = std::numeric_limits<double>::infinity();
  for (TokenId a : m.vocab().regular_ids()) {
    const double d1 = l2_distance(m.embed(std::vector<TokenId>{a}), target);
    best_one = std::min(best_one, d1);
    EXPECT_LE(best, d1);
    for (TokenId b : m.vocab().regular_ids()) {
      best_two = std::min(best_two, l2_distance(m.embed(std::vector<TokenId>{a, b}), target));
    }
  }
  EXPECT_LE(best, best_one);
  EXPECT_GE(best, std::min(best_one, best_two));
}

TEST(Invert, DeterministicAndWellFormed) {
  MiniMetric m(toy_vocab(15), 2, 16, 8);
  Rng r(8);
  auto target = testing::random_vector(r, 16, -0.3, 0.3);
  InverterConfig cfg;
  cfg.num_hypotheses = 64;
  cfg.max_length = 6;
  cfg.beam_width = 4;
  cfg.seed = 77;
  auto a = invert_embedding(target, m, cfg);
  WorkerPool pool(3);
  auto b = invert_embedding(target, m, cfg, &pool);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.size(), 64u);
  EXPECT_FALSE(a.truncated);
  std::set<std::vector<TokenId>> seen;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.hypotheses[k], b.hypotheses[k]);
    EXPECT_EQ(a.distances[k], b.distances[k]);
    EXPECT_TRUE(std::isfinite(a.distances[k]));
    EXPECT_GE(a.distances[k], 0.0);
    EXPECT_TRUE(seen.insert(a.hypotheses[k].ids).second);
    for (TokenId id : a.hypotheses[k].ids) EXPECT_FALSE(Vocabulary::is_special(id));
    EXPECT_LE(a.hypotheses[k].size(), 6u);
  }
  cfg.seed = 78;
  auto c = invert_embedding(target, m, cfg);
  bool differs = false;
  for (std::size_t k = 0; k < c.size(); ++k) differs = differs || !(c.hypotheses[k] == a.hypotheses[k]);
  EXPECT_TRUE(differs);
}

TEST(Invert, SmallVocabularyTruncates) {
  MiniMetric m(toy_vocab(3), 2, 8, 4);
  InverterConfig cfg;
  cfg.num_hypotheses = 10;
  cfg.max_length = 1;
  auto set = invert_embedding(std::vector<double>(8, 0.0), m, cfg);
  EXPECT_EQ(set.size(), 3u);
  EXPECT_TRUE(set.truncated);
}

TEST(Invert, DimensionMismatch) {
  MiniMetric m(toy_vocab(3), 2, 8, 4);
  EXPECT_THROW(invert_embedding(std::vector<double>(7, 0.0), m, InverterConfig{}), InversionError);
}

TEST(SelectBest, SingleHypothesis) {
  MiniMetric m(toy_vocab(10), 4, 8, 4);
  auto tune = testing::toy_dataset(m, 1, 3);
  HypothesisSet set;
  set.hypotheses.push_back(make_sequence({5, 6}, m.vocab()));
  set.distances.push_back(0.5);
  EXPECT_EQ(select_best(set, tune, m).index, 0u);
}

TEST(SelectBest, ExhaustiveRescoringConfirmsArgmax) {
  MiniMetric m(toy_vocab(12), 4, 16, 8);
  auto tune = testing::toy_dataset(m, 2, 6);
  Rng r(1);
  auto target = testing::random_vector(r, 16, -0.2, 0.2);
  InverterConfig cfg;
  cfg.num_hypotheses = 40;
  cfg.max_length = 4;
  auto set = invert_embedding(target, m, cfg);
  auto sel = select_best(set, tune, m);
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    double s = 0.0;
    for (const auto& c : tune.cases) s += score_hypothesis(set.hypotheses[k], c, m);
    EXPECT_EQ(s, sel.summed_scores[k]);
    if (s > best) {
      best = s;
      arg = k;
    }
  }
  EXPECT_EQ(sel.index, arg);
  for (double s : sel.summed_scores) EXPECT_LE(s, sel.summed_scores[sel.index]);
}

TEST(SelectBest, TiesGoToLowestIndex) {
  MiniMetric m(toy_vocab(10), 4, 8, 4);
  auto tune = testing::toy_dataset(m, 1, 3);
  HypothesisSet set;
  set.hypotheses = {make_sequence({5}, m.vocab()), make_sequence({7, 8}, m.vocab()), make_sequence({7, 8}, m.vocab())};
  set.distances = {0, 0, 0};
  auto sel = select_best(set, tune, m);
  if (sel.summed_scores[1] > sel.summed_scores[0]) {
    EXPECT_EQ(sel.index, 1u);
  } else {
    EXPECT_EQ(sel.index, 0u);
  }
}

TEST(SelectBest, LargerBudgetNeverHurts) {
  MiniMetric m(toy_vocab(12), 6, 16, 8);
  auto tune = testing::toy_dataset(m, 3, 5);
  Rng r(9);
  auto target = testing::random_vector(r, 16, -0.2, 0.2);
  InverterConfig cfg;
  cfg.max_length = 5;
  cfg.seed = 3;
  double prev = -1.0;
  std::vector<TokenSequence> prev_set;
  for (std::size_t budget : {1u, 4u, 16u, 64u}) {
    cfg.num_hypotheses = budget;
    auto set = invert_embedding(target, m, cfg);
    for (const auto& h : prev_set) {
      EXPECT_NE(std::find(set.hypotheses.begin(), set.hypotheses.end(), h), set.hypotheses.end());
    }
    auto sel = select_best(set, tune, m);
    EXPECT_GE(sel.summed_scores[sel.index], prev);
    prev = sel.summed_scores[sel.index];
    prev_set = set.hypotheses;
  }
}

}  // namespace
}  // namespace hubsearch
