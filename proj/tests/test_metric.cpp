#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace hubsearch {
namespace {

using testing::random_vector;
using testing::toy_vocab;

TEST(Embed, SingleTokenClosedForm) {
  auto v = toy_vocab(6);
  auto p = MiniMetricParams::generate(3, v.size(), 8, 4);
  std::fill(p.encoder_matrix.begin(), p.encoder_matrix.end(), 0.0);
  for (std::size_t i = 0; i < 8; ++i) p.encoder_matrix[i * 8 + i] = 1.0;
  MiniMetric m(v, p);
  const TokenId t = 7;
  auto e = m.embed(std::vector<TokenId>{t});
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_NEAR(e[k], std::tanh(1.0841470984807897 * p.token_embeddings[t * 8 + k]), 1e-15);
  }
}

TEST(Embed, PositionSensitive) {
  MiniMetric m(toy_vocab(6), 5, 8, 4);
  auto a = m.embed(std::vector<TokenId>{4, 5});
  auto b = m.embed(std::vector<TokenId>{5, 4});
  EXPECT_NE(a, b);
}

TEST(Embed, DeterministicAcrossInstances) {
  MiniMetric a(toy_vocab(10), 99, 16, 8);
  MiniMetric b(toy_vocab(10), 99, 16, 8);
  const std::vector<TokenId> ids{4, 9, 6, 6, 13};
  EXPECT_EQ(a.embed(ids), b.embed(ids));  // bit-identical
  EXPECT_THROW(a.embed(std::vector<TokenId>{4, 77}), BackendError);
  EXPECT_THROW(a.embed(std::vector<TokenId>{}), BackendError);
}

// Values from tests/oracles/score_oracle.py (straight-line forward pass).
TEST(Score, MatchesScriptedOracle) {
  MiniMetric m(toy_vocab(6), 42, 8, 4);
  Rng r(7);
  auto x = random_vector(r, 8);
  auto h = random_vector(r, 8);
  auto y = random_vector(r, 8);
  EXPECT_NEAR(m.score(x, h, y), 0.52175463618191198, 1e-12);
}

TEST(Score, ZeroFeaturesReduceToBiases) {
  MiniMetric m(toy_vocab(6), 42, 8, 4);
  const std::vector<double> z(8, 0.0);
  const auto& p = m.params();
  double acc = p.head_out_bias;
  for (std::size_t j = 0; j < 4; ++j) acc += p.head_out[j] * std::tanh(p.head_hidden_bias[j]);
  const double expected = 1.0 / (1.0 + std::exp(-acc));
  EXPECT_NEAR(m.score(z, z, z), expected, 1e-15);
  EXPECT_NEAR(m.score(z, z, z), 0.51778045834086572, 1e-12);
}

TEST(Score, StrictlyInsideUnitInterval) {
  MiniMetric m(toy_vocab(6), 1, 16, 8);
  Rng r(3);
  for (int k = 0; k < 200; ++k) {
    const double scale = k % 2 ? 1.0 : 1e3;
    auto x = random_vector(r, 16, -scale, scale);
    auto h = random_vector(r, 16, -scale, scale);
    auto y = random_vector(r, 16, -scale, scale);
    const double s = m.score(x, h, y);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(Score, DimensionMismatch) {
  MiniMetric m(toy_vocab(6), 1, 8, 4);
  std::vector<double> a(8), b(7);
  EXPECT_THROW(m.score(a, b, a), BackendError);
  EXPECT_THROW(m.grad_hyp(a, a, b), BackendError);
}

TEST(Score, BatchEqualsSingles) {
  MiniMetric m(toy_vocab(6), 8, 16, 8);
  Rng r(5);
  std::vector<std::vector<double>> store;
  for (int k = 0; k < 30; ++k) store.push_back(random_vector(r, 16));
  std::vector<ScoreTriple> triples;
  for (int k = 0; k < 10; ++k) triples.push_back({store[3 * k], store[3 * k + 1], store[3 * k + 2]});
  auto batch = m.score_batch(triples);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(batch[k], m.score(triples[k].src, triples[k].hyp, triples[k].ref));
}

/// Central differences, step 1e-4. Draws are resampled until every
/// |h_i - x_i| and |h_i - y_i| exceeds 4 steps: the difference quotient is
/// not a derivative estimate across the kinks of |.|.
double fd_max_relative_error(const MiniMetric& m, std::uint64_t seed) {
  const std::size_t d = m.info().dim;
  Rng r(seed);
  std::vector<double> x, h, y;
  for (;;) {
    x = random_vector(r, d);
    h = random_vector(r, d);
    y = random_vector(r, d);
    bool clear = true;
    for (std::size_t i = 0; i < d; ++i) clear = clear && std::abs(h[i] - x[i]) > 4e-4 && std::abs(h[i] - y[i]) > 4e-4;
    if (clear) break;
  }
  const auto g = m.grad_hyp(x, h, y);
  const double step = 1e-4;
  double max_abs_err = 0.0, max_ref = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    auto hp = h, hm = h;
    hp[i] += step;
    hm[i] -= step;
    const double fd = (m.score(x, hp, y) - m.score(x, hm, y)) / (2 * step);
    max_abs_err = std::max(max_abs_err, std::abs(fd - g[i]));
    max_ref = std::max(max_ref, std::abs(fd));
  }
  return max_abs_err / max_ref;
}

TEST(Grad, MatchesFiniteDifferences) {
  for (std::size_t d : {8u, 64u}) {
    MiniMetric m(toy_vocab(6), 17 + d, d, 32);
    for (std::uint64_t s = 0; s < 100; ++s) {
      EXPECT_LE(fd_max_relative_error(m, 1000 + s), 1e-4) << "D=" << d << " draw " << s;
    }
  }
}

TEST(Grad, AbsFeatureSilentAtTie) {
  auto v = toy_vocab(6);
  auto p = MiniMetricParams::generate(4, v.size(), 8, 4);
  auto q = p;
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 8; ++i) q.head_hidden[j * 56 + 3 * 8 + i] += 5.0;
  }
  MiniMetric a(v, p), b(v, q);
  Rng r(2);
  auto x = random_vector(r, 8);
  auto y = random_vector(r, 8);
  auto h = x;  // e_h == e_x exactly
  EXPECT_EQ(a.score(x, h, y), b.score(x, h, y));
  EXPECT_EQ(a.grad_hyp(x, h, y), b.grad_hyp(x, h, y));
}

TEST(Grad, FiniteForExtremeInputs) {
  MiniMetric m(toy_vocab(6), 9, 16, 8);
  Rng r(1);
  for (int k = 0; k < 20; ++k) {
    auto g = m.grad_hyp(random_vector(r, 16, -1e3, 1e3), random_vector(r, 16, -1e3, 1e3),
                        random_vector(r, 16, -1e3, 1e3));
    EXPECT_TRUE(all_finite(g));
  }
}

TEST(Grad, SumOfPerCaseGradientsMatchesFiniteDifferenceOfSum) {
  MiniMetric m(toy_vocab(10), 21, 8, 8);
  auto data = testing::toy_dataset(m, 4, 5);
  Rng r(12);
  auto h = random_vector(r, 8, -0.5, 0.5);
  Embedding g(8, 0.0);
  for (const auto& c : data.cases) {
    auto gc = m.grad_hyp(*c.source_embedding, h, *c.reference_embedding);
    for (std::size_t i = 0; i < 8; ++i) g[i] += gc[i];
  }
  for (std::size_t i = 0; i < 8; ++i) {
    auto hp = h, hm = h;
    hp[i] += 1e-5;
    hm[i] -= 1e-5;
    const double fd = (summed_score(hp, data, m) - summed_score(hm, data, m)) / 2e-5;
    EXPECT_NEAR(g[i], fd, 1e-7);
  }
}

TEST(ScoreHypothesis, CachedAndUncachedAgree) {
  MiniMetric m(toy_vocab(10), 6, 16, 8);
  auto data = testing::toy_dataset(m, 9, 4);
  auto uncached = data;
  for (auto& c : uncached.cases) {
    c.source_embedding.reset();
    c.reference_embedding.reset();
  }
  const auto h = make_sequence({5, 6, 7}, m.vocab());
  for (std::size_t k = 0; k < data.size(); ++k) {
    EXPECT_EQ(score_hypothesis(h, data.cases[k], m), score_hypothesis(h, uncached.cases[k], m));
  }
}

TEST(ScoreHypothesis, ReferenceIsNotTheMaximum) {
  MiniMetric m(toy_vocab(10), 13, 8, 8);
  auto data = testing::toy_dataset(m, 21, 1);
  const auto& c = data.cases[0];
  const double ref_score = score_hypothesis(c.reference, c, m);
  // Token replacement starting from the reference itself finds something better.
  auto r = local_search(c.reference, data, m, SearchConfig{});
  const bool beaten = r.objective > ref_score;
  EXPECT_TRUE(beaten) << "no replacement improved on the reference";
}

TEST(ScoreHypothesis, DatasetMeanIsOrderedArithmeticMean) {
  MiniMetric m(toy_vocab(10), 6, 16, 8);
  auto data = testing::toy_dataset(m, 2, 7);
  const auto h = make_sequence({8, 9}, m.vocab());
  double sum = 0.0;
  for (const auto& c : data.cases) sum += score_hypothesis(h, c, m);
  const auto eh = m.embed(h.ids);
  EXPECT_EQ(summed_score(eh, data, m), sum);
}

}  // namespace
}  // namespace hubsearch
