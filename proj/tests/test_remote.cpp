#include <gtest/gtest.h>

#include "test_util.hpp"

namespace hubsearch {
namespace {

using testing::random_vector;
using testing::toy_vocab;

TEST(Remote, InfoAndVocabularyPassThrough) {
  MiniMetric local(toy_vocab(30), 5, 64, 8);
  MetricServer server(local);
  server.start();
  RemoteBackend remote(server.url());
  EXPECT_EQ(remote.info().dim, 64u);
  EXPECT_EQ(remote.info().name, local.info().name);
  EXPECT_TRUE(remote.info().supports_gradient);
  EXPECT_EQ(remote.vocab().tokens(), local.vocab().tokens());
}

TEST(Remote, LoopbackIsBitExact) {
  MiniMetric local(toy_vocab(12), 42, 16, 8);
  MetricServer server(local);
  server.start();
  RemoteBackend remote(server.url());

  Rng r(3);
  for (int k = 0; k < 20; ++k) {
    auto ids = testing::random_ids(r, local.vocab(), 1 + r.below(8));
    EXPECT_EQ(remote.embed(ids), local.embed(ids));
    auto x = random_vector(r, 16), h = random_vector(r, 16), y = random_vector(r, 16);
    EXPECT_EQ(remote.score(x, h, y), local.score(x, h, y));
    EXPECT_EQ(remote.grad_hyp(x, h, y), local.grad_hyp(x, h, y));
    EXPECT_EQ(remote.detokenize(ids), local.detokenize(ids));
  }
  std::vector<std::vector<double>> store;
  for (int k = 0; k < 15; ++k) store.push_back(random_vector(r, 16));
  std::vector<ScoreTriple> triples;
  for (int k = 0; k < 5; ++k) triples.push_back({store[3 * k], store[3 * k + 1], store[3 * k + 2]});
  EXPECT_EQ(remote.score_batch(triples), local.score_batch(triples));
}

TEST(Remote, LocalSearchThroughLoopbackMatchesInProcess) {
  MiniMetric local(toy_vocab(8), 1, 8, 8);
  MetricServer server(local);
  server.start();
  RemoteBackend remote(server.url());
  auto tune = testing::toy_dataset(local, 3, 2);
  auto init = make_sequence({4, 5, 6}, local.vocab());
  SearchConfig cfg;
  cfg.chunk_size = 3;
  auto a = local_search(init, tune, local, cfg);
  auto b = local_search(init, tune, remote, cfg);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.trace.replacements, b.trace.replacements);
}

/// Claims [0, 1] but reports 1.5.
class OutOfRange final : public MetricBackend {
 public:
  explicit OutOfRange(const MiniMetric& inner) : inner_(inner) {}
  const BackendInfo& info() const override { return inner_.info(); }
  const Vocabulary& vocab() const override { return inner_.vocab(); }
  Embedding embed(std::span<const TokenId> ids) const override { return inner_.embed(ids); }
  double score(std::span<const double>, std::span<const double>, std::span<const double>) const override { return 1.5; }

 private:
  const MiniMetric& inner_;
};

TEST(Remote, ScoreOutsideDeclaredRangeIsAnError) {
  MiniMetric local(toy_vocab(6), 1, 8, 4);
  OutOfRange bad(local);
  MetricServer server(bad);
  server.start();
  RemoteBackend remote(server.url());
  std::vector<double> v(8, 0.1);
  try {
    remote.score(v, v, v);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_STREQ(e.what(), "score out of declared range");
  }
}

/// No gradient support: /grad answers 404.
class NoGrad final : public MetricBackend {
 public:
  explicit NoGrad(const MiniMetric& inner) : inner_(inner), info_(inner.info()) { info_.supports_gradient = false; }
  const BackendInfo& info() const override { return info_; }
  const Vocabulary& vocab() const override { return inner_.vocab(); }
  Embedding embed(std::span<const TokenId> ids) const override { return inner_.embed(ids); }
  double score(std::span<const double> a, std::span<const double> b, std::span<const double> c) const override {
    return inner_.score(a, b, c);
  }

 private:
  const MiniMetric& inner_;
  BackendInfo info_;
};

TEST(Remote, GradientUnsupported) {
  MiniMetric local(toy_vocab(6), 1, 8, 4);
  NoGrad ng(local);
  MetricServer server(ng);
  server.start();
  RemoteBackend remote(server.url());
  EXPECT_FALSE(remote.info().supports_gradient);
  std::vector<double> v(8, 0.1);
  EXPECT_THROW(remote.grad_hyp(v, v, v), BackendError);

  httplib::Client raw(server.url());
  auto res = raw.Post("/grad", R"({"src":[0],"hyp":[0],"ref":[0]})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  auto tune = testing::toy_dataset(local, 1, 2);
  OptimizerConfig cfg;
  cfg.steps = 1;
  try {
    train_hub(tune, remote, cfg);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find(local.info().name), std::string::npos);
  }
}

TEST(Remote, ServerErrorsCarryTheMessage) {
  MiniMetric local(toy_vocab(6), 1, 8, 4);
  MetricServer server(local);
  server.start();
  RemoteBackend remote(server.url());
  try {
    remote.embed(std::vector<TokenId>{1000});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid token id 1000"), std::string::npos);
  }
}

TEST(Remote, ConnectionFailureAndVersionMismatch) {
  EXPECT_THROW(RemoteBackend("http://127.0.0.1:1"), BackendError);

  httplib::Server fake;
  fake.Get("/info", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"name":"x","dim":4,"vocab_size":5,"supports_gradient":false,"score_range":[0,1],"protocol_version":2})",
                    "application/json");
  });
  const int port = fake.bind_to_any_port("127.0.0.1");
  std::thread t([&] { fake.listen_after_bind(); });
  fake.wait_until_ready();
  try {
    RemoteBackend("http://127.0.0.1:" + std::to_string(port));
    ADD_FAILURE() << "expected a protocol mismatch";
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("protocol version mismatch"), std::string::npos);
  }
  fake.stop();
  t.join();
}

TEST(Remote, VocabularyPaging) {
  MiniMetric local(toy_vocab(9000), 1, 4, 2);
  MetricServer server(local);
  server.start();
  RemoteBackend remote(server.url());
  EXPECT_EQ(remote.vocab().size(), 9004u);
  EXPECT_EQ(remote.vocab().surface(9003), local.vocab().surface(9003));
}

}  // namespace
}  // namespace hubsearch
