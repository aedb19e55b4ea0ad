#pragma once

// Client for metric servers speaking the JSON wire protocol.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/protocol.hpp"

namespace hubsearch {

class RemoteBackend final : public MetricBackend {
 public:
  /// Connects to `endpoint` ("http://host:port"), reads /info and pages the
  /// vocabulary. Throws BackendError on connection or protocol failures.
  explicit RemoteBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {
    info_ = protocol::info_from_json(get("/info"));
    std::vector<std::string> tokens;
    tokens.reserve(info_.vocab_size);
    while (tokens.size() < info_.vocab_size) {
      auto page = get("/vocab?offset=" + std::to_string(tokens.size()) +
                      "&limit=" + std::to_string(protocol::kVocabPageSize));
      try {
        if (page.at("offset").get<std::size_t>() != tokens.size()) {
          throw BackendError("vocabulary page offset mismatch");
        }
        const auto& got = page.at("tokens");
        if (got.empty()) throw BackendError("vocabulary ended early at " + std::to_string(tokens.size()));
        for (const auto& t : got) tokens.push_back(t.get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed /vocab response: ") + e.what());
      }
    }
    if (tokens.size() != info_.vocab_size) {
      throw BackendError("server sent " + std::to_string(tokens.size()) + " vocabulary entries, /info declares " +
                         std::to_string(info_.vocab_size));
    }
    try {
      vocab_ = Vocabulary(std::move(tokens));
    } catch (const CorpusError& e) {
      throw BackendError(std::string("server vocabulary rejected: ") + e.what());
    }
  }

  const BackendInfo& info() const override { return info_; }
  const Vocabulary& vocab() const override { return vocab_; }
  const std::string& endpoint() const noexcept { return endpoint_; }

  Embedding embed(std::span<const TokenId> ids) const override {
    std::vector<std::vector<TokenId>> one{std::vector<TokenId>(ids.begin(), ids.end())};
    return embed_batch(one).at(0);
  }

  std::vector<Embedding> embed_batch(std::span<const std::vector<TokenId>> batch) const override {
    if (batch.empty()) return {};
    nlohmann::json body{{"token_ids", nlohmann::json::array()}};
    for (const auto& ids : batch) body["token_ids"].push_back(ids);
    auto resp = post("/embed", body);
    std::vector<Embedding> out;
    try {
      out = resp.at("embeddings").get<std::vector<Embedding>>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed /embed response: ") + e.what());
    }
    if (out.size() != batch.size()) throw BackendError("/embed returned the wrong number of embeddings");
    for (const auto& e : out) {
      if (e.size() != info_.dim) throw BackendError("/embed returned an embedding of the wrong dimension");
    }
    return out;
  }

  double score(std::span<const double> src, std::span<const double> hyp,
               std::span<const double> ref) const override {
    const ScoreTriple t{src, hyp, ref};
    return score_batch(std::span(&t, 1)).at(0);
  }

  std::vector<double> score_batch(std::span<const ScoreTriple> triples) const override {
    if (triples.empty()) return {};
    nlohmann::json body{{"triples", nlohmann::json::array()}};
    for (const auto& t : triples) {
      check_dims(info_.dim, t.src, t.hyp, t.ref);
      body["triples"].push_back(protocol::triple_to_json(t));
    }
    auto resp = post("/score_batch", body);
    std::vector<double> scores;
    try {
      scores = resp.at("scores").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed /score_batch response: ") + e.what());
    }
    if (scores.size() != triples.size()) throw BackendError("/score_batch returned the wrong number of scores");
    for (double s : scores) {
      if (!(s >= info_.score_lo && s <= info_.score_hi)) throw BackendError("score out of declared range");
    }
    return scores;
  }

  Embedding grad_hyp(std::span<const double> src, std::span<const double> hyp,
                     std::span<const double> ref) const override {
    if (!info_.supports_gradient) {
      throw BackendError("backend " + info_.name + " does not support gradients");
    }
    check_dims(info_.dim, src, hyp, ref);
    auto resp = post("/grad", protocol::triple_to_json(ScoreTriple{src, hyp, ref}));
    try {
      auto g = resp.at("grad").get<Embedding>();
      if (g.size() != info_.dim) throw BackendError("/grad returned a gradient of the wrong dimension");
      return g;
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed /grad response: ") + e.what());
    }
  }

  std::string detokenize(std::span<const TokenId> ids) const override {
    auto resp = post("/detokenize", nlohmann::json{{"token_ids", std::vector<TokenId>(ids.begin(), ids.end())}});
    try {
      return resp.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed /detokenize response: ") + e.what());
    }
  }

 private:
  // One client per request: httplib::Client is not meant to be shared across
  // threads, and the protocol is stateless.
  std::unique_ptr<httplib::Client> client() const {
    auto c = std::make_unique<httplib::Client>(endpoint_);
    c->set_connection_timeout(10);
    c->set_read_timeout(600);
    c->set_write_timeout(600);
    return c;
  }

  nlohmann::json handle(const httplib::Result& res, const std::string& path) const {
    if (!res) {
      throw BackendError("cannot reach metric server " + endpoint_ + path + ": " + httplib::to_string(res.error()));
    }
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (res->status < 200 || res->status >= 300) {
      std::string msg = body.is_object() && body.contains("error") && body["error"].is_string()
                            ? body["error"].get<std::string>()
                            : res->body;
      throw BackendError("metric server error " + std::to_string(res->status) + " on " + path + ": " + msg);
    }
    if (body.is_discarded()) throw BackendError("metric server sent non-JSON body on " + path);
    return body;
  }

  nlohmann::json get(const std::string& path) const { return handle(client()->Get(path), path); }

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    auto base = path.substr(0, path.find('?'));
    return handle(client()->Post(path, body.dump(), "application/json"), base);
  }

  std::string endpoint_;
  BackendInfo info_;
  Vocabulary vocab_;
};

}  // namespace hubsearch
