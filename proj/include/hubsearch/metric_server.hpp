#pragma once

// Serves any MetricBackend over the JSON wire protocol. Used as the in-process
// loopback stub for conformance tests and by `hubsearch serve-builtin`.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "hubsearch/metric.hpp"
#include "hubsearch/protocol.hpp"

namespace hubsearch {

class MetricServer {
 public:
  explicit MetricServer(const MetricBackend& backend) : backend_(backend) { install_routes(); }

  MetricServer(const MetricServer&) = delete;
  MetricServer& operator=(const MetricServer&) = delete;

  ~MetricServer() { stop(); }

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw BackendError("cannot bind metric server to " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Serves on the calling thread until stopped.
  void listen(const std::string& host, int port) {
    if (!server_.listen(host, port)) throw BackendError("cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  using json = nlohmann::json;

  static void reply(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <class Fn>
  void route_post(const std::string& path, Fn fn) {
    server_.Post(path, [fn](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) return reply(res, protocol::error_body("request body is not JSON"), 400);
      try {
        reply(res, fn(body));
      } catch (const json::exception& e) {
        reply(res, protocol::error_body(std::string("bad request: ") + e.what()), 400);
      } catch (const std::exception& e) {
        reply(res, protocol::error_body(e.what()), 500);
      }
    });
  }

  static std::vector<double> vec(const json& j) { return j.get<std::vector<double>>(); }

  void install_routes() {
    server_.Get("/info", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, protocol::info_to_json(backend_.info()));
    });
    server_.Get("/vocab", [this](const httplib::Request& req, httplib::Response& res) {
      const auto& tokens = backend_.vocab().tokens();
      std::size_t offset = 0, limit = protocol::kVocabPageSize;
      try {
        if (req.has_param("offset")) offset = std::stoull(req.get_param_value("offset"));
        if (req.has_param("limit")) limit = std::stoull(req.get_param_value("limit"));
      } catch (const std::exception&) {
        return reply(res, protocol::error_body("offset and limit must be integers"), 400);
      }
      json page{{"offset", offset}, {"tokens", json::array()}};
      for (std::size_t k = offset; k < tokens.size() && k < offset + limit; ++k) page["tokens"].push_back(tokens[k]);
      reply(res, page);
    });
    route_post("/embed", [this](const json& body) {
      auto batch = body.at("token_ids").get<std::vector<std::vector<TokenId>>>();
      return json{{"embeddings", backend_.embed_batch(batch)}};
    });
    route_post("/score_batch", [this](const json& body) {
      const auto& arr = body.at("triples");
      std::vector<std::vector<double>> store;
      store.reserve(arr.size() * 3);
      for (const auto& t : arr) {
        store.push_back(vec(t.at("src")));
        store.push_back(vec(t.at("hyp")));
        store.push_back(vec(t.at("ref")));
      }
      std::vector<ScoreTriple> triples;
      for (std::size_t k = 0; k < arr.size(); ++k) {
        triples.push_back({store[3 * k], store[3 * k + 1], store[3 * k + 2]});
      }
      return json{{"scores", backend_.score_batch(triples)}};
    });
    server_.Post("/grad", [this](const httplib::Request& req, httplib::Response& res) {
      if (!backend_.info().supports_gradient) {
        return reply(res, protocol::error_body("backend does not support gradients"), 404);
      }
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) return reply(res, protocol::error_body("request body is not JSON"), 400);
      try {
        auto g = backend_.grad_hyp(vec(body.at("src")), vec(body.at("hyp")), vec(body.at("ref")));
        reply(res, json{{"grad", g}});
      } catch (const json::exception& e) {
        reply(res, protocol::error_body(std::string("bad request: ") + e.what()), 400);
      } catch (const std::exception& e) {
        reply(res, protocol::error_body(e.what()), 500);
      }
    });
    route_post("/detokenize", [this](const json& body) {
      auto ids = body.at("token_ids").get<std::vector<TokenId>>();
      return json{{"text", backend_.detokenize(ids)}};
    });
  }

  const MetricBackend& backend_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace hubsearch
