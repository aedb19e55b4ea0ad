#pragma once

// JSON wire protocol (HTTP/1.1, JSON bodies) between the engine and metric
// servers. Doubles are written by nlohmann::json in shortest round-trip form
// (at most 17 significant digits), so values survive a round trip bit-exactly.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"

namespace hubsearch::protocol {

using nlohmann::json;

inline constexpr int kVersion = 1;
inline constexpr std::size_t kVocabPageSize = 4096;

inline json info_to_json(const BackendInfo& info) {
  return json{{"name", info.name},
              {"dim", info.dim},
              {"vocab_size", info.vocab_size},
              {"supports_gradient", info.supports_gradient},
              {"score_range", {info.score_lo, info.score_hi}},
              {"deterministic", info.deterministic},
              {"protocol_version", kVersion}};
}

inline BackendInfo info_from_json(const json& j) {
  try {
    if (j.at("protocol_version").get<int>() != kVersion) {
      throw BackendError("protocol version mismatch: server speaks " +
                         std::to_string(j.at("protocol_version").get<int>()) + ", client speaks " +
                         std::to_string(kVersion));
    }
    BackendInfo info;
    info.name = j.at("name").get<std::string>();
    info.dim = j.at("dim").get<std::size_t>();
    info.vocab_size = j.at("vocab_size").get<std::size_t>();
    info.supports_gradient = j.at("supports_gradient").get<bool>();
    const auto& range = j.at("score_range");
    info.score_lo = range.at(0).get<double>();
    info.score_hi = range.at(1).get<double>();
    info.deterministic = j.value("deterministic", true);
    if (info.dim < 1) throw BackendError("server reports dim < 1");
    if (info.vocab_size < 1) throw BackendError("server reports empty vocabulary");
    if (!(info.score_lo < info.score_hi)) throw BackendError("server reports an empty score range");
    return info;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed /info response: ") + e.what());
  }
}

inline json triple_to_json(const ScoreTriple& t) {
  return json{{"src", std::vector<double>(t.src.begin(), t.src.end())},
              {"hyp", std::vector<double>(t.hyp.begin(), t.hyp.end())},
              {"ref", std::vector<double>(t.ref.begin(), t.ref.end())}};
}

inline json error_body(const std::string& message) { return json{{"error", message}}; }

}  // namespace hubsearch::protocol
