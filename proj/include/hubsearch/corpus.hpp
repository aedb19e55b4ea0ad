#pragma once

// Vocabulary, tokenization and parallel-data loading.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hubsearch/error.hpp"

namespace hubsearch {

using TokenId = std::int32_t;

/// Reserved ids: the first four vocabulary lines are always these, in order.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kBosId = 2;
inline constexpr TokenId kEosId = 3;
inline constexpr std::size_t kNumSpecial = 4;

/// Byte offsets of the Unicode scalar values of a UTF-8 string, plus a
/// terminating entry at text.size(). A malformed byte counts as one character.
inline std::vector<std::size_t> utf8_boundaries(std::string_view text) {
  std::vector<std::size_t> out;
  out.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    out.push_back(i);
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) len = 4;
    else if (lead >= 0xE0) len = lead < 0xF0 ? 3 : 1;
    else if (lead >= 0xC0) len = 2;
    if (len > 1) {
      if (i + len > text.size()) {
        len = 1;
      } else {
        for (std::size_t k = 1; k < len; ++k) {
          if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
            len = 1;
            break;
          }
        }
      }
    }
    i += len;
  }
  out.push_back(text.size());
  return out;
}

class Vocabulary {
 public:
  Vocabulary() = default;

  /// `tokens[0..3]` must be the pad/unk/bos/eos surfaces.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() <= kNumSpecial) {
      throw CorpusError("vocabulary needs the 4 special tokens plus at least one regular token, got " +
                        std::to_string(tokens_.size()) + " entries");
    }
    index_.reserve(tokens_.size());
    for (std::size_t id = 0; id < tokens_.size(); ++id) {
      const std::string& t = tokens_[id];
      if (t.empty()) throw CorpusError("vocabulary entry " + std::to_string(id) + " is empty");
      if (!index_.emplace(t, static_cast<TokenId>(id)).second) {
        throw CorpusError("duplicate vocabulary entry '" + t + "' at id " + std::to_string(id));
      }
      if (id >= kNumSpecial) {
        max_chars_ = std::max(max_chars_, utf8_boundaries(t).size() - 1);
      }
    }
  }

  /// One surface per line; line number (0-based) is the token id.
  static Vocabulary from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open vocabulary file " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      tokens.push_back(line);
    }
    try {
      return Vocabulary(std::move(tokens));
    } catch (const CorpusError& e) {
      throw CorpusError(path + ": " + e.what());
    }
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool valid(TokenId id) const noexcept { return id >= 0 && static_cast<std::size_t>(id) < tokens_.size(); }
  static constexpr bool is_special(TokenId id) noexcept { return id >= 0 && id < static_cast<TokenId>(kNumSpecial); }

  const std::string& surface(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// Id of a regular (non-special) token surface.
  std::optional<TokenId> find(std::string_view surface) const {
    auto it = index_.find(std::string(surface));
    if (it == index_.end() || is_special(it->second)) return std::nullopt;
    return it->second;
  }

  /// Longest regular token, in Unicode scalar values.
  std::size_t max_token_chars() const noexcept { return max_chars_; }

  /// Regular ids in id order, optionally truncated to the first `limit`.
  std::vector<TokenId> regular_ids(std::optional<std::size_t> limit = std::nullopt) const {
    std::size_t n = tokens_.size() - kNumSpecial;
    if (limit) n = std::min(n, *limit);
    std::vector<TokenId> ids(n);
    for (std::size_t k = 0; k < n; ++k) ids[k] = static_cast<TokenId>(k + kNumSpecial);
    return ids;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_chars_ = 0;
};

/// Concatenation of surfaces; special tokens render as nothing.
inline std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (!vocab.valid(id)) throw CorpusError("invalid token id " + std::to_string(id));
    if (!Vocabulary::is_special(id)) out += vocab.surface(id);
  }
  return out;
}

struct TokenSequence {
  std::vector<TokenId> ids;
  std::string surface;

  std::size_t size() const noexcept { return ids.size(); }
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Builds a sequence from ids, deriving the surface. Empty input becomes [eos].
inline TokenSequence make_sequence(std::vector<TokenId> ids, const Vocabulary& vocab) {
  if (ids.empty()) ids.push_back(kEosId);
  std::string surface = detokenize(ids, vocab);
  return TokenSequence{std::move(ids), std::move(surface)};
}

/// Greedy longest match over regular token surfaces at Unicode scalar
/// boundaries. Each character no token covers becomes one unk.
inline TokenSequence tokenize(std::string_view text, const Vocabulary& vocab) {
  if (text.empty()) return make_sequence({kEosId}, vocab);
  const auto bounds = utf8_boundaries(text);
  const std::size_t nchars = bounds.size() - 1;
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < nchars) {
    std::size_t span = std::min(vocab.max_token_chars(), nchars - pos);
    bool matched = false;
    for (; span >= 1; --span) {
      auto piece = text.substr(bounds[pos], bounds[pos + span] - bounds[pos]);
      if (auto id = vocab.find(piece)) {
        ids.push_back(*id);
        pos += span;
        matched = true;
        break;
      }
    }
    if (!matched) {
      ids.push_back(kUnkId);
      ++pos;
    }
  }
  return make_sequence(std::move(ids), vocab);
}

using Embedding = std::vector<double>;

struct EvalCase {
  std::string id;
  std::string source_text;
  std::string reference_text;
  TokenSequence source;
  TokenSequence reference;
  std::optional<Embedding> source_embedding;
  std::optional<Embedding> reference_embedding;
};

struct Dataset {
  std::string name;
  std::vector<EvalCase> cases;

  std::size_t size() const noexcept { return cases.size(); }
  bool empty() const noexcept { return cases.empty(); }
};

namespace detail {

inline std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

/// Reads a JSONL file as objects. Throws CorpusError naming the line number.
inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path);
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw CorpusError(path + ": line " + std::to_string(lineno) + ": malformed JSON");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CorpusError(path + ": empty file");
  return rows;
}

inline std::string string_field(const nlohmann::json& row, const char* key, std::size_t lineno) {
  auto it = row.find(key);
  if (it == row.end()) throw CorpusError("line " + std::to_string(lineno) + ": missing field " + key);
  if (!it->is_string()) throw CorpusError("line " + std::to_string(lineno) + ": field " + key + " is not a string");
  return it->get<std::string>();
}

}  // namespace detail

/// JSONL with string fields "src" and "ref" (optional "id"); order preserved.
inline Dataset load_parallel(const std::string& path, const Vocabulary& vocab) {
  auto rows = detail::read_jsonl(path);
  Dataset ds;
  ds.name = detail::file_stem(path);
  ds.cases.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    EvalCase c;
    c.source_text = detail::string_field(row, "src", k + 1);
    c.reference_text = detail::string_field(row, "ref", k + 1);
    if (row.contains("id")) c.id = detail::string_field(row, "id", k + 1);
    c.source = tokenize(c.source_text, vocab);
    c.reference = tokenize(c.reference_text, vocab);
    ds.cases.push_back(std::move(c));
  }
  return ds;
}

struct BaselineHypothesis {
  std::string id;
  std::string hyp;
};

/// JSONL with field "hyp" (optional "id"), aligned to a dataset by line order.
inline std::vector<BaselineHypothesis> load_baselines(const std::string& path) {
  auto rows = detail::read_jsonl(path);
  std::vector<BaselineHypothesis> out;
  out.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    BaselineHypothesis b;
    b.hyp = detail::string_field(rows[k], "hyp", k + 1);
    if (rows[k].contains("id")) b.id = detail::string_field(rows[k], "id", k + 1);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace hubsearch
