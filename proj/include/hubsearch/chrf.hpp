#pragma once

// Sentence-level chrF: character n-gram F-score, n = 1..6, beta = 2,
// whitespace removed, per-order F averaged uniformly over the orders for
// which the reference has at least one n-gram.

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hubsearch/corpus.hpp"

namespace hubsearch {

struct ChrfParams {
  std::size_t max_order = 6;
  double beta = 2.0;
};

namespace detail {

/// Unicode scalars of `text` with ASCII whitespace dropped.
inline std::vector<std::string_view> chrf_chars(std::string_view text) {
  const auto b = utf8_boundaries(text);
  std::vector<std::string_view> out;
  out.reserve(b.size());
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    auto c = text.substr(b[k], b[k + 1] - b[k]);
    if (c.size() == 1 && (c[0] == ' ' || c[0] == '\t' || c[0] == '\n' || c[0] == '\r' ||
                          c[0] == '\v' || c[0] == '\f')) {
      continue;
    }
    out.push_back(c);
  }
  return out;
}

inline std::map<std::string, std::size_t> char_ngrams(const std::vector<std::string_view>& chars,
                                                      std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (chars.size() < n) return counts;
  for (std::size_t i = 0; i + n <= chars.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) key += chars[i + k];
    ++counts[key];
  }
  return counts;
}

}  // namespace detail

/// chrF in [0, 100].
inline double chrf(std::string_view hypothesis, std::string_view reference, const ChrfParams& p = {}) {
  const auto hyp = detail::chrf_chars(hypothesis);
  const auto ref = detail::chrf_chars(reference);
  if (hyp.empty() || ref.empty()) return 0.0;
  const double beta2 = p.beta * p.beta;
  double total = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= p.max_order; ++n) {
    const auto ref_ngrams = detail::char_ngrams(ref, n);
    if (ref_ngrams.empty()) continue;
    ++orders;
    const auto hyp_ngrams = detail::char_ngrams(hyp, n);
    if (hyp_ngrams.empty()) continue;
    std::size_t hyp_total = 0, ref_total = 0, matches = 0;
    for (const auto& [g, c] : hyp_ngrams) {
      hyp_total += c;
      auto it = ref_ngrams.find(g);
      if (it != ref_ngrams.end()) matches += std::min(c, it->second);
    }
    for (const auto& [g, c] : ref_ngrams) ref_total += c;
    const double prec = static_cast<double>(matches) / static_cast<double>(hyp_total);
    const double rec = static_cast<double>(matches) / static_cast<double>(ref_total);
    if (prec + rec > 0.0) total += (1.0 + beta2) * prec * rec / (beta2 * prec + rec);
  }
  if (orders == 0) return 0.0;
  return 100.0 * total / static_cast<double>(orders);
}

}  // namespace hubsearch
