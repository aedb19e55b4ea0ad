#pragma once

// Hub decoding: approximate inversion of the sentence encoder by seeded
// stochastic beam search in embedding distance, then selection of the
// hypothesis with the highest summed tuning score.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/parallel.hpp"
#include "hubsearch/rng.hpp"

namespace hubsearch {

struct InverterConfig {
  std::size_t num_hypotheses = 1024;
  std::size_t beam_width = 8;
  std::size_t max_length = 24;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// Restrict extensions to the first K regular ids.
  std::optional<std::size_t> vocab_limit;

  void validate() const {
    if (num_hypotheses < 1) throw ConfigError("num_hypotheses must be at least 1");
    if (beam_width < 1) throw ConfigError("beam_width must be at least 1");
    if (max_length < 1) throw ConfigError("max_length must be at least 1");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  }
};

struct HypothesisSet {
  std::vector<TokenSequence> hypotheses;
  /// ||f(h) - target||_2, parallel to `hypotheses`.
  std::vector<double> distances;
  /// Set when fewer than num_hypotheses unique sequences could be produced.
  bool truncated = false;

  std::size_t size() const noexcept { return hypotheses.size(); }
};

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Left-to-right stochastic beam search.
///
/// Every step extends each live beam by every allowed token and measures the
/// distance of the extension's embedding to `target`. All extensions join the
/// candidate pool; the next beams are `beam_width` extensions drawn without
/// replacement with probability proportional to exp(-distance / temperature).
/// The emitted set is the `num_hypotheses` closest pool members (ties keep
/// generation order), so the search itself never depends on the budget.
inline HypothesisSet invert_embedding(std::span<const double> target, const MetricBackend& backend,
                                      const InverterConfig& cfg, WorkerPool* pool = nullptr) {
  cfg.validate();
  if (target.size() != backend.info().dim) {
    throw InversionError("target has dimension " + std::to_string(target.size()) + ", backend dim is " +
                         std::to_string(backend.info().dim));
  }
  const auto& vocab = backend.vocab();
  const std::vector<TokenId> tokens = vocab.regular_ids(cfg.vocab_limit);
  if (tokens.empty()) throw InversionError("no regular tokens available for inversion");

  Rng rng(cfg.seed);
  std::vector<std::vector<TokenId>> beams{{}};
  std::vector<std::vector<TokenId>> pool_seqs;
  std::vector<double> pool_dist;

  for (std::size_t len = 1; len <= cfg.max_length && !beams.empty(); ++len) {
    std::vector<std::vector<TokenId>> ext;
    ext.reserve(beams.size() * tokens.size());
    for (const auto& b : beams) {
      for (TokenId v : tokens) {
        auto s = b;
        s.push_back(v);
        ext.push_back(std::move(s));
      }
    }
    std::vector<double> dist(ext.size());
    auto measure = [&](std::size_t k) {
      const Embedding e = backend.embed(ext[k]);
      dist[k] = l2_distance(e, target);
    };
    if (pool) {
      pool->run(ext.size(), measure);
    } else {
      for (std::size_t k = 0; k < ext.size(); ++k) measure(k);
    }
    for (std::size_t k = 0; k < ext.size(); ++k) {
      if (!std::isfinite(dist[k])) throw InversionError("non-finite embedding distance during inversion");
    }

    // Sequential weighted sampling without replacement, one rng draw per pick.
    std::vector<std::vector<TokenId>> next;
    std::vector<char> taken(ext.size(), 0);
    const std::size_t picks = std::min(cfg.beam_width, ext.size());
    for (std::size_t p = 0; p < picks; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < ext.size(); ++k) {
        if (!taken[k]) best = std::min(best, dist[k]);
      }
      std::vector<double> w(ext.size(), 0.0);
      double total = 0.0;
      for (std::size_t k = 0; k < ext.size(); ++k) {
        if (taken[k]) continue;
        w[k] = std::exp(-(dist[k] - best) / cfg.temperature);
        total += w[k];
      }
      const double u = rng.uniform() * total;
      double acc = 0.0;
      std::size_t chosen = ext.size();
      for (std::size_t k = 0; k < ext.size(); ++k) {
        if (taken[k] || w[k] == 0.0) continue;
        acc += w[k];
        chosen = k;
        if (u < acc) break;
      }
      taken[chosen] = 1;
      next.push_back(ext[chosen]);
    }

    for (std::size_t k = 0; k < ext.size(); ++k) {
      pool_seqs.push_back(std::move(ext[k]));
      pool_dist.push_back(dist[k]);
    }
    // Beams are distinct, so every pool sequence is unique. Keep only the
    // closest num_hypotheses; older entries precede newer ones on ties.
    if (pool_seqs.size() > cfg.num_hypotheses) {
      std::vector<std::size_t> order(pool_seqs.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return pool_dist[a] < pool_dist[b]; });
      order.resize(cfg.num_hypotheses);
      std::sort(order.begin(), order.end());
      std::vector<std::vector<TokenId>> kept_seqs;
      std::vector<double> kept_dist;
      for (std::size_t k : order) {
        kept_seqs.push_back(std::move(pool_seqs[k]));
        kept_dist.push_back(pool_dist[k]);
      }
      pool_seqs = std::move(kept_seqs);
      pool_dist = std::move(kept_dist);
    }
    beams = std::move(next);
  }

  std::vector<std::size_t> order(pool_seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool_dist[a] < pool_dist[b]; });

  HypothesisSet out;
  for (std::size_t k : order) {
    out.hypotheses.push_back(make_sequence(pool_seqs[k], vocab));
    out.distances.push_back(pool_dist[k]);
  }
  out.truncated = out.size() < cfg.num_hypotheses;
  return out;
}

struct Selection {
  std::size_t index = 0;
  /// Summed tuning score of every hypothesis, in set order.
  std::vector<double> summed_scores;
};

/// argmax over hypotheses of the summed tuning score; ties go to the lowest index.
inline Selection select_best(const HypothesisSet& hyps, const Dataset& tune, const MetricBackend& backend,
                             WorkerPool* pool = nullptr) {
  if (hyps.hypotheses.empty()) throw InversionError("cannot select from an empty hypothesis set");
  if (tune.empty()) throw InversionError("cannot select against an empty tuning set");
  for (const auto& c : tune.cases) {
    if (!c.source_embedding || !c.reference_embedding) {
      throw InversionError("tuning set embeddings must be cached before selection");
    }
  }
  Selection sel;
  sel.summed_scores.resize(hyps.size());
  auto work = [&](std::size_t k) {
    const Embedding eh = backend.embed(hyps.hypotheses[k].ids);
    sel.summed_scores[k] = summed_score(eh, tune, backend);
  };
  if (pool) {
    pool->run(hyps.size(), work);
  } else {
    for (std::size_t k = 0; k < hyps.size(); ++k) work(k);
  }
  for (std::size_t k = 1; k < hyps.size(); ++k) {
    if (sel.summed_scores[k] > sel.summed_scores[sel.index]) sel.index = k;
  }
  return sel;
}

}  // namespace hubsearch
