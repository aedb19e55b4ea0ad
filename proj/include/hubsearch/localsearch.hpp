#pragma once

// Local search: per-position single-token replacement hill climbing over the
// summed tuning score, with immediate acceptance inside the vocabulary loop.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/parallel.hpp"

namespace hubsearch {

struct SearchConfig {
  /// Candidates are the first K regular ids when set.
  std::optional<std::size_t> vocab_limit;
  std::size_t max_epochs = 50;
  /// Candidates per scoring batch.
  std::size_t chunk_size = 512;
  bool record_trace = true;

  void validate() const {
    if (chunk_size < 1) throw ConfigError("chunk_size must be at least 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  }
};

struct Replacement {
  std::size_t epoch = 0;
  std::size_t position = 0;
  TokenId old_id = 0;
  TokenId new_id = 0;
  double objective_after = 0.0;

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct SearchTrace {
  double initial_objective = 0.0;
  std::vector<Replacement> replacements;
  std::size_t epochs = 0;
  std::size_t total_candidates_scored = 0;
  /// True when the last epoch changed nothing (as opposed to hitting max_epochs).
  bool converged = false;
};

struct SearchResult {
  TokenSequence text;
  double objective = 0.0;
  SearchTrace trace;
  double wall_seconds = 0.0;
};

namespace detail {

inline void require_cached(const Dataset& tune) {
  if (tune.empty()) throw SearchError("local search needs a non-empty tuning set");
  for (const auto& c : tune.cases) {
    if (!c.source_embedding || !c.reference_embedding) {
      throw SearchError("tuning set embeddings must be cached before local search");
    }
  }
}

}  // namespace detail

/// Summed tuning objective of `h` with `position` replaced by each candidate,
/// in candidate order. Candidates are split into chunks of `chunk_size`; each
/// chunk costs one embed_batch call and one score_batch call of
/// |chunk| x |tune| triples, and chunks run concurrently on `pool`.
inline std::vector<double> score_candidates_batch(std::span<const TokenId> h, std::size_t position,
                                                  std::span<const TokenId> candidates, const Dataset& tune,
                                                  const MetricBackend& backend, std::size_t chunk_size = 512,
                                                  WorkerPool* pool = nullptr) {
  if (position >= h.size()) {
    throw SearchError("position " + std::to_string(position) + " outside hub text of length " +
                      std::to_string(h.size()));
  }
  if (chunk_size < 1) throw ConfigError("chunk_size must be at least 1");
  detail::require_cached(tune);
  const std::size_t n_cases = tune.size();
  std::vector<double> out(candidates.size());
  const std::size_t n_chunks = (candidates.size() + chunk_size - 1) / chunk_size;

  auto run_chunk = [&](std::size_t chunk) {
    const std::size_t begin = chunk * chunk_size;
    const std::size_t end = std::min(candidates.size(), begin + chunk_size);
    std::vector<std::vector<TokenId>> seqs;
    seqs.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      std::vector<TokenId> cur(h.begin(), h.end());
      cur[position] = candidates[k];
      seqs.push_back(std::move(cur));
    }
    std::vector<Embedding> embs;
    try {
      embs = backend.embed_batch(seqs);
    } catch (const Error& e) {
      throw SearchError("embedding candidates " + std::to_string(begin) + ".." + std::to_string(end - 1) +
                        " at position " + std::to_string(position) + ": " + e.what());
    }
    std::vector<ScoreTriple> triples;
    triples.reserve((end - begin) * n_cases);
    for (const auto& e : embs) {
      for (const auto& c : tune.cases) triples.push_back({*c.source_embedding, e, *c.reference_embedding});
    }
    std::vector<double> scores;
    try {
      scores = backend.score_batch(triples);
    } catch (const Error& e) {
      throw SearchError("scoring candidates " + std::to_string(begin) + ".." + std::to_string(end - 1) +
                        " at position " + std::to_string(position) + ": " + e.what());
    }
    for (std::size_t k = begin; k < end; ++k) {
      double total = 0.0;
      const double* row = &scores[(k - begin) * n_cases];
      for (std::size_t n = 0; n < n_cases; ++n) total += row[n];
      if (!std::isfinite(total)) {
        throw SearchError("non-finite score at position " + std::to_string(position) + ", token " +
                          std::to_string(candidates[k]) + " (candidate " + std::to_string(k) + ")");
      }
      out[k] = total;
    }
  };
  if (pool) {
    pool->run(n_chunks, run_chunk);
  } else {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  }
  return out;
}

/// Summed tuning objective of a full token sequence.
inline double tuning_objective(std::span<const TokenId> h, const Dataset& tune, const MetricBackend& backend) {
  detail::require_cached(tune);
  return summed_score(backend.embed(h), tune, backend);
}

/// Refines `h0` by single-token replacements.
///
/// For each epoch, each position i and each candidate v (in id order), the
/// candidate text is the current best with position i set to v; it replaces
/// the best immediately when its summed score is strictly greater. The search
/// stops after an epoch that changed nothing, or after max_epochs.
///
/// Candidate scores for one position are computed in parallel against the
/// best text at the start of the position and then committed by an in-order
/// scan. Accepting v at position i only changes position i, which every later
/// candidate at i overwrites anyway, so those precomputed scores stay valid
/// and the result equals the fully sequential loop.
///
/// The incumbent's own objective is measured once before the first epoch, so
/// a candidate must beat h0 to be accepted.
inline SearchResult local_search(const TokenSequence& h0, const Dataset& tune, const MetricBackend& backend,
                                 const SearchConfig& cfg, WorkerPool* pool = nullptr) {
  cfg.validate();
  if (h0.ids.empty()) throw SearchError("initial hub text must have at least one token");
  detail::require_cached(tune);
  const auto started = std::chrono::steady_clock::now();
  const auto& vocab = backend.vocab();
  for (TokenId id : h0.ids) {
    if (!vocab.valid(id)) throw SearchError("initial hub text has invalid token id " + std::to_string(id));
  }
  const std::vector<TokenId> candidates = vocab.regular_ids(cfg.vocab_limit);

  SearchResult result;
  std::vector<TokenId> best = h0.ids;
  double best_score = tuning_objective(best, tune, backend);
  if (!std::isfinite(best_score)) throw SearchError("non-finite objective for the initial hub text");
  result.trace.initial_objective = best_score;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::vector<TokenId> previous = best;
    for (std::size_t i = 0; i < best.size(); ++i) {
      const auto scores = score_candidates_batch(best, i, candidates, tune, backend, cfg.chunk_size, pool);
      result.trace.total_candidates_scored += candidates.size();
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (scores[k] > best_score) {
          if (cfg.record_trace) {
            result.trace.replacements.push_back({epoch, i, best[i], candidates[k], scores[k]});
          }
          best_score = scores[k];
          best[i] = candidates[k];
        }
      }
    }
    result.trace.epochs = epoch;
    if (best == previous) {
      result.trace.converged = true;
      break;
    }
  }

  result.text = make_sequence(std::move(best), vocab);
  result.objective = best_score;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

inline nlohmann::json replacement_to_json(const Replacement& r) {
  return nlohmann::json{{"epoch", r.epoch},
                        {"position", r.position},
                        {"old_id", r.old_id},
                        {"new_id", r.new_id},
                        {"objective_after", r.objective_after}};
}

}  // namespace hubsearch
