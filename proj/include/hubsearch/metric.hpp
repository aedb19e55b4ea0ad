#pragma once

// The metric-backend contract shared by the builtin and remote metrics.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/parallel.hpp"

namespace hubsearch {

struct BackendInfo {
  std::string name;
  std::size_t dim = 0;
  std::size_t vocab_size = 0;
  bool supports_gradient = false;
  double score_lo = 0.0;
  double score_hi = 1.0;
  /// Whether repeated identical requests are bit-stable.
  bool deterministic = true;
};

/// Non-owning view of one (source, hypothesis, reference) embedding triple.
struct ScoreTriple {
  std::span<const double> src;
  std::span<const double> hyp;
  std::span<const double> ref;
};

/// Scoring oracle S(h; x, y) = s(f(x), f(h), f(y)).
///
/// Implementations must be callable concurrently from many threads.
class MetricBackend {
 public:
  virtual ~MetricBackend() = default;

  virtual const BackendInfo& info() const = 0;
  virtual const Vocabulary& vocab() const = 0;

  /// Sentence encoder f.
  virtual Embedding embed(std::span<const TokenId> ids) const = 0;

  virtual std::vector<Embedding> embed_batch(std::span<const std::vector<TokenId>> batch) const {
    std::vector<Embedding> out;
    out.reserve(batch.size());
    for (const auto& ids : batch) out.push_back(embed(ids));
    return out;
  }

  /// Output layer s.
  virtual double score(std::span<const double> src, std::span<const double> hyp,
                       std::span<const double> ref) const = 0;

  /// Must equal triples.size() calls of score(), in order.
  virtual std::vector<double> score_batch(std::span<const ScoreTriple> triples) const {
    std::vector<double> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back(score(t.src, t.hyp, t.ref));
    return out;
  }

  /// d s / d hyp. Backends without gradient support throw BackendError.
  virtual Embedding grad_hyp(std::span<const double> src, std::span<const double> hyp,
                             std::span<const double> ref) const {
    (void)src, (void)hyp, (void)ref;
    throw BackendError("backend " + info().name + " does not support gradients");
  }

  virtual std::string detokenize(std::span<const TokenId> ids) const {
    return hubsearch::detokenize(ids, vocab());
  }
};

inline void check_dims(std::size_t dim, std::span<const double> a, std::span<const double> b,
                       std::span<const double> c) {
  if (a.size() != dim || b.size() != dim || c.size() != dim) {
    throw BackendError("embedding dimension mismatch: expected " + std::to_string(dim) + ", got " +
                       std::to_string(a.size()) + "/" + std::to_string(b.size()) + "/" +
                       std::to_string(c.size()));
  }
}

/// Fills missing source/reference embeddings. Run before any parallel phase.
inline void cache_embeddings(Dataset& data, const MetricBackend& backend, WorkerPool* pool = nullptr) {
  auto fill = [&](std::size_t k) {
    auto& c = data.cases[k];
    if (!c.source_embedding) c.source_embedding = backend.embed(c.source.ids);
    if (!c.reference_embedding) c.reference_embedding = backend.embed(c.reference.ids);
  };
  if (pool) {
    pool->run(data.size(), fill);
  } else {
    for (std::size_t k = 0; k < data.size(); ++k) fill(k);
  }
}

/// S(h; x, y) for one case, reusing cached embeddings when present.
inline double score_hypothesis(const TokenSequence& h, const EvalCase& c, const MetricBackend& backend) {
  const Embedding eh = backend.embed(h.ids);
  const Embedding ex = c.source_embedding ? *c.source_embedding : backend.embed(c.source.ids);
  const Embedding ey = c.reference_embedding ? *c.reference_embedding : backend.embed(c.reference.ids);
  return backend.score(ex, eh, ey);
}

/// Σ over cases of s(e_x, e_h, e_y), accumulated left to right in case order.
/// Cases must have cached embeddings.
inline double summed_score(std::span<const double> eh, const Dataset& data, const MetricBackend& backend) {
  double total = 0.0;
  for (const auto& c : data.cases) {
    total += backend.score(*c.source_embedding, eh, *c.reference_embedding);
  }
  return total;
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace hubsearch
