#pragma once

// Builtin miniature COMET-style metric: mean-pooled position-modulated token
// embeddings through a tanh projection, scored by a two-layer estimator head
// over [h; x; y; |h-x|; |h-y|; h*x; h*y].

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hubsearch/corpus.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/rng.hpp"

namespace hubsearch {

inline constexpr std::size_t kFeatureBlocks = 7;

/// Frozen parameters. Matrices are row-major.
struct MiniMetricParams {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;     // D
  std::size_t hidden = 0;  // H
  std::uint64_t seed = 0;
  std::vector<double> token_embeddings;  // |V| x D
  std::vector<double> encoder_matrix;    // D x D
  std::vector<double> head_hidden;       // H x 7D
  std::vector<double> head_hidden_bias;  // H
  std::vector<double> head_out;          // H
  double head_out_bias = 0.0;

  /// Every entry uniform on [-0.1, 0.1], drawn from one SplitMix64 stream in
  /// field order (token_embeddings, encoder_matrix, head_hidden,
  /// head_hidden_bias, head_out, head_out_bias).
  static MiniMetricParams generate(std::uint64_t seed, std::size_t vocab_size, std::size_t dim,
                                   std::size_t hidden) {
    if (dim == 0 || hidden == 0 || vocab_size == 0) {
      throw BackendError("mini metric needs positive vocab size, dim and hidden size");
    }
    MiniMetricParams p;
    p.vocab_size = vocab_size;
    p.dim = dim;
    p.hidden = hidden;
    p.seed = seed;
    Rng rng(seed);
    auto fill = [&](std::vector<double>& v, std::size_t n) {
      v.resize(n);
      for (auto& x : v) x = rng.uniform(-0.1, 0.1);
    };
    fill(p.token_embeddings, vocab_size * dim);
    fill(p.encoder_matrix, dim * dim);
    fill(p.head_hidden, hidden * kFeatureBlocks * dim);
    fill(p.head_hidden_bias, hidden);
    fill(p.head_out, hidden);
    p.head_out_bias = rng.uniform(-0.1, 0.1);
    return p;
  }
};

namespace detail {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

class MiniMetric final : public MetricBackend {
 public:
  MiniMetric(Vocabulary vocab, MiniMetricParams params)
      : vocab_(std::move(vocab)), params_(std::move(params)) {
    if (params_.vocab_size != vocab_.size()) {
      throw BackendError("mini metric parameters cover " + std::to_string(params_.vocab_size) +
                         " tokens but the vocabulary has " + std::to_string(vocab_.size()));
    }
    info_.name = "builtin-mini:" + std::to_string(params_.seed) + ":" + std::to_string(params_.dim) +
                 ":" + std::to_string(params_.hidden);
    info_.dim = params_.dim;
    info_.vocab_size = vocab_.size();
    info_.supports_gradient = true;
    info_.score_lo = 0.0;
    info_.score_hi = 1.0;
  }

  MiniMetric(Vocabulary vocab, std::uint64_t seed, std::size_t dim = 64, std::size_t hidden = 32)
      : MiniMetric(vocab, MiniMetricParams::generate(seed, vocab.size(), dim, hidden)) {}

  const BackendInfo& info() const override { return info_; }
  const Vocabulary& vocab() const override { return vocab_; }
  const MiniMetricParams& params() const noexcept { return params_; }

  /// pooled = (1/L) sum_i (1 + 0.1 sin i) E[t_i], i from 1; out = tanh(W pooled).
  Embedding embed(std::span<const TokenId> ids) const override {
    const std::size_t d = params_.dim;
    if (ids.empty()) throw BackendError("cannot embed an empty token sequence");
    std::vector<double> pooled(d, 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const TokenId t = ids[i];
      if (!vocab_.valid(t)) throw BackendError("invalid token id " + std::to_string(t));
      const double w = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
      const double* row = &params_.token_embeddings[static_cast<std::size_t>(t) * d];
      for (std::size_t k = 0; k < d; ++k) pooled[k] += w * row[k];
    }
    const double len = static_cast<double>(ids.size());
    for (auto& v : pooled) v /= len;
    Embedding out(d);
    for (std::size_t r = 0; r < d; ++r) {
      out[r] = std::tanh(detail::dot(&params_.encoder_matrix[r * d], pooled.data(), d));
    }
    return out;
  }

  double score(std::span<const double> src, std::span<const double> hyp,
               std::span<const double> ref) const override {
    check_dims(params_.dim, src, hyp, ref);
    thread_local std::vector<double> phi;
    build_features(src, hyp, ref, phi);
    const std::size_t width = kFeatureBlocks * params_.dim;
    double z = params_.head_out_bias;
    for (std::size_t j = 0; j < params_.hidden; ++j) {
      const double a = std::tanh(detail::dot(&params_.head_hidden[j * width], phi.data(), width) +
                                 params_.head_hidden_bias[j]);
      z += params_.head_out[j] * a;
    }
    return detail::sigmoid(z);
  }

  /// Backpropagation through the head; the |h - x| feature uses sign(0) = 0.
  Embedding grad_hyp(std::span<const double> src, std::span<const double> hyp,
                     std::span<const double> ref) const override {
    check_dims(params_.dim, src, hyp, ref);
    const std::size_t d = params_.dim;
    const std::size_t width = kFeatureBlocks * d;
    std::vector<double> phi;
    build_features(src, hyp, ref, phi);
    std::vector<double> act(params_.hidden);
    double z = params_.head_out_bias;
    for (std::size_t j = 0; j < params_.hidden; ++j) {
      act[j] = std::tanh(detail::dot(&params_.head_hidden[j * width], phi.data(), width) +
                         params_.head_hidden_bias[j]);
      z += params_.head_out[j] * act[j];
    }
    const double s = detail::sigmoid(z);
    const double ds_dz = s * (1.0 - s);
    std::vector<double> dphi(width, 0.0);
    for (std::size_t j = 0; j < params_.hidden; ++j) {
      const double delta = ds_dz * params_.head_out[j] * (1.0 - act[j] * act[j]);
      const double* row = &params_.head_hidden[j * width];
      for (std::size_t k = 0; k < width; ++k) dphi[k] += delta * row[k];
    }
    Embedding g(d);
    for (std::size_t i = 0; i < d; ++i) {
      g[i] = dphi[i] + dphi[3 * d + i] * detail::sign0(hyp[i] - src[i]) +
             dphi[4 * d + i] * detail::sign0(hyp[i] - ref[i]) + dphi[5 * d + i] * src[i] +
             dphi[6 * d + i] * ref[i];
    }
    return g;
  }

 private:
  void build_features(std::span<const double> x, std::span<const double> h, std::span<const double> y,
                      std::vector<double>& phi) const {
    const std::size_t d = params_.dim;
    phi.resize(kFeatureBlocks * d);
    for (std::size_t i = 0; i < d; ++i) {
      phi[i] = h[i];
      phi[d + i] = x[i];
      phi[2 * d + i] = y[i];
      phi[3 * d + i] = std::abs(h[i] - x[i]);
      phi[4 * d + i] = std::abs(h[i] - y[i]);
      phi[5 * d + i] = h[i] * x[i];
      phi[6 * d + i] = h[i] * y[i];
    }
  }

  Vocabulary vocab_;
  MiniMetricParams params_;
  BackendInfo info_;
};

}  // namespace hubsearch
