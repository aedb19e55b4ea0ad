#pragma once

// Hub training: gradient ascent on the mean tuning score over the hub
// embedding alone, with decoupled-weight-decay Adam.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/parallel.hpp"

namespace hubsearch {

struct OptimizerConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  std::size_t steps = 10000;

  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a finite non-negative number");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
    if (steps < 1) throw ConfigError("steps must be at least 1");
  }
};

struct HubTrainState {
  Embedding hub_embedding;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step = 0;
  /// Mean tuning score before the first step and after every step.
  std::vector<double> objective_history;

  static HubTrainState start(Embedding init) {
    HubTrainState s;
    s.first_moment.assign(init.size(), 0.0);
    s.second_moment.assign(init.size(), 0.0);
    s.hub_embedding = std::move(init);
    return s;
  }
};

/// Componentwise mean of the reference embeddings, summed in case order.
inline Embedding init_hub_embedding(const Dataset& tune, const MetricBackend& backend) {
  if (tune.empty()) throw TrainingError("cannot initialise the hub embedding from an empty tuning set");
  Embedding sum(backend.info().dim, 0.0);
  for (const auto& c : tune.cases) {
    const Embedding e = c.reference_embedding ? *c.reference_embedding : backend.embed(c.reference.ids);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += e[k];
  }
  const double n = static_cast<double>(tune.size());
  for (auto& v : sum) v /= n;
  return sum;
}

/// One AdamW update that ascends `ascent_gradient` (descent on -gradient):
///   g = -gradient, t = step + 1
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   theta = theta (1 - lr wd) - lr mhat / (sqrt(vhat) + eps)
inline HubTrainState adamw_step(HubTrainState state, std::span<const double> ascent_gradient,
                                const OptimizerConfig& cfg) {
  const std::size_t d = state.hub_embedding.size();
  if (ascent_gradient.size() != d) {
    throw TrainingError("gradient has dimension " + std::to_string(ascent_gradient.size()) + ", expected " +
                        std::to_string(d));
  }
  if (!all_finite(ascent_gradient)) {
    throw TrainingError("non-finite gradient at step " + std::to_string(state.step + 1));
  }
  const double t = static_cast<double>(state.step + 1);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - cfg.lr * cfg.weight_decay;
  for (std::size_t k = 0; k < d; ++k) {
    const double g = -ascent_gradient[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    state.hub_embedding[k] = state.hub_embedding[k] * decay - cfg.lr * (m_hat / (std::sqrt(v_hat) + cfg.epsilon));
  }
  state.step += 1;
  return state;
}

/// Mean tuning score and its gradient w.r.t. the hub embedding. Per-case work
/// may run on the pool; the reduction is in case order.
inline std::pair<double, Embedding> mean_score_and_grad(std::span<const double> hub, const Dataset& tune,
                                                        const MetricBackend& backend, WorkerPool* pool) {
  const std::size_t n = tune.size();
  std::vector<double> scores(n);
  std::vector<Embedding> grads(n);
  auto work = [&](std::size_t k) {
    const auto& c = tune.cases[k];
    scores[k] = backend.score(*c.source_embedding, hub, *c.reference_embedding);
    grads[k] = backend.grad_hyp(*c.source_embedding, hub, *c.reference_embedding);
  };
  if (pool) {
    pool->run(n, work);
  } else {
    for (std::size_t k = 0; k < n; ++k) work(k);
  }
  double total = 0.0;
  Embedding g(hub.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    total += scores[k];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += grads[k][i];
  }
  const double dn = static_cast<double>(n);
  for (auto& v : g) v /= dn;
  return {total / dn, std::move(g)};
}

inline double mean_score(std::span<const double> hub, const Dataset& tune, const MetricBackend& backend) {
  return summed_score(hub, tune, backend) / static_cast<double>(tune.size());
}

/// Runs cfg.steps AdamW steps from the mean-of-references initialisation
/// (or from `init` when given).
inline HubTrainState train_hub(const Dataset& tune, const MetricBackend& backend, const OptimizerConfig& cfg,
                               WorkerPool* pool = nullptr, const Embedding* init = nullptr) {
  cfg.validate();
  if (!backend.info().supports_gradient) {
    throw TrainingError("backend " + backend.info().name + " does not support gradients; hub training needs /grad");
  }
  if (tune.empty()) throw TrainingError("hub training needs a non-empty tuning set");
  for (const auto& c : tune.cases) {
    if (!c.source_embedding || !c.reference_embedding) {
      throw TrainingError("tuning set embeddings must be cached before hub training");
    }
  }
  HubTrainState state = HubTrainState::start(init ? *init : init_hub_embedding(tune, backend));
  state.objective_history.reserve(cfg.steps + 1);
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    auto [objective, grad] = mean_score_and_grad(state.hub_embedding, tune, backend, pool);
    if (!std::isfinite(objective)) throw TrainingError("non-finite objective at step " + std::to_string(s));
    state.objective_history.push_back(objective);
    state = adamw_step(std::move(state), grad, cfg);
  }
  const double final_objective = mean_score(state.hub_embedding, tune, backend);
  if (!std::isfinite(final_objective)) throw TrainingError("non-finite final objective");
  state.objective_history.push_back(final_objective);
  return state;
}

inline nlohmann::json checkpoint_to_json(const HubTrainState& state, std::uint64_t seed, const std::string& backend) {
  return nlohmann::json{{"dim", state.hub_embedding.size()},
                        {"step", state.step},
                        {"embedding", state.hub_embedding},
                        {"objective_history", state.objective_history},
                        {"seed", seed},
                        {"backend", backend}};
}

inline HubTrainState checkpoint_from_json(const nlohmann::json& j) {
  try {
    HubTrainState s = HubTrainState::start(j.at("embedding").get<Embedding>());
    s.step = j.at("step").get<std::size_t>();
    s.objective_history = j.at("objective_history").get<std::vector<double>>();
    if (j.at("dim").get<std::size_t>() != s.hub_embedding.size()) {
      throw TrainingError("checkpoint dim does not match its embedding length");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw TrainingError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace hubsearch
