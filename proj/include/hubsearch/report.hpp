#pragma once

// Evaluation of fixed hypotheses and the tables/exports built from it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hubsearch/chrf.hpp"
#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/parallel.hpp"

namespace hubsearch {

inline constexpr const char* kSdDefinition = "population standard deviation (divisor n)";

struct CaseScore {
  std::size_t index = 0;
  std::string id;
  double score = 0.0;  // raw backend score
  double chrf = 0.0;
};

struct SearchReport {
  std::string series;
  std::string hypothesis;  // surface; "<per-case>" for baseline reports
  std::string dataset;
  std::string backend;
  std::vector<CaseScore> per_case;
  double mean = 0.0;
  double sd = 0.0;
  double chrf_mean = 0.0;

  double mean_pct() const { return 100.0 * mean; }
  double sd_pct() const { return 100.0 * sd; }
};

/// Mean and population SD, two-pass, in order.
inline std::pair<double, double> mean_and_sd(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

namespace detail {

inline void finalize(SearchReport& r) {
  std::vector<double> s, c;
  for (const auto& pc : r.per_case) {
    s.push_back(pc.score);
    c.push_back(pc.chrf);
  }
  std::tie(r.mean, r.sd) = mean_and_sd(s);
  r.chrf_mean = mean_and_sd(c).first;
}

inline void require_nonempty(const Dataset& data) {
  if (data.empty()) throw ReportError("cannot evaluate on empty dataset '" + data.name + "'");
}

}  // namespace detail

/// Scores every case of `data` against the same hypothesis.
inline SearchReport evaluate_hypothesis(const TokenSequence& h, const std::string& surface, const Dataset& data,
                                        const MetricBackend& backend, WorkerPool* pool = nullptr) {
  detail::require_nonempty(data);
  SearchReport r;
  r.series = data.name;
  r.hypothesis = surface;
  r.dataset = data.name;
  r.backend = backend.info().name;
  r.per_case.resize(data.size());
  Embedding eh;
  try {
    eh = backend.embed(h.ids);
  } catch (const Error& e) {
    throw ReportError(std::string("embedding the hypothesis: ") + e.what());
  }
  auto work = [&](std::size_t k) {
    const auto& c = data.cases[k];
    auto& pc = r.per_case[k];
    pc.index = k;
    pc.id = c.id;
    try {
      const Embedding ex = c.source_embedding ? *c.source_embedding : backend.embed(c.source.ids);
      const Embedding ey = c.reference_embedding ? *c.reference_embedding : backend.embed(c.reference.ids);
      pc.score = backend.score(ex, eh, ey);
    } catch (const Error& e) {
      throw ReportError("case " + std::to_string(k) + ": " + e.what());
    }
    pc.chrf = chrf(surface, c.reference_text);
  };
  if (pool) {
    pool->run(data.size(), work);
  } else {
    for (std::size_t k = 0; k < data.size(); ++k) work(k);
  }
  detail::finalize(r);
  return r;
}

inline SearchReport evaluate_hypothesis(const TokenSequence& h, const Dataset& data, const MetricBackend& backend,
                                        WorkerPool* pool = nullptr) {
  return evaluate_hypothesis(h, h.surface, data, backend, pool);
}

/// Free text is tokenized with the backend's vocabulary; chrF uses the text as given.
inline SearchReport evaluate_hypothesis(const std::string& text, const Dataset& data, const MetricBackend& backend,
                                        WorkerPool* pool = nullptr) {
  return evaluate_hypothesis(tokenize(text, backend.vocab()), text, data, backend, pool);
}

/// Each case is scored with its own aligned baseline hypothesis.
inline SearchReport evaluate_baselines(const std::vector<BaselineHypothesis>& hyps, const Dataset& data,
                                       const MetricBackend& backend, WorkerPool* pool = nullptr) {
  detail::require_nonempty(data);
  if (hyps.size() != data.size()) {
    throw ReportError(std::to_string(data.size()) + " cases, " + std::to_string(hyps.size()) + " hypotheses");
  }
  SearchReport r;
  r.series = data.name + ":baseline";
  r.hypothesis = "<per-case>";
  r.dataset = data.name;
  r.backend = backend.info().name;
  r.per_case.resize(data.size());
  auto work = [&](std::size_t k) {
    const auto& c = data.cases[k];
    auto& pc = r.per_case[k];
    pc.index = k;
    pc.id = c.id;
    try {
      const auto seq = tokenize(hyps[k].hyp, backend.vocab());
      const Embedding eh = backend.embed(seq.ids);
      const Embedding ex = c.source_embedding ? *c.source_embedding : backend.embed(c.source.ids);
      const Embedding ey = c.reference_embedding ? *c.reference_embedding : backend.embed(c.reference.ids);
      pc.score = backend.score(ex, eh, ey);
    } catch (const Error& e) {
      throw ReportError("case " + std::to_string(k) + ": " + e.what());
    }
    pc.chrf = chrf(hyps[k].hyp, c.reference_text);
  };
  if (pool) {
    pool->run(data.size(), work);
  } else {
    for (std::size_t k = 0; k < data.size(); ++k) work(k);
  }
  detail::finalize(r);
  return r;
}

/// evaluate_hypothesis over several datasets, in the given order.
inline std::vector<SearchReport> transfer_eval(const TokenSequence& h, const std::string& surface,
                                               const std::vector<Dataset>& datasets, const MetricBackend& backend,
                                               WorkerPool* pool = nullptr) {
  std::vector<SearchReport> out;
  out.reserve(datasets.size());
  for (const auto& d : datasets) out.push_back(evaluate_hypothesis(h, surface, d, backend, pool));
  return out;
}

struct LeaderboardEntry {
  std::string name;
  double score = 0.0;
  std::size_t rank = 0;
  bool is_hub = false;
};

/// Systems plus the hub, sorted by descending score; the hub goes after any
/// system it ties with.
inline std::vector<LeaderboardEntry> leaderboard_insert(const std::vector<std::pair<std::string, double>>& systems,
                                                        double hub_score, const std::string& hub_name = "Single hub text") {
  std::vector<LeaderboardEntry> rows;
  rows.reserve(systems.size() + 1);
  for (const auto& [name, score] : systems) {
    if (!std::isfinite(score)) throw ReportError("system '" + name + "' has a non-finite score");
    rows.push_back({name, score, 0, false});
  }
  rows.push_back({hub_name, hub_score, 0, true});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const LeaderboardEntry& a, const LeaderboardEntry& b) { return a.score > b.score; });
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].rank = k + 1;
  return rows;
}

inline nlohmann::json leaderboard_to_json(const std::vector<LeaderboardEntry>& rows) {
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"name", r.name}, {"score", r.score}, {"rank", r.rank}, {"is_hub", r.is_hub}});
  }
  return arr;
}

/// Box-plot summary. Quartiles use linear interpolation between order
/// statistics; whiskers extend to the most extreme points within 1.5 IQR of
/// the box, and `min`/`max` are the whisker ends.
struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::vector<double> outliers;
};

inline double quantile_linear(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw ReportError("box statistics of an empty series");
  std::sort(values.begin(), values.end());
  BoxStats b;
  b.q1 = quantile_linear(values, 0.25);
  b.median = quantile_linear(values, 0.5);
  b.q3 = quantile_linear(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.min = b.q1;
  b.max = b.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    } else {
      b.min = std::min(b.min, v);
      b.max = std::max(b.max, v);
    }
  }
  return b;
}

inline nlohmann::json box_to_json(const BoxStats& b) {
  return nlohmann::json{{"min", b.min},       {"q1", b.q1},   {"median", b.median},
                        {"q3", b.q3},         {"max", b.max}, {"outliers", b.outliers},
                        {"quartiles", "linear interpolation"}, {"whiskers", "1.5 IQR"}};
}

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

inline std::string series_name(const SearchReport& r) { return r.series.empty() ? r.dataset : r.series; }

/// Writes per-case scores (score%) as CSV and per-series BoxStats as JSON.
inline void distribution_export(const std::vector<SearchReport>& reports, const std::string& csv_path,
                                const std::string& json_path) {
  if (reports.empty()) throw ReportError("distribution export needs at least one report");
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ReportError("cannot write " + csv_path);
  csv << "series,case_index,score_pct\n";
  auto boxes = nlohmann::json::array();
  for (const auto& r : reports) {
    std::vector<double> pct;
    for (const auto& pc : r.per_case) {
      const double v = 100.0 * pc.score;
      pct.push_back(v);
      csv << series_name(r) << ',' << pc.index << ',' << format_double(v) << '\n';
    }
    auto box = box_to_json(box_stats(pct));
    box["series"] = series_name(r);
    boxes.push_back(std::move(box));
  }
  if (!csv) throw ReportError("write failed: " + csv_path);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ReportError("cannot write " + json_path);
  js << nlohmann::json{{"unit", "score%"}, {"series", boxes}}.dump(2) << '\n';
  if (!js) throw ReportError("write failed: " + json_path);
}

inline nlohmann::json report_to_json(const SearchReport& r) {
  auto cases = nlohmann::json::array();
  for (const auto& pc : r.per_case) {
    cases.push_back({{"index", pc.index}, {"id", pc.id}, {"score", pc.score}, {"chrf", pc.chrf}});
  }
  return nlohmann::json{{"series", series_name(r)},
                        {"hypothesis", r.hypothesis},
                        {"dataset", r.dataset},
                        {"backend", r.backend},
                        {"n", r.per_case.size()},
                        {"mean", r.mean},
                        {"sd", r.sd},
                        {"mean_pct", r.mean_pct()},
                        {"sd_pct", r.sd_pct()},
                        {"chrf_mean", r.chrf_mean},
                        {"sd_definition", kSdDefinition},
                        {"per_case", cases}};
}

}  // namespace hubsearch
