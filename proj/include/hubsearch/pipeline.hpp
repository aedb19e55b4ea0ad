#pragma once

// End-to-end orchestration: hub training -> hub decoding -> local search ->
// evaluation, plus each step on its own. Every step reads and writes the
// same artifact files, so running the steps one by one reproduces the
// monolithic pipeline.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hubsearch/corpus.hpp"
#include "hubsearch/error.hpp"
#include "hubsearch/hubtrain.hpp"
#include "hubsearch/inverter.hpp"
#include "hubsearch/localsearch.hpp"
#include "hubsearch/metric.hpp"
#include "hubsearch/mini_metric.hpp"
#include "hubsearch/parallel.hpp"
#include "hubsearch/remote.hpp"
#include "hubsearch/report.hpp"
#include "hubsearch/rng.hpp"

namespace hubsearch {

using nlohmann::json;

struct RunConfig {
  /// "builtin:SEED:D[:H]" or "remote:http://host:port".
  std::string backend = "builtin:42:64:32";
  std::string tune_path;
  std::string test_path;
  std::string vocab_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  OptimizerConfig train;
  InverterConfig invert;
  SearchConfig search;

  // Step inputs. Empty means "the artifact in out_dir".
  std::string checkpoint_path;
  std::string init_path;
  std::string init_text;
  std::string hyp_text;
  std::string hyp_path;
  std::string baselines_path;
  std::vector<std::string> dataset_paths;
  std::string systems_path;
  std::optional<double> hub_score;
  bool export_distribution = true;

  /// Everything that can change a result. Output directory and thread count
  /// are excluded: they never affect artifact contents.
  json fingerprint() const {
    auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"backend", backend},
                {"tune", tune_path},
                {"test", test_path},
                {"vocab", vocab_path},
                {"seed", seed},
                {"train",
                 {{"lr", train.lr},
                  {"beta1", train.beta1},
                  {"beta2", train.beta2},
                  {"epsilon", train.epsilon},
                  {"weight_decay", train.weight_decay},
                  {"steps", train.steps}}},
                {"invert",
                 {{"num_hypotheses", invert.num_hypotheses},
                  {"beam_width", invert.beam_width},
                  {"max_length", invert.max_length},
                  {"temperature", invert.temperature},
                  {"vocab_limit", opt(invert.vocab_limit)}}},
                {"search",
                 {{"vocab_limit", opt(search.vocab_limit)},
                  {"max_epochs", search.max_epochs},
                  {"chunk_size", search.chunk_size}}}};
  }

  std::string config_hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(fingerprint().dump())));
    return buf;
  }

  std::filesystem::path out(const std::string& file) const { return std::filesystem::path(out_dir) / file; }
};

/// Parses a backend spec. The builtin metric needs a vocabulary.
inline std::unique_ptr<MetricBackend> make_backend(const std::string& spec, std::optional<Vocabulary> vocab) {
  if (spec.rfind("builtin:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(8));
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() < 2 || parts.size() > 3) {
      throw ConfigError("builtin backend spec must be builtin:SEED:D[:H], got '" + spec + "'");
    }
    std::uint64_t seed = 0;
    std::size_t dim = 0, hidden = 32;
    try {
      seed = std::stoull(parts[0]);
      dim = std::stoull(parts[1]);
      if (parts.size() == 3) hidden = std::stoull(parts[2]);
    } catch (const std::exception&) {
      throw ConfigError("builtin backend spec has a non-numeric field: '" + spec + "'");
    }
    if (dim < 1 || hidden < 1) throw ConfigError("builtin backend needs D >= 1 and H >= 1");
    if (!vocab) throw ConfigError("the builtin backend needs --vocab");
    return std::make_unique<MiniMetric>(std::move(*vocab), seed, dim, hidden);
  }
  if (spec.rfind("remote:", 0) == 0) {
    return std::make_unique<RemoteBackend>(spec.substr(7));
  }
  throw ConfigError("unknown backend spec '" + spec + "' (expected builtin:SEED:D[:H] or remote:URL)");
}

inline std::unique_ptr<MetricBackend> make_backend(const std::string& spec, const std::string& vocab_path) {
  std::optional<Vocabulary> vocab;
  if (!vocab_path.empty() && spec.rfind("builtin:", 0) == 0) vocab = Vocabulary::from_file(vocab_path);
  return make_backend(spec, std::move(vocab));
}

namespace detail {

/// Runs one stage; any failure other than a config error is reported as that stage's.
template <class Fn>
auto run_stage(Stage stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.stage() == stage) throw;
    throw Error(stage, std::string(stage_name(stage)) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(stage, std::string(stage_name(stage)) + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text, Stage stage) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(stage, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(stage, "write failed: " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j, Stage stage) {
  write_text(path, j.dump(2) + "\n", stage);
}

inline json read_json(const std::filesystem::path& path, Stage stage, const std::string& hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(stage, "missing " + path.string() + "; " + hint);
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(stage, "malformed JSON in " + path.string());
  return j;
}

inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

inline std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace detail

/// Loaded inputs shared by the steps.
struct Session {
  RunConfig cfg;
  std::unique_ptr<MetricBackend> backend;
  std::unique_ptr<WorkerPool> pool;
  std::optional<Dataset> tune;
  std::optional<Dataset> test;

  explicit Session(RunConfig c) : cfg(std::move(c)) {
    cfg.train.validate();
    cfg.invert.validate();
    cfg.search.validate();
    if (cfg.threads < 1) throw ConfigError("--threads must be at least 1");
    cfg.invert.seed = substream_seed(cfg.seed, "invert");
    std::optional<Vocabulary> vocab;
    if (!cfg.vocab_path.empty() && cfg.backend.rfind("builtin:", 0) == 0) {
      vocab = detail::run_stage(Stage::corpus, [&] { return Vocabulary::from_file(cfg.vocab_path); });
    }
    backend = detail::run_stage(Stage::backend, [&] { return make_backend(cfg.backend, std::move(vocab)); });
    pool = std::make_unique<WorkerPool>(cfg.threads);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  }

  Dataset load(const std::string& path, const char* flag) {
    if (path.empty()) throw ConfigError(std::string("missing ") + flag);
    Dataset d = detail::run_stage(Stage::corpus, [&] {
      try {
        return load_parallel(path, backend->vocab());
      } catch (const CorpusError& e) {
        std::string msg = e.what();
        if (msg.rfind(path, 0) != 0) msg = path + ": " + msg;
        throw CorpusError(msg);
      }
    });
    detail::run_stage(Stage::backend, [&] {
      cache_embeddings(d, *backend, pool.get());
      return 0;
    });
    return d;
  }

  Dataset& tune_set() {
    if (!tune) tune = load(cfg.tune_path, "--tune");
    return *tune;
  }
  Dataset& test_set() {
    if (!test) test = load(cfg.test_path, "--test");
    return *test;
  }

  json provenance() const { return json{{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}}; }
};

inline json sequence_json(const TokenSequence& s) { return json{{"ids", s.ids}, {"surface", s.surface}}; }

// ---- step 1 ---------------------------------------------------------------

inline HubTrainState step_hub_train(Session& s) {
  auto& tune = s.tune_set();
  auto state = detail::run_stage(Stage::training, [&] { return train_hub(tune, *s.backend, s.cfg.train, s.pool.get()); });
  auto j = checkpoint_to_json(state, s.cfg.seed, s.backend->info().name);
  j["config_hash"] = s.cfg.config_hash();
  detail::write_json(s.cfg.out("checkpoint.json"), j, Stage::training);
  return state;
}

inline Embedding load_checkpoint(Session& s) {
  const auto path = s.cfg.checkpoint_path.empty() ? s.cfg.out("checkpoint.json")
                                                  : std::filesystem::path(s.cfg.checkpoint_path);
  auto j = detail::read_json(path, Stage::inversion, "run hub-train first or pass --checkpoint");
  auto state = detail::run_stage(Stage::inversion, [&] { return checkpoint_from_json(j); });
  if (state.hub_embedding.size() != s.backend->info().dim) {
    throw InversionError("checkpoint " + path.string() + " has dim " + std::to_string(state.hub_embedding.size()) +
                         " but the backend has dim " + std::to_string(s.backend->info().dim));
  }
  return state.hub_embedding;
}

// ---- step 2 ---------------------------------------------------------------

struct DecodeResult {
  HypothesisSet hypotheses;
  Selection selection;
  TokenSequence selected;
};

inline DecodeResult step_hub_decode(Session& s, const Embedding& hub) {
  auto& tune = s.tune_set();
  return detail::run_stage(Stage::inversion, [&] {
    DecodeResult r;
    r.hypotheses = invert_embedding(hub, *s.backend, s.cfg.invert, s.pool.get());
    if (r.hypotheses.truncated) {
      std::cerr << "warning: only " << r.hypotheses.size() << " unique hypotheses (requested "
                << s.cfg.invert.num_hypotheses << ")\n";
    }
    r.selection = select_best(r.hypotheses, tune, *s.backend, s.pool.get());
    r.selected = r.hypotheses.hypotheses[r.selection.index];

    std::string dump;
    const double n = static_cast<double>(tune.size());
    for (std::size_t k = 0; k < r.hypotheses.size(); ++k) {
      json line = sequence_json(r.hypotheses.hypotheses[k]);
      line["distance"] = r.hypotheses.distances[k];
      line["tune_score_mean"] = r.selection.summed_scores[k] / n;
      line.update(s.provenance());
      dump += line.dump() + "\n";
    }
    detail::write_text(s.cfg.out("hypotheses.jsonl"), dump, Stage::inversion);

    json decoded = sequence_json(r.selected);
    decoded["index"] = r.selection.index;
    decoded["tune_objective"] = r.selection.summed_scores[r.selection.index];
    decoded["num_hypotheses"] = r.hypotheses.size();
    decoded["truncated"] = r.hypotheses.truncated;
    decoded.update(s.provenance());
    detail::write_json(s.cfg.out("decoded.json"), decoded, Stage::inversion);
    return r;
  });
}

/// A JSON artifact carrying "ids" (decoded.json / result.json), or plain text.
inline TokenSequence read_text_artifact(const std::filesystem::path& path, const Vocabulary& vocab, Stage stage,
                                        const std::string& hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(stage, "missing " + path.string() + "; " + hint);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  auto j = json::parse(content, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("ids")) {
    auto ids = j["ids"].get<std::vector<TokenId>>();
    for (TokenId id : ids) {
      if (!vocab.valid(id)) throw Error(stage, path.string() + ": token id " + std::to_string(id) + " is not in the vocabulary");
    }
    return make_sequence(std::move(ids), vocab);
  }
  std::string text = content;
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return tokenize(text, vocab);
}

// ---- step 3 ---------------------------------------------------------------

inline SearchResult step_local_search(Session& s, const TokenSequence& init) {
  auto& tune = s.tune_set();
  return detail::run_stage(Stage::search, [&] {
    auto r = local_search(init, tune, *s.backend, s.cfg.search, s.pool.get());
    std::string trace;
    for (const auto& rep : r.trace.replacements) {
      json line = replacement_to_json(rep);
      line.update(s.provenance());
      trace += line.dump() + "\n";
    }
    detail::write_text(s.cfg.out("trace.jsonl"), trace, Stage::search);
    json result = sequence_json(r.text);
    result["objective"] = r.objective;
    result["initial_objective"] = r.trace.initial_objective;
    result["epochs"] = r.trace.epochs;
    result["converged"] = r.trace.converged;
    result["candidates_scored"] = r.trace.total_candidates_scored;
    result["wall_seconds"] = r.wall_seconds;
    result.update(s.provenance());
    detail::write_json(s.cfg.out("result.json"), result, Stage::search);
    return r;
  });
}

inline TokenSequence resolve_init(Session& s) {
  const auto& vocab = s.backend->vocab();
  if (!s.cfg.init_text.empty()) return tokenize(s.cfg.init_text, vocab);
  const auto path = s.cfg.init_path.empty() ? s.cfg.out("decoded.json") : std::filesystem::path(s.cfg.init_path);
  return read_text_artifact(path, vocab, Stage::search, "run hub-decode first or pass --init");
}

// ---- evaluation -----------------------------------------------------------

inline json report_json(const Session& s, const SearchReport& r) {
  json j = report_to_json(r);
  j.update(s.provenance());
  return j;
}

struct Row {
  std::string label;
  std::optional<SearchReport> tune;
  std::optional<SearchReport> test;
  bool has_chrf = true;
};

/// Table of score% mean +- SD and chrF% per row, one column pair per dataset.
inline std::string summary_table(const std::vector<Row>& rows, const std::string& tune_name,
                                 const std::string& test_name) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-18s %-8s %-18s %-8s\n", "Hypotheses", (tune_name + " score%").c_str(),
                "chrF%", (test_name + " score%").c_str(), "chrF%");
  os << line;
  auto cell = [](const std::optional<SearchReport>& r, bool chrf_cell, bool has_chrf) -> std::string {
    if (!r) return "-";
    if (chrf_cell) return has_chrf ? detail::fixed1(r->chrf_mean) : "N/A";
    return detail::pct(r->mean) + " +-" + detail::pct(r->sd);
  };
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%-22s %-18s %-8s %-18s %-8s\n", row.label.c_str(),
                  cell(row.tune, false, row.has_chrf).c_str(), cell(row.tune, true, row.has_chrf).c_str(),
                  cell(row.test, false, row.has_chrf).c_str(), cell(row.test, true, row.has_chrf).c_str());
    os << line;
  }
  os << "(" << kSdDefinition << ")\n";
  return os.str();
}

/// Scores of a raw hub embedding (no text, hence no chrF).
inline SearchReport evaluate_embedding(const Embedding& hub, const Dataset& data, const MetricBackend& backend) {
  SearchReport r;
  r.series = data.name + ":hub-embedding";
  r.hypothesis = "<embedding>";
  r.dataset = data.name;
  r.backend = backend.info().name;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& c = data.cases[k];
    r.per_case.push_back({k, c.id, backend.score(*c.source_embedding, hub, *c.reference_embedding), 0.0});
  }
  std::vector<double> xs;
  for (const auto& pc : r.per_case) xs.push_back(pc.score);
  std::tie(r.mean, r.sd) = mean_and_sd(xs);
  return r;
}

// ---- commands -------------------------------------------------------------

inline int cmd_hub_train(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  auto state = step_hub_train(s);
  out << "hub training: mean tuning score " << detail::pct(state.objective_history.front()) << "% -> "
      << detail::pct(state.objective_history.back()) << "% after " << state.step << " steps\n";
  return 0;
}

inline int cmd_hub_decode(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  const Embedding hub = load_checkpoint(s);
  auto r = step_hub_decode(s, hub);
  out << "hub decoding: selected hypothesis " << r.selection.index << " of " << r.hypotheses.size() << ": "
      << r.selected.surface << "\n";
  return 0;
}

inline int cmd_local_search(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  const TokenSequence init = resolve_init(s);
  auto r = step_local_search(s, init);
  out << "local search: objective " << r.trace.initial_objective << " -> " << r.objective << " in "
      << r.trace.epochs << " epochs, " << r.trace.replacements.size() << " replacements\n"
      << "hub text: " << r.text.surface << "\n";
  return 0;
}

inline int cmd_evaluate(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  const auto& vocab = s.backend->vocab();
  TokenSequence hyp;
  std::string surface;
  if (!s.cfg.hyp_text.empty()) {
    hyp = tokenize(s.cfg.hyp_text, vocab);
    surface = s.cfg.hyp_text;
  } else {
    const auto path = s.cfg.hyp_path.empty() ? s.cfg.out("result.json") : std::filesystem::path(s.cfg.hyp_path);
    hyp = read_text_artifact(path, vocab, Stage::report, "run local-search first or pass --hyp / --hyp-file");
    surface = hyp.surface;
  }
  std::vector<SearchReport> reports;
  std::vector<Dataset*> sets;
  if (!s.cfg.tune_path.empty()) sets.push_back(&s.tune_set());
  if (!s.cfg.test_path.empty()) sets.push_back(&s.test_set());
  if (sets.empty()) throw ConfigError("evaluate needs --test and/or --tune");
  for (Dataset* d : sets) {
    auto r = detail::run_stage(Stage::report, [&] { return evaluate_hypothesis(hyp, surface, *d, *s.backend, s.pool.get()); });
    detail::write_json(s.cfg.out("report_" + d->name + ".json"), report_json(s, r), Stage::report);
    out << d->name << ": " << detail::pct(r.mean) << " +-" << detail::pct(r.sd) << " score%, chrF "
        << detail::fixed1(r.chrf_mean) << "\n";
    reports.push_back(std::move(r));
  }
  if (!s.cfg.baselines_path.empty()) {
    Dataset& d = *sets.back();
    auto r = detail::run_stage(Stage::report, [&] {
      return evaluate_baselines(load_baselines(s.cfg.baselines_path), d, *s.backend, s.pool.get());
    });
    detail::write_json(s.cfg.out("report_" + d.name + "_baseline.json"), report_json(s, r), Stage::report);
    out << d.name << " baseline: " << detail::pct(r.mean) << " +-" << detail::pct(r.sd) << " score%, chrF "
        << detail::fixed1(r.chrf_mean) << "\n";
    reports.push_back(std::move(r));
  }
  if (s.cfg.export_distribution) {
    detail::run_stage(Stage::report, [&] {
      distribution_export(reports, s.cfg.out("scores.csv").string(), s.cfg.out("boxstats.json").string());
      return 0;
    });
  }
  return 0;
}

inline int cmd_transfer(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  if (s.cfg.dataset_paths.empty()) throw ConfigError("transfer needs --datasets");
  const auto& vocab = s.backend->vocab();
  TokenSequence hyp;
  std::string surface;
  if (!s.cfg.hyp_text.empty()) {
    hyp = tokenize(s.cfg.hyp_text, vocab);
    surface = s.cfg.hyp_text;
  } else {
    const auto path = s.cfg.hyp_path.empty() ? s.cfg.out("result.json") : std::filesystem::path(s.cfg.hyp_path);
    hyp = read_text_artifact(path, vocab, Stage::report, "run local-search first or pass --hyp / --hyp-file");
    surface = hyp.surface;
  }
  std::vector<Dataset> sets;
  for (const auto& p : s.cfg.dataset_paths) sets.push_back(s.load(p, "--datasets"));
  auto reports = detail::run_stage(Stage::report, [&] { return transfer_eval(hyp, surface, sets, *s.backend, s.pool.get()); });
  json all = json::array();
  for (const auto& r : reports) {
    all.push_back(report_json(s, r));
    out << r.dataset << ": " << detail::pct(r.mean) << " score%, chrF " << detail::fixed1(r.chrf_mean) << "\n";
  }
  detail::write_json(s.cfg.out("transfer.json"), all, Stage::report);
  return 0;
}

/// Reads systems from a JSON list of {"name", "score"} and inserts the hub.
inline int cmd_leaderboard(RunConfig cfg, std::ostream& out = std::cout) {
  if (cfg.systems_path.empty()) throw ConfigError("leaderboard needs --systems");
  if (!cfg.hub_score) throw ConfigError("leaderboard needs --hub-score");
  auto j = detail::read_json(cfg.systems_path, Stage::report, "pass a JSON list of {\"name\", \"score\"}");
  std::vector<std::pair<std::string, double>> systems;
  detail::run_stage(Stage::report, [&] {
    for (const auto& e : j) systems.emplace_back(e.at("name").get<std::string>(), e.at("score").get<double>());
    return 0;
  });
  auto rows = leaderboard_insert(systems, *cfg.hub_score);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  detail::write_json(std::filesystem::path(cfg.out_dir) / "leaderboard.json", leaderboard_to_json(rows), Stage::report);
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%3zu  %-24s %6.1f%s\n", r.rank, r.name.c_str(), r.score, r.is_hub ? "  <- hub" : "");
    out << line;
  }
  return 0;
}

/// The whole pipeline. Artifacts: checkpoint.json, hypotheses.jsonl,
/// decoded.json, trace.jsonl, result.json, report_*.json, scores.csv,
/// boxstats.json, summary.txt.
inline int cmd_pipeline(RunConfig cfg, std::ostream& out = std::cout) {
  Session s(std::move(cfg));
  auto& tune = s.tune_set();
  auto& test = s.test_set();

  const auto state = step_hub_train(s);
  const auto decoded = step_hub_decode(s, state.hub_embedding);
  const auto searched = step_local_search(s, decoded.selected);

  std::vector<Row> rows;
  rows.push_back({"(1) Hub training", evaluate_embedding(state.hub_embedding, tune, *s.backend),
                  evaluate_embedding(state.hub_embedding, test, *s.backend), false});
  std::vector<SearchReport> dist;
  auto eval_row = [&](const std::string& label, const std::string& tag, const TokenSequence& h) {
    Row row{label, std::nullopt, std::nullopt, true};
    row.tune = detail::run_stage(Stage::report, [&] { return evaluate_hypothesis(h, tune, *s.backend, s.pool.get()); });
    row.test = detail::run_stage(Stage::report, [&] { return evaluate_hypothesis(h, test, *s.backend, s.pool.get()); });
    row.tune->series = tune.name + ":" + tag;
    row.test->series = test.name + ":" + tag;
    detail::write_json(s.cfg.out("report_" + tag + "_tune.json"), report_json(s, *row.tune), Stage::report);
    detail::write_json(s.cfg.out("report_" + tag + "_test.json"), report_json(s, *row.test), Stage::report);
    dist.push_back(*row.test);
    rows.push_back(std::move(row));
  };
  eval_row("(2) Hub decoding", "decode", decoded.selected);
  eval_row("(3) Local search", "search", searched.text);

  if (!s.cfg.baselines_path.empty()) {
    auto base = detail::run_stage(Stage::report, [&] {
      return evaluate_baselines(load_baselines(s.cfg.baselines_path), test, *s.backend, s.pool.get());
    });
    detail::write_json(s.cfg.out("report_baseline_test.json"), report_json(s, base), Stage::report);
    dist.insert(dist.begin(), base);
    rows.insert(rows.begin(), Row{"Baseline", std::nullopt, base, true});
  }
  if (s.cfg.export_distribution) {
    detail::run_stage(Stage::report, [&] {
      distribution_export(dist, s.cfg.out("scores.csv").string(), s.cfg.out("boxstats.json").string());
      return 0;
    });
  }

  const std::string table = summary_table(rows, tune.name, test.name);
  detail::write_text(s.cfg.out("summary.txt"), table + "hub text: " + searched.text.surface + "\n", Stage::report);
  out << table << "hub text: " << searched.text.surface << "\n";
  return 0;
}

}  // namespace hubsearch
