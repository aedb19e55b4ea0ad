// hubsearch: find a single hub text that an embedding-based metric scores
// highly for every (source, reference) pair.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hubsearch/hubsearch.hpp"

namespace {

using hubsearch::RunConfig;
using nlohmann::json;

struct Flags {
  std::string config_path;
  RunConfig run;
  std::size_t steps = 0;
  double lr = 0;
  double weight_decay = 0;
  std::size_t hypotheses = 0;
  std::size_t beam = 0;
  std::size_t max_len = 0;
  double temperature = 0;
  std::size_t vocab_limit = 0;
  std::size_t max_epochs = 0;
  std::size_t chunk = 0;
  double hub_score = 0;
  std::string datasets;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Option name -> setter from a JSON config value.
using Setter = std::function<void(const json&)>;

std::map<std::string, Setter> config_setters(Flags& f) {
  auto& r = f.run;
  return {
      {"backend", [&](const json& v) { r.backend = v.get<std::string>(); }},
      {"tune", [&](const json& v) { r.tune_path = v.get<std::string>(); }},
      {"test", [&](const json& v) { r.test_path = v.get<std::string>(); }},
      {"vocab", [&](const json& v) { r.vocab_path = v.get<std::string>(); }},
      {"out", [&](const json& v) { r.out_dir = v.get<std::string>(); }},
      {"seed", [&](const json& v) { r.seed = v.get<std::uint64_t>(); }},
      {"threads", [&](const json& v) { r.threads = v.get<std::size_t>(); }},
      {"steps", [&](const json& v) { r.train.steps = v.get<std::size_t>(); }},
      {"lr", [&](const json& v) { r.train.lr = v.get<double>(); }},
      {"weight-decay", [&](const json& v) { r.train.weight_decay = v.get<double>(); }},
      {"hypotheses", [&](const json& v) { r.invert.num_hypotheses = v.get<std::size_t>(); }},
      {"beam", [&](const json& v) { r.invert.beam_width = v.get<std::size_t>(); }},
      {"max-len", [&](const json& v) { r.invert.max_length = v.get<std::size_t>(); }},
      {"temperature", [&](const json& v) { r.invert.temperature = v.get<double>(); }},
      {"vocab-limit",
       [&](const json& v) {
         r.search.vocab_limit = v.get<std::size_t>();
         r.invert.vocab_limit = r.search.vocab_limit;
       }},
      {"max-epochs", [&](const json& v) { r.search.max_epochs = v.get<std::size_t>(); }},
      {"chunk", [&](const json& v) { r.search.chunk_size = v.get<std::size_t>(); }},
      {"baselines", [&](const json& v) { r.baselines_path = v.get<std::string>(); }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hub-text search against embedding-based evaluation metrics"};
  app.require_subcommand(1);
  Flags f;
  RunConfig& r = f.run;

  std::map<std::string, CLI::Option*> opts;
  auto shared = [&](CLI::App* sub) {
    opts["config"] = sub->add_option("--config", f.config_path, "JSON config; flags override it");
    opts["backend"] = sub->add_option("--backend", r.backend, "builtin:SEED:D[:H] or remote:URL")->capture_default_str();
    opts["tune"] = sub->add_option("--tune", r.tune_path, "tuning data (JSONL src/ref)");
    opts["test"] = sub->add_option("--test", r.test_path, "test data (JSONL src/ref)");
    opts["vocab"] = sub->add_option("--vocab", r.vocab_path, "vocabulary file (builtin backend)");
    opts["out"] = sub->add_option("--out", r.out_dir, "output directory")->capture_default_str();
    opts["seed"] = sub->add_option("--seed", r.seed, "root seed")->capture_default_str();
    opts["threads"] = sub->add_option("--threads", r.threads, "worker threads")->capture_default_str();
    opts["steps"] = sub->add_option("--steps", f.steps, "hub training steps");
    opts["lr"] = sub->add_option("--lr", f.lr, "hub training learning rate");
    opts["weight-decay"] = sub->add_option("--weight-decay", f.weight_decay, "AdamW weight decay");
    opts["hypotheses"] = sub->add_option("--hypotheses", f.hypotheses, "hypotheses generated by hub decoding");
    opts["beam"] = sub->add_option("--beam", f.beam, "inversion beam width");
    opts["max-len"] = sub->add_option("--max-len", f.max_len, "maximum hypothesis length in tokens");
    opts["temperature"] = sub->add_option("--temperature", f.temperature, "inversion sampling temperature");
    opts["vocab-limit"] = sub->add_option("--vocab-limit", f.vocab_limit, "use only the first K regular tokens");
    opts["max-epochs"] = sub->add_option("--max-epochs", f.max_epochs, "local search epoch cap");
    opts["chunk"] = sub->add_option("--chunk", f.chunk, "candidates per scoring batch");
    opts["baselines"] = sub->add_option("--baselines", r.baselines_path, "per-case baseline hypotheses (JSONL hyp)");
  };

  auto* pipeline = app.add_subcommand("pipeline", "hub training, decoding, local search and evaluation");
  auto* train = app.add_subcommand("hub-train", "optimise the hub embedding");
  auto* decode = app.add_subcommand("hub-decode", "decode the hub embedding into a hub text");
  auto* search = app.add_subcommand("local-search", "refine a hub text by token replacement");
  auto* evaluate = app.add_subcommand("evaluate", "score a fixed hypothesis on a dataset");
  auto* transfer = app.add_subcommand("transfer", "score a fixed hypothesis on several datasets");
  auto* leaderboard = app.add_subcommand("leaderboard", "insert a hub score into a system leaderboard");
  auto* serve = app.add_subcommand("serve-builtin", "serve the builtin metric over the wire protocol");
  for (auto* sub : {pipeline, train, decode, search, evaluate, transfer, leaderboard, serve}) shared(sub);

  decode->add_option("--checkpoint", r.checkpoint_path, "hub-train checkpoint (default OUT/checkpoint.json)");
  search->add_option("--init", r.init_path, "initial hub text: decoded.json-style JSON or a text file");
  search->add_option("--init-text", r.init_text, "initial hub text given inline");
  for (auto* sub : {evaluate, transfer}) {
    sub->add_option("--hyp", r.hyp_text, "hypothesis text");
    sub->add_option("--hyp-file", r.hyp_path, "hypothesis: result.json-style JSON or a text file");
  }
  evaluate->add_flag("!--no-export", r.export_distribution, "skip scores.csv / boxstats.json");
  transfer->add_option("--datasets", f.datasets, "comma-separated JSONL datasets")->required();
  leaderboard->add_option("--systems", r.systems_path, "JSON list of {name, score}")->required();
  leaderboard->add_option("--hub-score", f.hub_score, "hub score (same unit as the systems)")->required();
  serve->add_option("--host", f.host)->capture_default_str();
  serve->add_option("--port", f.port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hubsearch::Stage::config);
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto given = [&](const std::string& name) {
    auto* o = chosen->get_option_no_throw("--" + name);
    return o != nullptr && o->count() > 0;
  };

  try {
    // Precedence: flags > config file > defaults.
    if (!f.config_path.empty()) {
      std::ifstream in(f.config_path);
      if (!in) throw hubsearch::ConfigError("cannot open config " + f.config_path);
      auto cfg = json::parse(in, nullptr, false);
      if (cfg.is_discarded() || !cfg.is_object()) throw hubsearch::ConfigError("config " + f.config_path + " is not a JSON object");
      auto setters = config_setters(f);
      for (const auto& [key, value] : cfg.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw hubsearch::ConfigError("unknown config key '" + key + "'");
        if (given(key)) continue;
        try {
          it->second(value);
        } catch (const json::exception&) {
          throw hubsearch::ConfigError("config key '" + key + "' has the wrong type");
        }
      }
    }
    if (given("steps")) r.train.steps = f.steps;
    if (given("lr")) r.train.lr = f.lr;
    if (given("weight-decay")) r.train.weight_decay = f.weight_decay;
    if (given("hypotheses")) r.invert.num_hypotheses = f.hypotheses;
    if (given("beam")) r.invert.beam_width = f.beam;
    if (given("max-len")) r.invert.max_length = f.max_len;
    if (given("temperature")) r.invert.temperature = f.temperature;
    if (given("vocab-limit")) {
      r.search.vocab_limit = f.vocab_limit;
      r.invert.vocab_limit = f.vocab_limit;
    }
    if (given("max-epochs")) r.search.max_epochs = f.max_epochs;
    if (given("chunk")) r.search.chunk_size = f.chunk;
    if (chosen == leaderboard) r.hub_score = f.hub_score;
    if (chosen == transfer) {
      std::stringstream ss(f.datasets);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) r.dataset_paths.push_back(item);
      }
    }

    if (chosen == pipeline) return hubsearch::cmd_pipeline(r);
    if (chosen == train) return hubsearch::cmd_hub_train(r);
    if (chosen == decode) return hubsearch::cmd_hub_decode(r);
    if (chosen == search) return hubsearch::cmd_local_search(r);
    if (chosen == evaluate) return hubsearch::cmd_evaluate(r);
    if (chosen == transfer) return hubsearch::cmd_transfer(r);
    if (chosen == leaderboard) return hubsearch::cmd_leaderboard(r);
    if (chosen == serve) {
      auto backend = hubsearch::make_backend(r.backend, r.vocab_path);
      hubsearch::MetricServer server(*backend);
      std::cerr << "serving " << backend->info().name << " on " << f.host << ":" << f.port << "\n";
      server.listen(f.host, f.port);
      return 0;
    }
  } catch (const hubsearch::Error& e) {
    std::cerr << "error [" << hubsearch::stage_name(e.stage()) << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
