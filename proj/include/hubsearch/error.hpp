#pragma once

#include <stdexcept>
#include <string>

namespace hubsearch {

/// Pipeline stage an error belongs to. The numeric value is the CLI exit code.
enum class Stage : int {
  config = 2,
  corpus = 3,
  backend = 4,
  training = 5,
  inversion = 6,
  search = 7,
  report = 8,
};

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::config: return "config";
    case Stage::corpus: return "corpus";
    case Stage::backend: return "backend";
    case Stage::training: return "training";
    case Stage::inversion: return "inversion";
    case Stage::search: return "search";
    case Stage::report: return "report";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what) : std::runtime_error(what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return static_cast<int>(stage_); }

 private:
  Stage stage_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(Stage::config, w) {}
};
struct CorpusError : Error {
  explicit CorpusError(const std::string& w) : Error(Stage::corpus, w) {}
};
struct BackendError : Error {
  explicit BackendError(const std::string& w) : Error(Stage::backend, w) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& w) : Error(Stage::training, w) {}
};
struct InversionError : Error {
  explicit InversionError(const std::string& w) : Error(Stage::inversion, w) {}
};
struct SearchError : Error {
  explicit SearchError(const std::string& w) : Error(Stage::search, w) {}
};
struct ReportError : Error {
  explicit ReportError(const std::string& w) : Error(Stage::report, w) {}
};

}  // namespace hubsearch
