#pragma once

// Run configuration: a flat UTF-8 `key = value` file.
//
//   # comment            blank lines and lines starting with # are ignored
//   company = Example Bank
//   machine.backend = mock
//
// Values are taken verbatim after trimming; surrounding double quotes are
// removed. Relative paths resolve against the config file's directory.
// The same keys can be overridden from the command line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "asc2end/criteria_store.hpp"
#include "asc2end/evaluation.hpp"
#include "asc2end/llm_gateway.hpp"
#include "asc2end/rag_compare.hpp"
#include "asc2end/summarizer.hpp"

namespace asc2end {

enum class Mode { full, baseline, no_ds, no_rag, no_ca };

std::string_view to_string(Mode mode);
// Accepts both no_ds and no-ds spellings.
Mode parse_mode(std::string_view name);

struct BackendConfig {
  std::string backend = "mock";  // mock | http
  std::string endpoint;
  std::string model;
  std::string key_env;
  std::optional<double> temperature;
  std::optional<std::size_t> max_new_tokens;
  std::size_t timeout_s = 120;
  std::size_t dim = 384;  // mock embeddings only
  Json options = Json::object();

  bool is_mock() const { return backend == "mock"; }
};

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path criteria_path;
  std::filesystem::path run_dir;
  ComparisonContext context;
  Mode mode = Mode::full;
  SummaryConfig summary;
  IndexOptions index;
  std::size_t k = kDefaultTopK;
  QueryMode query_mode = QueryMode::summary_plus_topic;
  BackendConfig machine;
  BackendConfig human;
  BackendConfig embedding;
  std::size_t workers = 1;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::size_t max_in_flight = 8;
  RetryPolicy retry;
  // Unset: fixed clock exactly when every backend is a mock.
  std::optional<bool> deterministic_clock;
  OverlapMode rouge_overlap = OverlapMode::clipped;
  bool fresh = false;  // discard existing artifacts in run_dir

  bool all_mock() const { return machine.is_mock() && human.is_mock() && embedding.is_mock(); }
  bool use_fixed_clock() const { return deterministic_clock.value_or(all_mock()); }

  // Mode-specific requirements; throws ConfigError.
  void validate() const;
};

// Sets one key. Throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                      const std::filesystem::path& base_dir);

// run_dir defaults to $ASC2END_RUN_DIR, then "runs/<mode>" under base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Resolves the default run_dir if none was configured.
void finalize_run_dir(RunConfig& cfg, const std::filesystem::path& base_dir);

// Backends described by the config. HTTP backends need endpoint and model.
std::shared_ptr<CompletionBackend> make_completion_backend(const BackendConfig& b);
std::shared_ptr<EmbeddingBackend> make_embedding_backend(const BackendConfig& b);
CompletionProfile make_profile(Tier tier, const BackendConfig& b);

}  // namespace asc2end
