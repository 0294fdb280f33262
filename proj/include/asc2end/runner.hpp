#pragma once

// Pipeline orchestration for the full system, the baseline and the three
// single-module ablations.
//
// Each document runs its stages in order on a bounded worker pool; results
// are committed (ledger, artifacts, warnings) in corpus order, so a run with
// mock backends and a fixed clock is byte-reproducible. A run directory holds
// one mode. Re-running into it resumes: stages that already have an artifact
// are read back instead of recomputed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "asc2end/config.hpp"

namespace asc2end {

// Replacements for the configured backends and clock (tests, embedding).
struct RunHooks {
  std::shared_ptr<CompletionBackend> machine;
  std::shared_ptr<CompletionBackend> human;
  std::shared_ptr<EmbeddingBackend> embedding;
  std::shared_ptr<const Clock> clock;
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct DocFailure {
  std::string doc_id;
  std::string stage;
  std::string message;
  bool backend_failure = false;
};

struct RunReport {
  Mode mode = Mode::full;
  std::size_t docs_total = 0;      // after sampling
  std::size_t docs_processed = 0;  // with an assessment
  std::size_t docs_resumed = 0;    // assessment read back from a previous run
  std::size_t criteria_passages = 0;  // 0 when no index is used
  LedgerReport ledger;
  std::uint64_t total_tokens = 0;       // every tier
  std::uint64_t comparison_tokens = 0;  // human-level tier only
  double wall_time_ms = 0.0;
  std::vector<DocFailure> failures;
  std::vector<std::string> warnings;

  // 0 success, 3 some documents failed, 4 every document failed on the backend.
  int exit_code() const;
};

Json to_json(const RunReport& report);
RunReport run_report_from_json(const Json& j);
std::string format_run_report(const RunReport& report);
RunReport load_run_report(const std::filesystem::path& run_dir);

// Runs cfg.mode. Throws ConfigError / InputError for problems that stop the
// whole run; per-document failures land in RunReport::failures.
RunReport run_pipeline(const RunConfig& cfg, const RunHooks& hooks = {});

RunReport run_full(RunConfig cfg, const RunHooks& hooks = {});
RunReport run_baseline(RunConfig cfg, const RunHooks& hooks = {});
RunReport run_no_ds(RunConfig cfg, const RunHooks& hooks = {});
RunReport run_no_rag(RunConfig cfg, const RunHooks& hooks = {});
RunReport run_no_ca(RunConfig cfg, const RunHooks& hooks = {});

// Uniform sample of n documents without replacement, in draw order. The same
// seed always gives the same sample. Throws ConfigError unless 1 <= n <= size.
std::vector<Document> sample_corpus(const std::vector<Document>& docs, std::size_t n,
                                    std::uint64_t seed);

struct ComparisonRow {
  std::string description;
  double comparison_token_diff_pct = 0.0;
  double total_token_diff_pct = 0.0;
  double runtime_diff_pct = 0.0;
};

// Percent differences of each run against the reference run.
std::vector<ComparisonRow> compare_runs(const RunReport& reference,
                                        const std::vector<RunReport>& runs);
std::string format_comparison(const RunReport& reference, const std::vector<ComparisonRow>& rows);

}  // namespace asc2end
