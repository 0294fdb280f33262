#pragma once

// Iterative abstractive summarization under an output-token threshold.
//
// One pass splits the current text into chunk_budget-sized chunks, summarizes
// each chunk with the TL;DR prompt (capped at segment_budget new tokens) and
// joins the segments with '\n'. Passes repeat on the joined text until it is
// at most threshold_tokens, or max_passes is reached, in which case the text
// is hard-truncated to the threshold and flagged.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/corpus_io.hpp"
#include "asc2end/llm_gateway.hpp"
#include "asc2end/text_units.hpp"

namespace asc2end {

struct SummaryConfig {
  std::size_t chunk_budget_tokens = 2000;
  std::size_t segment_budget_tokens = 250;
  std::size_t threshold_tokens = 1250;
  std::size_t max_passes = 5;
  BoundaryPolicy boundary = BoundaryPolicy::nearest_whitespace;

  // The larger-summary preset: identical rules, threshold 2500.
  static SummaryConfig extended();

  // Throws ConfigError unless segment < chunk, threshold >= segment and
  // max_passes >= 1.
  void validate() const;
};

struct SummaryRecord {
  std::string doc_id;
  std::string final_text;
  std::size_t passes = 0;
  std::vector<std::size_t> per_pass_chunk_counts;
  std::size_t final_tokens = 0;
  bool truncated = false;
};

Json to_json(const SummaryRecord& record);
SummaryRecord summary_from_json(const Json& j);

// Throws std::invalid_argument for empty text.
std::string render_summary_prompt(std::string_view split_text);

// Throws std::invalid_argument for an empty body and StageError when the
// backend fails.
SummaryRecord summarize_document(const Document& doc, const SummaryConfig& cfg,
                                 const CompletionProfile& profile, LlmGateway& gateway,
                                 TokenLedger& ledger);

struct SummaryFailure {
  std::string doc_id;
  std::string message;
};

struct CorpusSummary {
  std::vector<SummaryRecord> records;  // corpus order, empty bodies omitted
  std::vector<std::string> warnings;
  std::vector<SummaryFailure> failures;
  std::size_t resumed = 0;             // records taken from existing artifacts
};

// Summarizes every document with a nonempty body on `workers` threads. With a
// store, documents that already have a summary artifact are not re-run, and new
// records are persisted as they complete (in corpus order).
CorpusSummary summarize_corpus(const std::vector<Document>& docs, const SummaryConfig& cfg,
                               const CompletionProfile& profile, LlmGateway& gateway,
                               TokenLedger& ledger, ArtifactStore* store = nullptr,
                               std::size_t workers = 1);

}  // namespace asc2end
