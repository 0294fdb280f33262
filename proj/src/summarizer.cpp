#include "asc2end/summarizer.hpp"

#include <stdexcept>

#include "asc2end/errors.hpp"
#include "asc2end/log.hpp"
#include "asc2end/prompts.hpp"
#include "asc2end/worker_pool.hpp"

namespace asc2end {

SummaryConfig SummaryConfig::extended() {
  SummaryConfig cfg;
  cfg.threshold_tokens = 2500;
  return cfg;
}

void SummaryConfig::validate() const {
  if (chunk_budget_tokens == 0 || segment_budget_tokens == 0) {
    throw ConfigError("summary budgets must be >= 1");
  }
  if (segment_budget_tokens >= chunk_budget_tokens) {
    throw ConfigError("segment_budget_tokens must be smaller than chunk_budget_tokens");
  }
  if (threshold_tokens < segment_budget_tokens) {
    throw ConfigError("threshold_tokens must be >= segment_budget_tokens");
  }
  if (max_passes == 0) throw ConfigError("max_passes must be >= 1");
}

Json to_json(const SummaryRecord& r) {
  Json j;
  j["doc_id"] = r.doc_id;
  j["final_text"] = r.final_text;
  j["passes"] = r.passes;
  j["per_pass_chunk_counts"] = r.per_pass_chunk_counts;
  j["final_tokens"] = r.final_tokens;
  j["truncated"] = r.truncated;
  return j;
}

SummaryRecord summary_from_json(const Json& j) {
  SummaryRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.final_text = j.at("final_text").get<std::string>();
  r.passes = j.at("passes").get<std::size_t>();
  r.per_pass_chunk_counts = j.at("per_pass_chunk_counts").get<std::vector<std::size_t>>();
  r.final_tokens = j.at("final_tokens").get<std::size_t>();
  r.truncated = j.at("truncated").get<bool>();
  return r;
}

std::string render_summary_prompt(std::string_view split_text) {
  if (split_text.empty()) throw std::invalid_argument("render_summary_prompt: empty text");
  return prompts::render(prompts::kSummaryTemplate, {{"split_text", split_text}});
}

SummaryRecord summarize_document(const Document& doc, const SummaryConfig& cfg,
                                 const CompletionProfile& profile, LlmGateway& gateway,
                                 TokenLedger& ledger) {
  if (doc.body.empty()) {
    throw std::invalid_argument("summarize_document: document " + doc.doc_id + " has an empty body");
  }
  cfg.validate();

  CompletionProfile capped = profile;
  capped.max_new_tokens = cfg.segment_budget_tokens;
  const CallContext ctx{doc.doc_id, Stage::summary};

  SummaryRecord record;
  record.doc_id = doc.doc_id;
  std::string current = doc.body;

  for (std::size_t pass = 1; pass <= cfg.max_passes; ++pass) {
    const auto chunks = split_by_token_budget(current, cfg.chunk_budget_tokens, cfg.boundary);
    std::string joined;
    for (const auto& chunk : chunks) {
      // Segments longer than the budget are kept; the threshold loop handles them.
      const std::string segment =
          gateway.complete(capped, render_summary_prompt(chunk.text), ctx, ledger);
      if (chunk.index > 0) joined.push_back('\n');
      joined += segment;
    }
    record.passes = pass;
    record.per_pass_chunk_counts.push_back(chunks.size());
    current = std::move(joined);
    if (estimated_tokens(current) <= cfg.threshold_tokens) break;
    if (pass == cfg.max_passes) {
      current = std::string(take_chars(current, cfg.threshold_tokens * kCharsPerToken));
      record.truncated = true;
    }
  }

  record.final_tokens = estimated_tokens(current);
  record.final_text = std::move(current);
  return record;
}

namespace {

struct DocSummaryOutcome {
  std::optional<SummaryRecord> record;
  std::vector<TokenLedgerEntry> entries;
  std::optional<std::string> warning;
  std::optional<std::string> failure;
  bool resumed = false;
};

}  // namespace

CorpusSummary summarize_corpus(const std::vector<Document>& docs, const SummaryConfig& cfg,
                               const CompletionProfile& profile, LlmGateway& gateway,
                               TokenLedger& ledger, ArtifactStore* store, std::size_t workers) {
  cfg.validate();
  std::map<std::string, RunArtifact> existing;
  if (store) existing = store->read_stage(Stage::summary);

  CorpusSummary out;
  run_ordered<DocSummaryOutcome>(
      docs.size(), workers,
      [&](std::size_t i) {
        const Document& doc = docs[i];
        DocSummaryOutcome outcome;
        if (auto it = existing.find(doc.doc_id); it != existing.end()) {
          outcome.record = summary_from_json(it->second.payload);
          outcome.entries.push_back(it->second.token_usage);
          outcome.resumed = true;
          return outcome;
        }
        if (doc.body.empty()) {
          outcome.warning = "document " + doc.doc_id + " has an empty body; skipped";
          return outcome;
        }
        TokenLedger local;
        try {
          outcome.record = summarize_document(doc, cfg, profile, gateway, local);
        } catch (const StageError& e) {
          outcome.failure = e.what();
        }
        outcome.entries = local.entries();
        return outcome;
      },
      [&](std::size_t i, DocSummaryOutcome outcome) {
        const Document& doc = docs[i];
        ledger.append_all(outcome.entries);
        if (outcome.warning) {
          log::warn(*outcome.warning);
          if (store) store->record_warning(doc.doc_id, "summary", "warning", *outcome.warning);
          out.warnings.push_back(std::move(*outcome.warning));
        }
        if (outcome.failure) {
          log::error("summary of " + doc.doc_id + " failed: " + *outcome.failure);
          if (store) store->record_warning(doc.doc_id, "summary", "error", *outcome.failure);
          out.failures.push_back({doc.doc_id, std::move(*outcome.failure)});
        }
        if (!outcome.record) return;
        if (outcome.resumed) {
          ++out.resumed;
        } else if (store) {
          RunArtifact artifact;
          artifact.doc_id = doc.doc_id;
          artifact.stage = Stage::summary;
          artifact.payload = to_json(*outcome.record);
          artifact.created_at = format_timestamp(gateway.clock().now());
          artifact.token_usage = aggregate(outcome.entries);
          artifact.token_usage.doc_id = doc.doc_id;
          artifact.token_usage.stage = Stage::summary;
          artifact.token_usage.tier = profile.tier;
          store->persist(artifact);
        }
        out.records.push_back(std::move(*outcome.record));
      });
  return out;
}

}  // namespace asc2end
