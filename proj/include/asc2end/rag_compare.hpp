#pragma once

// Retrieval-augmented comparison: the retrieval call over the top-k criteria
// passages, the six-field comparison call, and parsing of its output.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/criteria_store.hpp"
#include "asc2end/llm_gateway.hpp"
#include "asc2end/summarizer.hpp"

namespace asc2end {

struct ComparisonContext {
  std::string company;
  std::string target_topic;

  void validate() const;  // both nonempty, else ConfigError
};

// What text is embedded as the retrieval query.
enum class QueryMode { summary_plus_topic, full_prompt };

std::string_view to_string(QueryMode mode);
QueryMode parse_query_mode(std::string_view name);

inline constexpr std::size_t kDefaultTopK = 3;

struct RagOutput {
  std::string doc_id;
  RetrievalResult retrieved;
  std::string augmented_text;
};

Json to_json(const RagOutput& out);
RagOutput rag_output_from_json(const Json& j);

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  std::string iso() const;  // YYYY-MM-DD
  friend bool operator==(const Date&, const Date&) = default;
};

enum class WarningKind { missing_field, unparseable, clamped, inconsistent };
std::string_view to_string(WarningKind kind);

struct FieldWarning {
  std::string field;  // Assessment field name, e.g. "confidence_score"
  WarningKind kind = WarningKind::missing_field;
  std::string message;
};

struct Assessment {
  std::string doc_id;
  std::optional<Date> article_date;
  std::string participants;
  bool transaction_occurred = false;
  std::optional<std::string> transaction_type;
  std::optional<double> transaction_amount_usd;
  std::string comparison;
  std::optional<int> confidence_score;  // always within [0, 100]
  std::string raw_response;
  bool parse_error = false;
  std::vector<FieldWarning> warnings;

  bool has_warning(std::string_view field, WarningKind kind) const;
};

Json to_json(const Assessment& a);
Assessment assessment_from_json(const Json& j);

// Never throws. Fields are located by their numbered labels ("1. Article
// Date:" ... "6. Confidence score:"), case-insensitively, ignoring leading
// bullets, markdown emphasis and whitespace. Every problem becomes a
// FieldWarning; a missing label or unreadable confidence sets parse_error.
Assessment parse_assessment(std::string_view raw);

// Dollar amount from free text: first currency-like token, commas and '$'
// stripped, thousand/million/billion/trillion multipliers applied.
std::optional<double> parse_dollar_amount(std::string_view text);

// --- prompts ----------------------------------------------------------------

// Throw std::invalid_argument for empty inputs.
std::string render_rag_prompt(std::string_view summary, std::string_view target_topic);
std::string render_ca_prompt(std::string_view summary, std::string_view retrieved_text,
                             const ComparisonContext& ctx);

// "Criteria passage i: <text>" lines in rank order (i is 1-based).
std::string format_passages(const CriteriaIndex& index, const RetrievalResult& retrieved);

// Retrieval question, passages, then the six-field request, in that order.
std::string render_merged_prompt(std::string_view summary, std::string_view passages,
                                 const ComparisonContext& ctx);

std::string retrieval_query_text(std::string_view summary, const ComparisonContext& ctx,
                                 QueryMode mode);

// --- calls ------------------------------------------------------------------

// Retrieves the top-k passages for `subject_text` (the summary, or the raw
// body when summarization is disabled) and runs the retrieval prompt with the
// passages appended.
RagOutput run_rag(std::string_view doc_id, std::string_view subject_text,
                  const CriteriaIndex& index, const ComparisonContext& ctx,
                  const CompletionProfile& profile, LlmGateway& gateway, TokenLedger& ledger,
                  std::size_t k = kDefaultTopK, QueryMode mode = QueryMode::summary_plus_topic);

RagOutput run_rag(const SummaryRecord& summary, const CriteriaIndex& index,
                  const ComparisonContext& ctx, const CompletionProfile& profile,
                  LlmGateway& gateway, TokenLedger& ledger, std::size_t k = kDefaultTopK,
                  QueryMode mode = QueryMode::summary_plus_topic);

// Completion over a ready-made prompt, parsed into an Assessment.
Assessment assess_prompt(std::string_view doc_id, const std::string& prompt,
                         const CompletionProfile& profile, LlmGateway& gateway,
                         TokenLedger& ledger);

Assessment run_assessment(std::string_view doc_id, std::string_view subject_text,
                          std::string_view retrieved_text, const ComparisonContext& ctx,
                          const CompletionProfile& profile, LlmGateway& gateway,
                          TokenLedger& ledger);

Assessment run_assessment(const SummaryRecord& summary, const RagOutput& rag,
                          const ComparisonContext& ctx, const CompletionProfile& profile,
                          LlmGateway& gateway, TokenLedger& ledger);

}  // namespace asc2end
