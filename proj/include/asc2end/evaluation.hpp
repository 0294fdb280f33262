#pragma once

// ROUGE-1/2/L over word tokens and survey scorecard aggregation.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/corpus_io.hpp"

namespace asc2end {

enum class RougeKind { rouge1, rouge2, rougeL };
std::string_view to_string(RougeKind kind);

struct RougeScore {
  RougeKind kind = RougeKind::rouge1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Clipped: an n-gram matches at most min(count in candidate, count in
// reference) times. Set: distinct n-grams only.
enum class OverlapMode { clipped, set };
std::string_view to_string(OverlapMode mode);
OverlapMode parse_overlap_mode(std::string_view name);

// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation,
// drop empty tokens.
std::vector<std::string> tokenize_for_rouge(std::string_view text);

// 2pr/(p+r), 0 when p + r == 0.
double f1_score(double precision, double recall);

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n,
                   OverlapMode mode = OverlapMode::clipped);
RougeScore rouge_l(std::string_view candidate, std::string_view reference);

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct RougeTriple {
  RougeScore rouge1{RougeKind::rouge1};
  RougeScore rouge2{RougeKind::rouge2};
  RougeScore rougeL{RougeKind::rougeL};
};

RougeTriple score_pair(std::string_view candidate, std::string_view reference,
                       OverlapMode mode = OverlapMode::clipped);

struct CorpusRougeReport {
  std::map<std::string, RougeTriple> per_document;
  RougeTriple averages;               // unweighted mean over per_document
  std::vector<std::string> warnings;  // documents left out and why
};

Json to_json(const CorpusRougeReport& report);

// Precision / Recall / F1 rows against ROUGE-1, ROUGE-2, ROUGE-L columns.
std::string format_rouge_table(const RougeTriple& averages);

// Scores every summary in <run_dir>/summaries.jsonl against the full body of
// its document and writes rouge_report.json and rouge_report.txt there.
// Documents without a summary are excluded with a warning.
CorpusRougeReport score_summaries(const std::filesystem::path& run_dir,
                                  const std::vector<Document>& corpus,
                                  OverlapMode mode = OverlapMode::clipped);

// --- survey -----------------------------------------------------------------

inline constexpr std::size_t kSurveyQuestions = 5;

inline constexpr std::array<std::string_view, kSurveyQuestions> kSurveyQuestionNames = {
    "Roles of Participants Stated", "Transaction Type Identification",
    "Transaction Amount ($) Identification", "Comparison to sustainability criteria is justified",
    "Do you agree with the confidence score & explanation?"};

struct SurveyScorecard {
  std::string annotator_id;
  std::string doc_id;
  std::string model_label;  // masked
  std::array<int, kSurveyQuestions> answers{};
};

// Header `annotator_id,doc_id,model_label,q1,q2,q3,q4,q5`. A card with the
// wrong column count or a non-binary answer throws InputError naming its row.
std::vector<SurveyScorecard> parse_scorecards(std::string_view csv);
std::vector<SurveyScorecard> load_scorecards(const std::filesystem::path& path);

// Header `model_label,model_name`.
std::map<std::string, std::string> parse_unmask_map(std::string_view csv);
std::map<std::string, std::string> load_unmask_map(const std::filesystem::path& path);

struct SurveyModelResult {
  std::string model_name;
  std::size_t cards = 0;
  std::array<double, kSurveyQuestions> means{};
  double overall = 0.0;  // sum of the five means, 0..5
};

// One result per model, ordered by model name. Throws InputError for a label
// missing from the unmasking map.
std::vector<SurveyModelResult> aggregate_survey(const std::vector<SurveyScorecard>& cards,
                                                const std::map<std::string, std::string>& unmask);

Json to_json(const std::vector<SurveyModelResult>& results);
std::string format_survey_table(const std::vector<SurveyModelResult>& results);

}  // namespace asc2end
