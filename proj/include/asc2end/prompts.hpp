#pragma once

// Prompt templates for the summarization, retrieval and comparison calls.
// Placeholders are written {name}. Substitution is single-pass: text inserted
// for one placeholder is never scanned for further placeholders.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asc2end::prompts {

// {split_text}
extern const std::string_view kSummaryTemplate;
// {summary}, {target_topic}
extern const std::string_view kRetrievalTemplate;
// {company}, {summary}, {retrieved_text}, {target_topic}
extern const std::string_view kComparisonTemplate;

using Substitutions = std::vector<std::pair<std::string_view, std::string_view>>;

// Every `{name}` in the template must have a value; a missing one throws
// std::invalid_argument.
std::string render(std::string_view tmpl, const Substitutions& values);

enum class PromptKind { summary, retrieval, comparison, merged, other };

PromptKind classify(std::string_view prompt);

// Source text embedded in a summary prompt, or nullopt for other prompts.
std::optional<std::string_view> summary_source(std::string_view prompt);

// Variable parts of a comparison (or merged) prompt.
struct ComparisonFields {
  std::string_view company;
  std::string_view summary;
  std::string_view retrieved_text;
  std::string_view target_topic;
};
std::optional<ComparisonFields> comparison_fields(std::string_view prompt);

// Variable parts of a retrieval prompt; `context` is whatever follows the
// rendered template (the appended criteria passages).
struct RetrievalFields {
  std::string_view summary;
  std::string_view target_topic;
  std::string_view context;
};
std::optional<RetrievalFields> retrieval_fields(std::string_view prompt);

}  // namespace asc2end::prompts
