#include "asc2end/prompts.hpp"

#include <stdexcept>

namespace asc2end::prompts {

const std::string_view kSummaryTemplate =
    "Query:\n"
    "Given this text: {split_text}...\n"
    "generate a TL;DR.\n"
    "\n"
    "Guidelines for your answer:\n"
    "\n"
    "1. Include all detailed information relevant from the text.\n"
    "\n"
    "2. Formulate concise answers, grounded on facts from context. Keep answers logical.\n"
    "\n"
    "3. Use point form answers.\n"
    "\n"
    "Answer: TL;DR:";

const std::string_view kRetrievalTemplate =
    "Query:\n"
    "\n"
    "Given this document delimited by \"\": \"{summary}\":\n"
    "Provide the most relevant information only from the criteria that matches "
    "with the given document in terms of {target_topic}?\n"
    "\n"
    "Answer:";

const std::string_view kComparisonTemplate =
    "Prompt:\n"
    "You are an AI model assisting a Financial Analyst at {company}. Your task is "
    "to analyze the document delimited by \"\": \"{summary}\" and provide a "
    "thorough, yet concise analysis in the following format:\n"
    "\n"
    "1. Article Date: [Please input the date of the article here in MM/DD/YYYY "
    "format]\n"
    "\n"
    "2. Participants of the transaction: [Please provide a brief description of "
    "{company}'s role in relation to the article, then list the entities involved "
    "in the transaction mentioned in the article]\n"
    "\n"
    "3. Transaction and Transaction type: [Please indicate whether a transaction "
    "has taken place. If yes, state the type of transaction.]\n"
    "\n"
    "4. Transaction amount in dollars: [If a transaction has occurred, please "
    "specify the amount in dollars. If no transaction, please input $0]\n"
    "\n"
    "5. Comparison: [Based on the following criteria, delimited by \"\": "
    "\"{retrieved_text}\". Provide a concise comparison between the document and "
    "provided criteria and discuss the relevancy of the document to "
    "{target_topic}. Use specific information from the criteria and be very "
    "critical in your assessment].\n"
    "\n"
    "6. Confidence score: [Please provide a score between 0-100 indicating the "
    "degree to which the document discusses topics related to {target_topic}. A "
    "score of 0 means the document is not at all related to {target_topic}, a "
    "score of 50 means there are many uncertainties as to its correlation to "
    "{target_topic}, and a score of 100 means the document content is entirely "
    "about {target_topic}. If the transaction amount is $0 or there is no "
    "transaction, please input a score of 0. Use your comparison to affect your "
    "decision, skepticism and implicit assumptions in the answer needed to "
    "negatively affect the confidence score.]\n"
    "\n"
    "Please remember to:\n"
    "\n"
    "1. Provide factual and concise answers. 2. Critically evaluate the "
    "information from the document. 3. Use bullet points for your answers. 4. Do "
    "not explain your thought process. 5. Do not include extra text in addition "
    "to your analysis outside of the six points of analysis. 6. \"document\" "
    "should only refer to the provided article document.\n"
    "\n"
    "Response:";

std::string render(std::string_view tmpl, const Substitutions& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::size_t close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const std::string_view name = tmpl.substr(open + 1, close - open - 1);
    bool matched = false;
    for (const auto& [key, value] : values) {
      if (key == name) {
        out.append(value);
        matched = true;
        break;
      }
    }
    if (!matched) {
      throw std::invalid_argument("no value for placeholder {" + std::string(name) + "}");
    }
    i = close + 1;
  }
  return out;
}

namespace {

constexpr std::string_view kSummaryPrefix = "Query:\nGiven this text: ";
constexpr std::string_view kRetrievalPrefix = "Query:\n\nGiven this document delimited by \"\": \"";
constexpr std::string_view kComparisonPrefix =
    "Prompt:\nYou are an AI model assisting a Financial Analyst at ";

std::string_view summary_suffix() {
  static const std::string_view suffix =
      kSummaryTemplate.substr(kSummaryTemplate.find("{split_text}") + 12);
  return suffix;
}

std::optional<std::string_view> between(std::string_view text, std::size_t from,
                                        std::string_view open, std::string_view close,
                                        std::size_t* end_pos = nullptr) {
  const std::size_t a = text.find(open, from);
  if (a == std::string_view::npos) return std::nullopt;
  const std::size_t start = a + open.size();
  const std::size_t b = text.find(close, start);
  if (b == std::string_view::npos) return std::nullopt;
  if (end_pos) *end_pos = b + close.size();
  return text.substr(start, b - start);
}

}  // namespace

PromptKind classify(std::string_view prompt) {
  if (summary_source(prompt)) return PromptKind::summary;
  const bool has_comparison = prompt.find(kComparisonPrefix) != std::string_view::npos;
  if (prompt.starts_with(kRetrievalPrefix)) {
    return has_comparison ? PromptKind::merged : PromptKind::retrieval;
  }
  if (prompt.starts_with(kComparisonPrefix)) return PromptKind::comparison;
  return PromptKind::other;
}

std::optional<std::string_view> summary_source(std::string_view prompt) {
  const auto suffix = summary_suffix();
  if (!prompt.starts_with(kSummaryPrefix) || !prompt.ends_with(suffix) ||
      prompt.size() < kSummaryPrefix.size() + suffix.size()) {
    return std::nullopt;
  }
  return prompt.substr(kSummaryPrefix.size(),
                       prompt.size() - kSummaryPrefix.size() - suffix.size());
}

std::optional<ComparisonFields> comparison_fields(std::string_view prompt) {
  const std::size_t p = prompt.find(kComparisonPrefix);
  if (p == std::string_view::npos) return std::nullopt;
  ComparisonFields f;
  std::size_t pos = p;
  auto company = between(prompt, pos, "Financial Analyst at ", ". Your task is to analyze", &pos);
  auto summary = between(prompt, pos, "delimited by \"\": \"",
                         "\" and provide a thorough, yet concise analysis", &pos);
  auto retrieved = between(prompt, pos, "5. Comparison: [Based on the following criteria, delimited by \"\": \"",
                           "\". Provide a concise comparison between the document", &pos);
  auto topic = between(prompt, pos, "discuss the relevancy of the document to ",
                       ". Use specific information from the criteria", &pos);
  if (!company || !summary || !retrieved || !topic) return std::nullopt;
  f.company = *company;
  f.summary = *summary;
  f.retrieved_text = *retrieved;
  f.target_topic = *topic;
  return f;
}

std::optional<RetrievalFields> retrieval_fields(std::string_view prompt) {
  if (!prompt.starts_with(kRetrievalPrefix)) return std::nullopt;
  std::size_t pos = 0;
  auto summary = between(prompt, 0, kRetrievalPrefix,
                         "\":\nProvide the most relevant information only from the criteria", &pos);
  auto topic = between(prompt, pos, "with the given document in terms of ", "?\n\nAnswer:", &pos);
  if (!summary || !topic) return std::nullopt;
  RetrievalFields f;
  f.summary = *summary;
  f.target_topic = *topic;
  f.context = prompt.substr(pos);
  while (!f.context.empty() && (f.context.front() == '\n' || f.context.front() == ' ')) {
    f.context.remove_prefix(1);
  }
  return f;
}

}  // namespace asc2end::prompts
