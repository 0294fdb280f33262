#include "asc2end/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <stdexcept>
#include <thread>

#include "asc2end/errors.hpp"
#include "asc2end/log.hpp"
#include "asc2end/prompts.hpp"
#include "asc2end/text_units.hpp"

namespace asc2end {

CompletionProfile CompletionProfile::machine_level(std::shared_ptr<CompletionBackend> endpoint) {
  CompletionProfile p;
  p.tier = Tier::machine_level;
  p.temperature = 0.0;
  p.max_new_tokens = kMachineLevelMaxNewTokens;
  p.endpoint = std::move(endpoint);
  return p;
}

CompletionProfile CompletionProfile::human_level(std::shared_ptr<CompletionBackend> endpoint) {
  CompletionProfile p;
  p.tier = Tier::human_level;
  p.temperature = 0.0;
  p.max_new_tokens = kHumanLevelMaxNewTokens;
  p.endpoint = std::move(endpoint);
  return p;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LlmGateway::LlmGateway(std::shared_ptr<EmbeddingBackend> embedder, GatewayOptions options)
    : embedder_(std::move(embedder)),
      options_(std::move(options)),
      in_flight_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(options_.max_in_flight, 1, 4096))) {
  if (!options_.clock) options_.clock = std::make_shared<SystemClock>();
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
}

template <typename Fn>
auto LlmGateway::with_retries(Fn&& fn, const std::string& what) -> decltype(fn()) {
  auto backoff = options_.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<4096>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      return fn();
    } catch (const BackendError& e) {
      if (!e.transient() || attempt >= options_.retry.max_attempts) throw;
      log::warn(what + ": attempt " + std::to_string(attempt) + " failed (" + e.what() +
                "), retrying in " + std::to_string(backoff.count()) + " ms");
      options_.sleep(backoff);
      backoff = std::chrono::milliseconds(static_cast<std::int64_t>(
          static_cast<double>(backoff.count()) * options_.retry.multiplier));
    }
  }
}

std::string LlmGateway::complete(const CompletionProfile& profile, std::string_view prompt,
                                 const CallContext& ctx, TokenLedger& ledger) {
  if (prompt.empty()) throw std::invalid_argument("complete: prompt is empty");
  if (!profile.endpoint) {
    throw ConfigError("completion profile '" + std::string(to_string(profile.tier)) +
                      "' has no backend");
  }
  const auto started = options_.clock->now();
  CompletionResult result;
  try {
    result = with_retries([&] { return profile.endpoint->complete(prompt, profile); },
                          "completion for " + ctx.doc_id);
  } catch (const BackendError& e) {
    throw StageError(ctx.doc_id, std::string(to_string(ctx.stage)),
                     std::string("completion failed: ") + e.what(), true);
  }

  TokenLedgerEntry entry;
  entry.doc_id = ctx.doc_id;
  entry.stage = ctx.stage;
  entry.tier = profile.tier;
  entry.prompt_tokens = estimated_tokens(prompt);
  entry.completion_tokens = estimated_tokens(result.text);
  entry.wall_time_ms = options_.clock->elapsed_ms(started);
  entry.backend_prompt_tokens = result.backend_prompt_tokens;
  entry.backend_completion_tokens = result.backend_completion_tokens;
  ledger.append(std::move(entry));
  return std::move(result.text);
}

std::vector<EmbeddingVector> LlmGateway::embed(std::span<const std::string> texts) {
  if (!embedder_) throw ConfigError("no embedding backend configured");
  for (const auto& t : texts) {
    if (t.empty()) throw std::invalid_argument("embed: texts must be nonempty");
  }
  if (texts.empty()) return {};

  std::vector<std::vector<double>> raw;
  try {
    raw = with_retries([&] { return embedder_->embed(texts); }, "embedding batch");
  } catch (const BackendError& e) {
    throw BackendError(std::string("embedding failed: ") + e.what(), false);
  }
  if (raw.size() != texts.size()) {
    throw ConfigError("embedding backend returned " + std::to_string(raw.size()) +
                      " vectors for " + std::to_string(texts.size()) + " texts");
  }

  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  std::lock_guard lock(dim_mutex_);
  for (auto& v : raw) {
    if (v.empty()) throw ConfigError("embedding backend returned an empty vector");
    if (!dim_) dim_ = v.size();
    if (v.size() != *dim_) {
      throw ConfigError("embedding dimension mismatch: expected " + std::to_string(*dim_) +
                        ", got " + std::to_string(v.size()));
    }
    if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
      throw ConfigError("embedding backend returned a non-finite value");
    }
    out.push_back(EmbeddingVector{std::move(v)});
  }
  return out;
}

EmbeddingVector LlmGateway::embed_one(const std::string& text) {
  return std::move(embed(std::span<const std::string>(&text, 1)).front());
}

// --- mocks -----------------------------------------------------------------

namespace {

std::string squash_whitespace(std::string_view text, std::size_t max_chars) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return std::string(take_chars(out, max_chars));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string mock_comparison(const prompts::ComparisonFields& f) {
  static const std::regex kDate(R"(\b(0?[1-9]|1[0-2])/(0?[1-9]|[12][0-9]|3[01])/([0-9]{4})\b)");
  static const std::regex kAmount(
      R"(\$\s?[0-9][0-9,]*(\.[0-9]+)?(\s?(million|billion|thousand))?)", std::regex::icase);

  const std::string summary(f.summary);
  std::smatch m;
  const std::string date = std::regex_search(summary, m, kDate) ? m.str(0) : "Not stated";
  std::string amount;
  if (std::regex_search(summary, m, kAmount)) amount = m.str(0);

  std::string type = "financing";
  {
    static const char* kTypes[] = {"acquisition", "merger",     "loan",
                                   "bond",        "credit facility", "investment",
                                   "partnership", "underwriting", "issuance"};
    const std::string low = lower(summary);
    std::size_t best = std::string::npos;
    for (const char* t : kTypes) {
      const auto pos = low.find(t);
      if (pos < best) {
        best = pos;
        type = t;
      }
    }
  }

  const std::uint64_t h = fnv1a64(f.summary);
  const bool transaction = !amount.empty();
  const int score = transaction ? static_cast<int>(40 + h % 61) : 0;

  std::string out;
  out += "1. Article Date: " + date + "\n";
  out += "2. Participants of the transaction:\n";
  out += "- " + std::string(f.company) + ": referenced as an interested party in the article.\n";
  out += "- Entities: " + squash_whitespace(f.summary, 160) + "\n";
  out += "3. Transaction and Transaction type:\n";
  out += transaction ? "- Yes, " + type + "\n" : "- No transaction identified.\n";
  out += "4. Transaction amount in dollars: " + (transaction ? amount : std::string("$0")) + "\n";
  out += "5. Comparison:\n";
  out += "- Relevance to " + std::string(f.target_topic) + ": " +
         squash_whitespace(f.retrieved_text, 240) + "\n";
  out += "6. Confidence score: " + std::to_string(score);
  return out;
}

}  // namespace

CompletionResult MockCompletionBackend::complete(std::string_view prompt,
                                                 const CompletionProfile& profile) {
  const std::size_t cap = kCharsPerToken * profile.max_new_tokens;
  std::string text;
  switch (prompts::classify(prompt)) {
    case prompts::PromptKind::summary:
      text = std::string(*prompts::summary_source(prompt));
      break;
    case prompts::PromptKind::retrieval: {
      const auto f = prompts::retrieval_fields(prompt);
      text = "Relevant criteria regarding " + std::string(f ? f->target_topic : "the topic") + ":\n";
      text += (f && !f->context.empty()) ? std::string(f->context)
                                          : std::string("No criteria passages were provided.");
      break;
    }
    case prompts::PromptKind::comparison:
    case prompts::PromptKind::merged: {
      const auto f = prompts::comparison_fields(prompt);
      text = f ? mock_comparison(*f) : std::string("Unable to read the comparison prompt.");
      break;
    }
    case prompts::PromptKind::other:
      text = "Mock response to a prompt of " + std::to_string(count_chars(prompt)) +
             " characters.";
      break;
  }
  return CompletionResult{std::string(take_chars(text, cap)), std::nullopt, std::nullopt};
}

MockEmbeddingBackend::MockEmbeddingBackend(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw ConfigError("mock embedding dimension must be >= 1");
}

std::vector<std::vector<double>> MockEmbeddingBackend::embed(std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(dim_, 0.0);
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      const std::uint64_t h = fnv1a64(word);
      v[h % dim_] += ((h >> 32) & 1u) ? -1.0 : 1.0;
      word.clear();
    };
    for (unsigned char c : text) {
      if (std::isalnum(c) || c >= 0x80) {
        word.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
    }
    flush();

    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      v[fnv1a64(text) % dim_] = 1.0;
    } else {
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace asc2end
