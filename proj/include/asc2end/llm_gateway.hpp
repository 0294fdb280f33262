#pragma once

// Uniform access to completion and embedding endpoints.
//
// Backends are plain transport: they turn a prompt into text (or texts into
// vectors) and throw BackendError on failure. LlmGateway adds what every call
// needs on top: retry with exponential backoff, a global in-flight limit, and
// one TokenLedgerEntry per completion.

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asc2end/clock.hpp"
#include "asc2end/ledger.hpp"

namespace asc2end {

class CompletionBackend;

struct CompletionProfile {
  Tier tier = Tier::machine_level;
  double temperature = 0.0;
  std::size_t max_new_tokens = 250;
  std::shared_ptr<CompletionBackend> endpoint;
  // Extra decoding parameters (top_p, ...) forwarded untouched to the backend.
  Json options = Json::object();

  static CompletionProfile machine_level(std::shared_ptr<CompletionBackend> endpoint);
  static CompletionProfile human_level(std::shared_ptr<CompletionBackend> endpoint);
};

inline constexpr std::size_t kMachineLevelMaxNewTokens = 250;
inline constexpr std::size_t kHumanLevelMaxNewTokens = 500;

struct CompletionResult {
  std::string text;
  std::optional<std::uint64_t> backend_prompt_tokens;
  std::optional<std::uint64_t> backend_completion_tokens;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Must be safe to call concurrently.
  virtual CompletionResult complete(std::string_view prompt,
                                    const CompletionProfile& profile) = 0;
  virtual std::string describe() const = 0;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
  virtual std::string describe() const = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t max_in_flight = 8;
  std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>();
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to sleep_for
};

struct CallContext {
  std::string doc_id;
  Stage stage = Stage::summary;
};

class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<EmbeddingBackend> embedder, GatewayOptions options = {});

  // Records one ledger entry per successful call. Exhausted retries or a
  // non-transient backend failure surface as StageError for ctx.doc_id.
  std::string complete(const CompletionProfile& profile, std::string_view prompt,
                       const CallContext& ctx, TokenLedger& ledger);

  // One vector per text; every vector of the run has the same dimension.
  // A dimension mismatch is a ConfigError.
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts);
  EmbeddingVector embed_one(const std::string& text);

  const Clock& clock() const { return *options_.clock; }
  const GatewayOptions& options() const { return options_; }

 private:
  template <typename Fn>
  auto with_retries(Fn&& fn, const std::string& what) -> decltype(fn());

  std::shared_ptr<EmbeddingBackend> embedder_;
  GatewayOptions options_;
  std::counting_semaphore<4096> in_flight_;
  std::mutex dim_mutex_;
  std::optional<std::size_t> dim_;
};

// --- deterministic offline backends -------------------------------------

// Summary prompts: the first 4 * max_new_tokens characters of the embedded
// source text. RAG and CA prompts: fixed response templates that echo the
// prompt's variable content. Output never exceeds max_new_tokens (estimated).
class MockCompletionBackend final : public CompletionBackend {
 public:
  CompletionResult complete(std::string_view prompt,
                            const CompletionProfile& profile) override;
  std::string describe() const override { return "mock"; }
};

// Signed feature hashing of lowercased words, L2-normalised. Texts with no
// word characters fall back to a one-hot bucket chosen by the whole-text hash.
class MockEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(std::size_t dim = 384);
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;
  std::string describe() const override { return "mock"; }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

std::uint64_t fnv1a64(std::string_view data);

// --- HTTP backends (OpenAI-compatible JSON APIs) -------------------------

struct HttpEndpointConfig {
  std::string url;        // full URL, e.g. https://api.openai.com/v1/chat/completions
  std::string model;
  std::string key_env;    // name of the env var holding the API key; may be empty
  std::chrono::seconds timeout{120};
};

// POSTs {"model", "messages", "temperature", "max_tokens", ...options} and
// reads choices[0].message.content (or choices[0].text).
class HttpCompletionBackend final : public CompletionBackend {
 public:
  explicit HttpCompletionBackend(HttpEndpointConfig config);
  CompletionResult complete(std::string_view prompt,
                            const CompletionProfile& profile) override;
  std::string describe() const override;

 private:
  HttpEndpointConfig config_;
};

// POSTs {"model", "input": [...]} and reads data[i].embedding ordered by index.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpEndpointConfig config);
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;
  std::string describe() const override;

 private:
  HttpEndpointConfig config_;
};

}  // namespace asc2end
