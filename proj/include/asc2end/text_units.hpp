#pragma once

// Character-based token estimation and document chunking.
//
// A "character" here is a Unicode scalar value of UTF-8 input: every byte
// that is not a continuation byte (10xxxxxx) starts a new character. Malformed
// input is never rejected; stray continuation bytes attach to the preceding
// character, so every split is still lossless.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace asc2end {

inline constexpr std::size_t kCharsPerToken = 4;

struct TokenEstimate {
  std::size_t chars = 0;
  std::size_t tokens = 0;

  friend bool operator==(const TokenEstimate&, const TokenEstimate&) = default;
};

struct Chunk {
  std::size_t index = 0;
  std::string text;
  std::size_t start_char = 0;  // inclusive, in characters
  std::size_t end_char = 0;    // exclusive, in characters

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

enum class BoundaryPolicy { exact_char, nearest_whitespace };

// How far back (in characters) a nearest_whitespace cut may move.
inline constexpr std::size_t kWhitespaceSearchWindow = 64;

std::size_t count_chars(std::string_view text);

// First `max_chars` characters of `text` (whole string if shorter).
std::string_view take_chars(std::string_view text, std::size_t max_chars);

// tokens == ceil(chars / 4).
TokenEstimate estimate_tokens(std::string_view text);

inline std::size_t estimated_tokens(std::string_view text) {
  return estimate_tokens(text).tokens;
}

// Splits into contiguous chunks of at most `budget_tokens` estimated tokens.
// Joining the chunk texts reproduces `text` exactly under either policy.
// Throws std::invalid_argument when budget_tokens == 0.
std::vector<Chunk> split_by_token_budget(
    std::string_view text, std::size_t budget_tokens,
    BoundaryPolicy policy = BoundaryPolicy::nearest_whitespace);

// Sliding character window: chunk i starts at i * (window - overlap) and the
// last chunk ends at the end of the text. Requires overlap < window.
std::vector<Chunk> split_by_char_window(std::string_view text,
                                        std::size_t window_chars,
                                        std::size_t overlap_chars);

std::string_view to_string(BoundaryPolicy policy);
BoundaryPolicy parse_boundary_policy(std::string_view name);

}  // namespace asc2end
