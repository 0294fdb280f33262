#include "asc2end/text_units.hpp"

#include <stdexcept>

namespace asc2end {
namespace {

bool is_continuation(char c) {
  return (static_cast<unsigned char>(c) & 0xC0u) == 0x80u;
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Byte offset of every character start, followed by text.size().
std::vector<std::size_t> char_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 0 || !is_continuation(text[i])) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

Chunk make_chunk(std::string_view text, const std::vector<std::size_t>& offsets,
                 std::size_t index, std::size_t start, std::size_t end) {
  const std::size_t b0 = offsets[start];
  const std::size_t b1 = offsets[end];
  return Chunk{index, std::string(text.substr(b0, b1 - b0)), start, end};
}

}  // namespace

std::size_t count_chars(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 0 || !is_continuation(text[i])) ++n;
  }
  return n;
}

std::string_view take_chars(std::string_view text, std::size_t max_chars) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 0 || !is_continuation(text[i])) {
      if (seen == max_chars) return text.substr(0, i);
      ++seen;
    }
  }
  return text;
}

TokenEstimate estimate_tokens(std::string_view text) {
  const std::size_t chars = count_chars(text);
  return {chars, (chars + kCharsPerToken - 1) / kCharsPerToken};
}

std::vector<Chunk> split_by_token_budget(std::string_view text,
                                         std::size_t budget_tokens,
                                         BoundaryPolicy policy) {
  if (budget_tokens == 0) {
    throw std::invalid_argument("split_by_token_budget: budget_tokens must be >= 1");
  }
  std::vector<Chunk> chunks;
  if (text.empty()) return chunks;

  const auto offsets = char_offsets(text);
  const std::size_t total = offsets.size() - 1;
  const std::size_t window = budget_tokens * kCharsPerToken;

  std::size_t start = 0;
  while (start < total) {
    std::size_t end = std::min(start + window, total);
    if (end < total && policy == BoundaryPolicy::nearest_whitespace) {
      const std::size_t floor =
          end - start > kWhitespaceSearchWindow ? end - kWhitespaceSearchWindow
                                                : start;
      // Cut just after the closest whitespace so it stays with this chunk.
      for (std::size_t i = end; i > floor; --i) {
        if (is_ascii_space(text[offsets[i - 1]])) {
          end = i;
          break;
        }
      }
    }
    chunks.push_back(make_chunk(text, offsets, chunks.size(), start, end));
    start = end;
  }
  return chunks;
}

std::vector<Chunk> split_by_char_window(std::string_view text,
                                        std::size_t window_chars,
                                        std::size_t overlap_chars) {
  if (window_chars == 0 || overlap_chars >= window_chars) {
    throw std::invalid_argument(
        "split_by_char_window: require 0 <= overlap < window");
  }
  std::vector<Chunk> chunks;
  if (text.empty()) return chunks;

  const auto offsets = char_offsets(text);
  const std::size_t total = offsets.size() - 1;
  const std::size_t step = window_chars - overlap_chars;

  for (std::size_t start = 0;; start += step) {
    const std::size_t end = std::min(start + window_chars, total);
    chunks.push_back(make_chunk(text, offsets, chunks.size(), start, end));
    if (end == total) break;
  }
  return chunks;
}

std::string_view to_string(BoundaryPolicy policy) {
  return policy == BoundaryPolicy::exact_char ? "exact_char"
                                              : "nearest_whitespace";
}

BoundaryPolicy parse_boundary_policy(std::string_view name) {
  if (name == "exact_char") return BoundaryPolicy::exact_char;
  if (name == "nearest_whitespace") return BoundaryPolicy::nearest_whitespace;
  throw std::invalid_argument("unknown boundary policy: " + std::string(name));
}

}  // namespace asc2end
