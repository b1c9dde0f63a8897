#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reveval/span.hpp"

namespace reveval {

struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<Span> offsets;            // byte spans in the original text
  std::vector<std::string> whitespace;  // gap before each token, plus the trailing gap

  std::size_t size() const { return tokens.size(); }
  // Reassembles the original string.
  std::string join() const;
};

// Whitespace split, then leading and trailing punctuation of each chunk is
// peeled off into one-character tokens. Curly quotes, dashes and the ellipsis
// character count as punctuation. Case is preserved.
TokenSeq tokenize(std::string_view text);

std::vector<std::string> tokenize_words(std::string_view text);

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep = " ");

bool is_punctuation_token(std::string_view token);

}  // namespace reveval
