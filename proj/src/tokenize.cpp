#include "reveval/tokenize.hpp"

#include <array>
#include <cctype>

#include "reveval/text.hpp"

namespace reveval {

namespace {

constexpr std::array<std::string_view, 10> kWidePunct = {
    "“", "”", "‘", "’", "–", "—", "…", "«", "»", "·",
};

// Byte length of a punctuation character at the start (or end) of `s`, 0 if none.
std::size_t punct_prefix(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.front()))) return 1;
  for (auto p : kWidePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

std::size_t punct_suffix(std::string_view s) {
  if (s.empty()) return 0;
  if (std::ispunct(static_cast<unsigned char>(s.back()))) return 1;
  for (auto p : kWidePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

}  // namespace

bool is_punctuation_token(std::string_view token) {
  return !token.empty() && punct_prefix(token) == token.size();
}

std::string TokenSeq::join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out += whitespace[i];
    out += tokens[i];
  }
  if (whitespace.size() > tokens.size()) out += whitespace.back();
  return out;
}

TokenSeq tokenize(std::string_view input) {
  TokenSeq seq;
  std::size_t pos = 0;
  std::size_t gap_start = 0;
  auto emit = [&](std::size_t b, std::size_t e) {
    seq.whitespace.emplace_back(input.substr(gap_start, b - gap_start));
    seq.tokens.emplace_back(input.substr(b, e - b));
    seq.offsets.push_back({b, e});
    gap_start = e;
  };
  while (pos < input.size()) {
    if (text::is_space(input[pos])) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < input.size() && !text::is_space(input[end])) ++end;
    std::size_t b = pos, e = end;
    // Leading punctuation.
    while (b < e) {
      auto n = punct_prefix(input.substr(b, e - b));
      if (n == 0) break;
      emit(b, b + n);
      b += n;
    }
    // Trailing punctuation, collected right to left.
    std::vector<Span> trailing;
    while (e > b) {
      auto n = punct_suffix(input.substr(b, e - b));
      if (n == 0) break;
      trailing.push_back({e - n, e});
      e -= n;
    }
    if (e > b) emit(b, e);
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) emit(it->begin, it->end);
    pos = end;
  }
  seq.whitespace.emplace_back(input.substr(gap_start));
  return seq;
}

std::vector<std::string> tokenize_words(std::string_view text) { return tokenize(text).tokens; }

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace reveval
