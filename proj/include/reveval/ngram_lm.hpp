#pragma once

// Word n-gram language model with interpolated modified Kneser-Ney smoothing.
//
// Sentences are padded with one <s> and terminated with </s>. The highest
// order uses raw counts; lower orders use continuation counts N1+(. g),
// except for n-grams beginning with <s>, which have no left context and keep
// raw counts. Each order has three discounts D1, D2, D3+ estimated from
// count-of-counts; when those are degenerate the order falls back to a
// single absolute discount of 0.75. The unigram level interpolates with the
// uniform distribution over the predictable vocabulary (all words, </s> and
// <unk>), so every probability is positive.
//
// Perplexity counts </s> but not <s>.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reveval {

using WordId = std::uint32_t;

struct NgramOptions {
  int order = 3;
  std::uint64_t min_count = 1;  // tokens seen fewer times become <unk>
};

struct Discounts {
  double d1 = 0.75, d2 = 0.75, d3 = 0.75;
  bool fallback = false;
  bool operator==(const Discounts&) const = default;
};

class NgramModel {
 public:
  static constexpr WordId kBos = 0;
  static constexpr WordId kEos = 1;
  static constexpr WordId kUnk = 2;

  // Throws UsageError on an empty corpus or order < 1.
  static NgramModel fit(std::span<const std::vector<std::string>> sentences, const NgramOptions& options = {});

  int order() const { return order_; }
  std::size_t vocabulary_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const Discounts& discounts(int n) const { return levels_[static_cast<std::size_t>(n - 1)].discounts; }

  WordId id(std::string_view word) const;

  // p(word | context); only the last order-1 context ids are used.
  double prob(WordId word, std::span<const WordId> context) const;

  // Sum of ln p(w_i | history) over the tokens, plus ln p(</s> | ...) when
  // `terminate` is set. Throws UsageError on an empty token list.
  double log_prob(std::span<const std::string> tokens, bool terminate = true) const;

  // exp(-log_prob / N), N = token count + 1 for </s>.
  double perplexity(std::span<const std::string> tokens) const;

  // Sentences are scored independently and pooled: exp(-sum log_prob / sum N).
  double perplexity(std::span<const std::vector<std::string>> sentences) const;

  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);
  void save_file(const std::filesystem::path& path) const;
  static NgramModel load_file(const std::filesystem::path& path);

 private:
  struct ContextStats {
    std::uint64_t total = 0;  // sum of adjusted counts of children
    std::uint64_t n1 = 0, n2 = 0, n3 = 0;
  };

  struct Level {
    std::unordered_map<std::string, std::uint64_t> counts;  // adjusted counts by packed n-gram
    std::unordered_map<std::string, ContextStats> contexts;
    Discounts discounts;
  };

  void finalize();
  double discount(const Discounts& d, std::uint64_t count) const;

  int order_ = 3;
  std::uint64_t min_count_ = 1;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<Level> levels_;
};

}  // namespace reveval
