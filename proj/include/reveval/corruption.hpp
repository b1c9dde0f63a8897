#pragma once

// Worse-quality revisions for reliability checks: rule-based grammatical
// noise plus sentence shuffling on a fraction of documents.
//
// Confusion sets are fixed:
//   articles      a, an, the (article_drop removes, article_swap substitutes)
//   prepositions  in, on, at, for, to, of, with
//   verb forms    -ing / -ed / -s suffix swaps on alphabetic words of 4+ letters

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reveval/alignment.hpp"
#include "reveval/corpus.hpp"
#include "reveval/pairs.hpp"

namespace reveval {

enum class NoiseRule { ArticleDrop, ArticleSwap, PrepositionSwap, VerbFormPerturb, AdjacentSwap, CommaToggle };

inline constexpr std::size_t kNoiseRuleCount = 6;
inline constexpr std::array<NoiseRule, kNoiseRuleCount> kAllNoiseRules = {
    NoiseRule::ArticleDrop,     NoiseRule::ArticleSwap,  NoiseRule::PrepositionSwap,
    NoiseRule::VerbFormPerturb, NoiseRule::AdjacentSwap, NoiseRule::CommaToggle,
};

std::string_view rule_name(NoiseRule r);

struct NoiseConfig {
  std::uint64_t seed = 0;
  std::array<double, kNoiseRuleCount> rates = {0.15, 0.1, 0.15, 0.1, 0.03, 0.1};
  double shuffle_doc_fraction = 0.05;

  double& rate(NoiseRule r) { return rates[static_cast<std::size_t>(r)]; }
  double rate(NoiseRule r) const { return rates[static_cast<std::size_t>(r)]; }

  static NoiseConfig zero();
  // Flat "key = value" lines; keys are the rule names, seed and
  // shuffle_doc_fraction. Throws UsageError on unknown keys or rates outside [0, 1].
  static NoiseConfig parse(std::string_view text);
  static NoiseConfig load(const std::filesystem::path& path);
};

struct ShuffleResult {
  std::string text;
  bool shuffled = false;  // false when the paragraph has fewer than two sentences
};

// Seeded permutation of the sentences, never the identity; sentences are
// rejoined with single spaces.
ShuffleResult shuffle_sentences(std::string_view paragraph, std::uint64_t seed);

struct NoiseResult {
  std::string text;
  std::vector<EditSpan> spans;  // over tokenize(paragraph), sorted
  std::array<std::size_t, kNoiseRuleCount> eligible{};
  std::array<std::size_t, kNoiseRuleCount> applied{};
};

// Every (rule, site) pair draws independently from hash(seed, rule, site);
// rules run in the order above and a site is skipped when an earlier rule
// already changed one of its tokens.
NoiseResult inject_noise(std::string_view paragraph, const NoiseConfig& cfg);

struct WorseTestset {
  std::vector<SnippetPair> pairs;
  std::set<std::string> shuffled_docs;
  std::size_t identity_filtered = 0;
};

// One document per paper id (the lexicographically first editor), source
// paragraphs only. round(fraction * papers) documents (at least one when the
// fraction is positive) are sentence-shuffled on top of the noise. Pairs are
// kind Worse: the source side is the better one. Aspect is Consistency for
// shuffled paragraphs and Grammaticality otherwise.
WorseTestset build_worse_testset(std::span<const Document> docs, const NoiseConfig& cfg, int jobs = 0);

// Number of shuffled documents for n papers.
std::size_t shuffled_document_count(std::size_t papers, double fraction);

}  // namespace reveval
