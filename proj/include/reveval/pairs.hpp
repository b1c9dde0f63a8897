#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reveval/corpus.hpp"

namespace reveval {

// Which side of a pair is the better text. Gold pairs come from annotated
// edits (the revised side is better); Worse pairs come from corruption (the
// source side is better).
enum class PairKind { Gold, Worse };

std::string_view to_string(PairKind k);

struct SnippetPair {
  std::string source;
  std::string revised;
  EditAspect aspect;
  std::string doc_id;
  std::string editor;
  std::size_t paragraph_index = 0;
  std::size_t edit_index = 0;
  PairKind kind = PairKind::Gold;

  bool revised_is_better() const { return kind == PairKind::Gold; }
  bool operator==(const SnippetPair&) const = default;
};

struct SplitSpec {
  std::set<std::string> train_doc_ids;
  std::set<std::string> test_doc_ids;
  std::uint64_t seed = 0;
};

struct ExtractionResult {
  std::vector<SnippetPair> pairs;
  // Edits dropped because their paragraph was not found or the single-edit
  // rendering equals the source (e.g. whitespace-only edits at a boundary).
  std::size_t skipped = 0;
};

// One pair per (edit, label), in (document, paragraph, edit, label) order.
// With `doc_ids`, only documents whose id is in the set are used.
ExtractionResult extract_pairs(std::span<const Document> docs, const std::set<std::string>* doc_ids = nullptr, int jobs = 0);

// Paragraph-granular pairs (source paragraph, fully revised paragraph) for
// every paragraph with at least one edit; used as classifier training data.
// The aspect is Other with raw label "paragraph".
ExtractionResult extract_paragraph_pairs(std::span<const Document> docs, const std::set<std::string>* doc_ids = nullptr);

// Paper-level split: every editor's version of a paper lands on the same side.
// `train_parts:test_parts` is the ratio; throws UsageError if either side
// would be empty.
SplitSpec split_corpus(std::span<const Document> docs, unsigned train_parts, unsigned test_parts, std::uint64_t seed);

struct TrainingPair {
  std::string a;
  std::string b;
  // 1 when the revised (better) text is in slot b, 0 when swapped into a.
  int label = 1;
  std::string aspect;
};

// Exactly round(swap_fraction * n) pairs carry the revised text in slot a;
// output order is a seeded shuffle.
std::vector<TrainingPair> export_training_pairs(std::span<const SnippetPair> pairs, double swap_fraction, std::uint64_t seed);

// JSON-lines: one object per pair with keys source, revised, aspect,
// raw_label, doc_id, editor, paragraph_index, edit_index, kind.
void write_pairs_jsonl(std::ostream& out, std::span<const SnippetPair> pairs);
std::vector<SnippetPair> read_pairs_jsonl(std::istream& in);
void write_pairs_csv(std::ostream& out, std::span<const SnippetPair> pairs);
void write_training_jsonl(std::ostream& out, std::span<const TrainingPair> pairs);

// One id per line; blank lines and '#' comments ignored.
std::set<std::string> read_id_file(const std::filesystem::path& path);
void write_id_file(const std::filesystem::path& path, const std::set<std::string>& ids);

}  // namespace reveval
