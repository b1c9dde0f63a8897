#pragma once

// Edit-annotated revision corpus: one XML file per (paper, editor).
//
//   <doc id=".." editor=".." format=".." position=".." region="..">
//     <abstract>
//       <text>...</text>
//       <edit type="conciseness" crr="revised" comments="...">source</edit>
//     </abstract>
//     <introduction>...</introduction>
//   </doc>
//
// An <edit>'s element content is the source phrase and `crr` the revised one;
// empty content is an insertion, empty `crr` a deletion.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "reveval/span.hpp"

namespace reveval {

enum class Aspect {
  Grammaticality,
  Fluency,
  Clarity,
  Style,
  Readability,
  Redundancy,
  Consistency,
  Other,
};

inline constexpr std::size_t kAspectCount = 8;

// Aspect table order, Other last.
inline constexpr std::array<Aspect, kAspectCount> kAllAspects = {
    Aspect::Grammaticality, Aspect::Fluency,    Aspect::Clarity,     Aspect::Style,
    Aspect::Readability,    Aspect::Redundancy, Aspect::Consistency, Aspect::Other,
};

std::string_view aspect_name(Aspect a);
std::optional<Aspect> aspect_from_name(std::string_view name);

// Grammaticality and Fluency are the aspects conventional GEC covers.
constexpr bool is_beyond_gec(Aspect a) { return a != Aspect::Grammaticality && a != Aspect::Fluency; }

struct EditAspect {
  Aspect aspect = Aspect::Other;
  std::string raw_label;

  bool operator==(const EditAspect&) const = default;
};

// Maps raw `type` labels onto aspects. Lookup is case-insensitive and treats
// '_', '-' and runs of whitespace as a single space. Unmapped labels go to the
// fallback aspect (Other unless reconfigured).
class LabelMap {
 public:
  static LabelMap defaults();

  // "label = Aspect" per line; '#' starts a comment. Entries extend defaults.
  static LabelMap from_file(const std::filesystem::path& path);

  void set(std::string_view label, Aspect aspect);
  void set_fallback(Aspect aspect) { fallback_ = aspect; }
  Aspect lookup(std::string_view raw_label) const;

  static std::string normalize(std::string_view label);

 private:
  std::map<std::string, Aspect> table_;
  Aspect fallback_ = Aspect::Other;
};

// Splits a multi-label `type` attribute on ',' or ';'.
std::vector<EditAspect> parse_labels(std::string_view type_attr, const LabelMap& map);

struct Edit {
  std::string src;
  std::string tgt;
  std::string type;  // raw `type` attribute, kept for exact serialization
  std::vector<EditAspect> labels;
  std::optional<std::string> comment;
  Span span;  // source coordinates
  std::map<std::string, std::string> extra_attributes;

  bool is_insertion() const { return src.empty(); }
  bool is_deletion() const { return tgt.empty(); }
  bool operator==(const Edit&) const = default;
};

struct TextNode {
  std::string text;
  bool operator==(const TextNode&) const = default;
};

using Node = std::variant<TextNode, Edit>;

enum class SectionKind { Title, Abstract, Introduction };

std::string_view section_name(SectionKind kind);
std::optional<SectionKind> section_from_name(std::string_view name);

struct Section {
  SectionKind kind = SectionKind::Abstract;
  std::vector<Node> nodes;
  bool operator==(const Section&) const = default;
};

enum class Venue { Conference, Workshop };
enum class Position { Student, NonStudent };
enum class Region { Native, NonNative };

std::string_view to_string(Venue v);
std::string_view to_string(Position p);
std::string_view to_string(Region r);

struct DocMeta {
  Venue format = Venue::Conference;
  Position position = Position::Student;
  Region region = Region::Native;
  bool operator==(const DocMeta&) const = default;
};

struct Document {
  std::string id;
  std::string editor;
  DocMeta meta;
  std::vector<Section> sections;
  std::map<std::string, std::string> extra_attributes;

  bool operator==(const Document&) const = default;
};

// Sections are joined with this separator in source and revised coordinates.
inline constexpr std::string_view kSectionSeparator = "\n\n";

struct ParseOptions {
  LabelMap labels = LabelMap::defaults();
};

// Parses one XML document. `origin` names the file in diagnostics.
Document parse_document(std::string_view xml, std::string_view origin, const ParseOptions& options = {});

Document parse_file(const std::filesystem::path& path, const ParseOptions& options = {});

// A directory is read as every *.xml file in it, sorted by file name; files
// are parsed in parallel and returned in that order. Throws the first error.
std::vector<Document> parse_corpus(const std::filesystem::path& path, const ParseOptions& options = {}, int jobs = 0);

struct CorpusLoad {
  std::vector<Document> documents;
  std::vector<std::string> errors;  // one message per failed file
};

// Like parse_corpus but collects per-file errors instead of throwing.
CorpusLoad load_corpus(const std::filesystem::path& path, const ParseOptions& options = {}, int jobs = 0);

std::string serialize(const Document& doc);

std::string source_text(const Document& doc);
std::string source_text(const Document& doc, SectionKind section);  // throws UsageError if absent
std::string revised_text(const Document& doc);

struct EditRef {
  std::size_t section = 0;
  std::size_t node = 0;
  const Edit* edit = nullptr;
};

// Edits in document order; the position in this list is the edit index.
std::vector<EditRef> edits(const Document& doc);

struct ParagraphPiece {
  std::string_view text;  // valid when edit < 0
  long edit = -1;         // global edit index otherwise
};

struct Paragraph {
  std::size_t section = 0;
  std::size_t index = 0;  // document-wide
  std::vector<ParagraphPiece> pieces;
  std::vector<std::size_t> edit_indices;
  Span source_span;  // trimmed extent in source coordinates
};

// Paragraphs split at "\n\n" in text nodes (also the literal two-character
// escape sequence "\n\n"); a title section is one paragraph. Paragraphs with
// no text and no edits are dropped. Views point into `doc`.
std::vector<Paragraph> paragraphs(const Document& doc);

enum class Rendering { Source, Revised };

// Trimmed paragraph text. With `only_edit`, that edit alone is rendered with
// its target and all others with their source.
std::string render(const Document& doc, const Paragraph& para, Rendering mode);
std::string render_single(const Document& doc, const Paragraph& para, std::size_t only_edit);

// (source paragraph, paragraph with only `edit_index` applied).
std::pair<std::string, std::string> apply_single_edit(const Document& doc, std::size_t edit_index);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t edits = 0;
  std::size_t label_occurrences = 0;
  std::array<std::size_t, kAspectCount> counts{};
  std::array<double, kAspectCount> percent{};
  double beyond_gec_ratio = 0.0;
  // Keyed "format=Conference", "position=Student", "region=Native", ...
  std::map<std::string, std::array<std::size_t, kAspectCount>> breakdown;
};

CorpusStats corpus_stats(std::span<const Document> docs);

}  // namespace reveval
