#include "reveval/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "reveval/error.hpp"
#include "parallel.hpp"
#include "reveval/text.hpp"
#include "xml.hpp"

namespace reveval {

namespace {

constexpr std::array<std::string_view, kAspectCount> kAspectNames = {
    "Grammaticality", "Fluency", "Clarity", "Style", "Readability", "Redundancy", "Consistency", "Other",
};

// Lowercase with '-', '_' and spaces removed; used for enum-valued attributes.
std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_' || text::is_space(c)) continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::string_view aspect_name(Aspect a) { return kAspectNames[static_cast<std::size_t>(a)]; }

std::optional<Aspect> aspect_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kAspectCount; ++i) {
    if (text::iequals(kAspectNames[i], text::trim(name))) return kAllAspects[i];
  }
  return std::nullopt;
}

std::string LabelMap::normalize(std::string_view label) {
  std::string out;
  bool pending_space = false;
  for (char c : text::trim(label)) {
    if (c == '_' || c == '-' || text::is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

LabelMap LabelMap::defaults() {
  LabelMap m;
  m.set("grammar", Aspect::Grammaticality);
  m.set("capitalization", Aspect::Grammaticality);
  m.set("punctuation", Aspect::Grammaticality);
  m.set("spelling", Aspect::Grammaticality);
  m.set("word choice", Aspect::Fluency);
  m.set("word order", Aspect::Fluency);
  m.set("clarity", Aspect::Clarity);
  m.set("style", Aspect::Style);
  m.set("tone", Aspect::Style);
  m.set("readability", Aspect::Readability);
  m.set("redundancy", Aspect::Redundancy);
  m.set("conciseness", Aspect::Redundancy);
  m.set("consistency", Aspect::Consistency);
  m.set("flow", Aspect::Consistency);
  return m;
}

LabelMap LabelMap::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open label map " + path.string());
  LabelMap m = defaults();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto body = text::trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(lineno) + ": expected 'label = Aspect'");
    }
    auto label = text::trim(body.substr(0, eq));
    auto aspect = aspect_from_name(body.substr(eq + 1));
    if (!aspect) throw UsageError(path.string() + ":" + std::to_string(lineno) + ": unknown aspect");
    if (label == "*") {
      m.set_fallback(*aspect);
    } else {
      m.set(label, *aspect);
    }
  }
  return m;
}

void LabelMap::set(std::string_view label, Aspect aspect) { table_[normalize(label)] = aspect; }

Aspect LabelMap::lookup(std::string_view raw_label) const {
  auto it = table_.find(normalize(raw_label));
  return it == table_.end() ? fallback_ : it->second;
}

std::vector<EditAspect> parse_labels(std::string_view type_attr, const LabelMap& map) {
  std::vector<EditAspect> out;
  std::size_t start = 0;
  while (start <= type_attr.size()) {
    auto pos = type_attr.find_first_of(",;", start);
    auto piece = text::trim(type_attr.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back({map.lookup(piece), std::string(piece)});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view section_name(SectionKind kind) {
  switch (kind) {
    case SectionKind::Title: return "title";
    case SectionKind::Abstract: return "abstract";
    case SectionKind::Introduction: return "introduction";
  }
  return "abstract";
}

std::optional<SectionKind> section_from_name(std::string_view name) {
  if (name == "title") return SectionKind::Title;
  if (name == "abstract") return SectionKind::Abstract;
  if (name == "introduction") return SectionKind::Introduction;
  return std::nullopt;
}

std::string_view to_string(Venue v) { return v == Venue::Conference ? "Conference" : "Workshop"; }
std::string_view to_string(Position p) { return p == Position::Student ? "Student" : "Non-student"; }
std::string_view to_string(Region r) { return r == Region::Native ? "Native" : "Non-native"; }

namespace {

class DocumentBuilder {
 public:
  DocumentBuilder(std::string_view origin, const ParseOptions& options) : origin_(origin), options_(options) {}

  Document build(const xml::Node& root) {
    if (root.name != "doc") schema(root, "root element must be <doc>, found <" + root.name + ">");
    Document doc;
    doc.id = required(root, "id");
    doc.editor = required(root, "editor");
    doc.meta.format = venue(root, required(root, "format"));
    doc.meta.position = position(root, required(root, "position"));
    doc.meta.region = region(root, required(root, "region"));
    for (const auto& [k, v] : root.attributes) {
      if (k != "id" && k != "editor" && k != "format" && k != "position" && k != "region") {
        doc.extra_attributes[k] = v;
      }
    }
    for (const auto& child : root.children) {
      if (child.kind == xml::Node::Kind::Text) {
        if (!text::trim(child.text).empty()) schema(child, "unexpected character data inside <doc>");
        continue;
      }
      auto kind = section_from_name(child.name);
      if (!kind) schema(child, "unknown section <" + child.name + ">");
      doc.sections.push_back(section(child, *kind));
    }
    assign_spans(doc);
    return doc;
  }

 private:
  [[noreturn]] void schema(const xml::Node& at, const std::string& what) const {
    throw SchemaError(std::string(origin_) + ":" + std::to_string(at.line) + ": " + what);
  }

  std::string required(const xml::Node& el, std::string_view key) const {
    const auto* v = el.attribute(key);
    if (!v) schema(el, "missing required attribute '" + std::string(key) + "' on <" + el.name + ">");
    return *v;
  }

  Venue venue(const xml::Node& el, std::string_view v) const {
    auto s = squash(v);
    if (s == "conference" || s == "conf" || s == "conf.") return Venue::Conference;
    if (s == "workshop" || s == "ws") return Venue::Workshop;
    schema(el, "attribute 'format' must be Conference or Workshop, got '" + std::string(v) + "'");
  }

  Position position(const xml::Node& el, std::string_view v) const {
    auto s = squash(v);
    if (s == "student") return Position::Student;
    if (s == "nonstudent") return Position::NonStudent;
    schema(el, "attribute 'position' must be Student or Non-student, got '" + std::string(v) + "'");
  }

  Region region(const xml::Node& el, std::string_view v) const {
    auto s = squash(v);
    if (s == "native") return Region::Native;
    if (s == "nonnative") return Region::NonNative;
    schema(el, "attribute 'region' must be Native or Non-native, got '" + std::string(v) + "'");
  }

  std::string leaf_text(const xml::Node& el) const {
    std::string out;
    for (const auto& c : el.children) {
      if (c.kind == xml::Node::Kind::Element) {
        schema(c, "<" + c.name + "> nested inside <" + el.name + ">: maximum tag depth is two");
      }
      out += c.text;
    }
    return out;
  }

  Section section(const xml::Node& el, SectionKind kind) const {
    if (!el.attributes.empty()) schema(el, "unexpected attribute '" + el.attributes.front().first + "' on <" + el.name + ">");
    Section sec;
    sec.kind = kind;
    for (const auto& child : el.children) {
      if (child.kind == xml::Node::Kind::Text) {
        if (!text::trim(child.text).empty()) {
          schema(child, "unexpected character data inside <" + el.name + ">; wrap it in <text>");
        }
        continue;
      }
      if (child.name == "text") {
        if (!child.attributes.empty()) schema(child, "unexpected attribute '" + child.attributes.front().first + "' on <text>");
        sec.nodes.emplace_back(TextNode{leaf_text(child)});
      } else if (child.name == "edit") {
        sec.nodes.emplace_back(edit(child));
      } else {
        schema(child, "unexpected element <" + child.name + "> inside <" + el.name + ">");
      }
    }
    return sec;
  }

  Edit edit(const xml::Node& el) const {
    Edit e;
    e.type = required(el, "type");
    e.tgt = required(el, "crr");
    if (const auto* c = el.attribute("comments")) e.comment = *c;
    for (const auto& [k, v] : el.attributes) {
      if (k != "type" && k != "crr" && k != "comments") e.extra_attributes[k] = v;
    }
    e.src = leaf_text(el);
    e.labels = parse_labels(e.type, options_.labels);
    if (e.labels.empty()) schema(el, "attribute 'type' on <edit> has no labels");
    return e;
  }

  void assign_spans(Document& doc) const {
    std::size_t offset = 0;
    for (std::size_t s = 0; s < doc.sections.size(); ++s) {
      if (s > 0) offset += kSectionSeparator.size();
      for (auto& node : doc.sections[s].nodes) {
        if (auto* t = std::get_if<TextNode>(&node)) {
          offset += t->text.size();
        } else {
          auto& e = std::get<Edit>(node);
          if (e.src.empty() && e.tgt.empty()) {
            throw ValidationError(std::string(origin_) + ": doc " + doc.id + " (editor " + doc.editor +
                                  "): edit at offset " + std::to_string(offset) +
                                  " has empty source and empty correction");
          }
          e.span = {offset, offset + e.src.size()};
          offset += e.src.size();
        }
      }
    }
  }

  std::string_view origin_;
  const ParseOptions& options_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw UsageError("corpus path does not exist: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  return files;
}

}  // namespace

Document parse_document(std::string_view xml_text, std::string_view origin, const ParseOptions& options) {
  auto root = xml::parse(xml_text, origin);
  return DocumentBuilder(origin, options).build(root);
}

Document parse_file(const std::filesystem::path& path, const ParseOptions& options) {
  auto data = read_file(path);
  return parse_document(data, path.string(), options);
}

CorpusLoad load_corpus(const std::filesystem::path& path, const ParseOptions& options, int jobs) {
  auto files = corpus_files(path);
  std::vector<std::optional<Document>> parsed(files.size());
  std::vector<std::string> errors(files.size());
  const long n = static_cast<long>(files.size());
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_jobs(jobs))
  for (long i = 0; i < n; ++i) {
    try {
      parsed[i] = parse_file(files[i], options);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  CorpusLoad out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (parsed[i]) out.documents.push_back(std::move(*parsed[i]));
    if (!errors[i].empty()) out.errors.push_back(std::move(errors[i]));
  }
  return out;
}

std::vector<Document> parse_corpus(const std::filesystem::path& path, const ParseOptions& options, int jobs) {
  auto files = corpus_files(path);
  std::vector<std::optional<Document>> parsed(files.size());
  std::vector<std::exception_ptr> failures(files.size());
  const long n = static_cast<long>(files.size());
#pragma omp parallel for schedule(dynamic) num_threads(detail::resolve_jobs(jobs))
  for (long i = 0; i < n; ++i) {
    try {
      parsed[i] = parse_file(files[i], options);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  std::vector<Document> docs;
  docs.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (failures[i]) std::rethrow_exception(failures[i]);
    docs.push_back(std::move(*parsed[i]));
  }
  return docs;
}

std::string serialize(const Document& doc) {
  std::string out;
  auto attr = [&out](std::string_view k, std::string_view v) {
    out += ' ';
    out += k;
    out += "=\"";
    out += xml::escape_attribute(v);
    out += '"';
  };
  out += "<doc";
  attr("id", doc.id);
  attr("editor", doc.editor);
  attr("format", to_string(doc.meta.format));
  attr("position", to_string(doc.meta.position));
  attr("region", to_string(doc.meta.region));
  for (const auto& [k, v] : doc.extra_attributes) attr(k, v);
  out += ">\n";
  for (const auto& sec : doc.sections) {
    out += '<';
    out += section_name(sec.kind);
    out += ">\n";
    for (const auto& node : sec.nodes) {
      if (const auto* t = std::get_if<TextNode>(&node)) {
        out += "<text>" + xml::escape_text(t->text) + "</text>\n";
      } else {
        const auto& e = std::get<Edit>(node);
        out += "<edit";
        attr("type", e.type);
        attr("crr", e.tgt);
        if (e.comment) attr("comments", *e.comment);
        for (const auto& [k, v] : e.extra_attributes) attr(k, v);
        out += ">" + xml::escape_text(e.src) + "</edit>\n";
      }
    }
    out += "</";
    out += section_name(sec.kind);
    out += ">\n";
  }
  out += "</doc>\n";
  return out;
}

namespace {

std::string render_section(const Section& sec, bool revised) {
  std::string out;
  for (const auto& node : sec.nodes) {
    if (const auto* t = std::get_if<TextNode>(&node)) {
      out += t->text;
    } else {
      const auto& e = std::get<Edit>(node);
      out += revised ? e.tgt : e.src;
    }
  }
  return out;
}

std::string render_document(const Document& doc, bool revised) {
  std::string out;
  for (std::size_t s = 0; s < doc.sections.size(); ++s) {
    if (s > 0) out += kSectionSeparator;
    out += render_section(doc.sections[s], revised);
  }
  return out;
}

}  // namespace

std::string source_text(const Document& doc) { return render_document(doc, false); }

std::string source_text(const Document& doc, SectionKind section) {
  for (const auto& sec : doc.sections) {
    if (sec.kind == section) return render_section(sec, false);
  }
  throw UsageError("document " + doc.id + " has no section '" + std::string(section_name(section)) + "'");
}

std::string revised_text(const Document& doc) { return render_document(doc, true); }

std::vector<EditRef> edits(const Document& doc) {
  std::vector<EditRef> out;
  for (std::size_t s = 0; s < doc.sections.size(); ++s) {
    const auto& nodes = doc.sections[s].nodes;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (const auto* e = std::get_if<Edit>(&nodes[n])) out.push_back({s, n, e});
    }
  }
  return out;
}

namespace {

// Earliest paragraph delimiter at or after `from`: a real blank line or the
// escaped form. Returns (position, length) or npos.
std::pair<std::size_t, std::size_t> find_delimiter(std::string_view s, std::size_t from) {
  auto real = s.find("\n\n", from);
  auto escaped = s.find("\\n\\n", from);
  if (real == std::string_view::npos && escaped == std::string_view::npos) return {std::string_view::npos, 0};
  if (escaped == std::string_view::npos || (real != std::string_view::npos && real <= escaped)) return {real, 2};
  return {escaped, 4};
}

struct ParagraphBuilder {
  const Document& doc;
  std::vector<Paragraph> out;
  Paragraph current;
  std::size_t raw_begin = 0;
  std::size_t raw_end = 0;
  bool has_content = false;

  void start(std::size_t section, std::size_t offset) {
    current = Paragraph{};
    current.section = section;
    raw_begin = raw_end = offset;
    has_content = false;
  }

  void add_text(std::string_view t, std::size_t offset) {
    if (t.empty()) return;
    current.pieces.push_back({t, -1});
    raw_end = offset + t.size();
    if (!text::trim(t).empty()) has_content = true;
  }

  void add_edit(std::size_t index, const Edit& e) {
    current.pieces.push_back({{}, static_cast<long>(index)});
    current.edit_indices.push_back(index);
    raw_end = e.span.end;
    has_content = true;
  }

  void finish() {
    if (!has_content) return;
    std::string raw;
    for (const auto& p : current.pieces) {
      raw += p.edit < 0 ? std::string(p.text) : edits_cache[static_cast<std::size_t>(p.edit)]->src;
    }
    std::size_t lead = 0;
    while (lead < raw.size() && text::is_space(raw[lead])) ++lead;
    std::size_t trail = 0;
    while (trail < raw.size() - lead && text::is_space(raw[raw.size() - 1 - trail])) ++trail;
    current.source_span = {raw_begin + lead, raw_begin + raw.size() - trail};
    current.index = out.size();
    out.push_back(std::move(current));
  }

  std::vector<const Edit*> edits_cache;
};

}  // namespace

std::vector<Paragraph> paragraphs(const Document& doc) {
  ParagraphBuilder b{doc, {}, {}, 0, 0, false, {}};
  for (const auto& ref : edits(doc)) b.edits_cache.push_back(ref.edit);

  std::size_t offset = 0;
  std::size_t edit_index = 0;
  for (std::size_t s = 0; s < doc.sections.size(); ++s) {
    if (s > 0) offset += kSectionSeparator.size();
    const auto& sec = doc.sections[s];
    b.start(s, offset);
    const bool splittable = sec.kind != SectionKind::Title;
    for (const auto& node : sec.nodes) {
      if (const auto* t = std::get_if<TextNode>(&node)) {
        std::string_view body = t->text;
        std::size_t pos = 0;
        while (splittable) {
          auto [at, len] = find_delimiter(body, pos);
          if (at == std::string_view::npos) break;
          b.add_text(body.substr(pos, at - pos), offset + pos);
          b.finish();
          pos = at + len;
          b.start(s, offset + pos);
        }
        b.add_text(body.substr(pos), offset + pos);
        offset += body.size();
      } else {
        const auto& e = std::get<Edit>(node);
        b.add_edit(edit_index++, e);
        offset += e.src.size();
      }
    }
    b.finish();
  }
  return std::move(b.out);
}

namespace {

std::string render_pieces(const Document& doc, const Paragraph& para, Rendering mode, long only_edit) {
  auto refs = edits(doc);
  std::string out;
  for (const auto& p : para.pieces) {
    if (p.edit < 0) {
      out += p.text;
      continue;
    }
    const Edit& e = *refs[static_cast<std::size_t>(p.edit)].edit;
    bool apply = only_edit >= 0 ? p.edit == only_edit : mode == Rendering::Revised;
    out += apply ? e.tgt : e.src;
  }
  return std::string(text::trim(out));
}

}  // namespace

std::string render(const Document& doc, const Paragraph& para, Rendering mode) {
  return render_pieces(doc, para, mode, -1);
}

std::string render_single(const Document& doc, const Paragraph& para, std::size_t only_edit) {
  return render_pieces(doc, para, Rendering::Source, static_cast<long>(only_edit));
}

std::pair<std::string, std::string> apply_single_edit(const Document& doc, std::size_t edit_index) {
  for (const auto& para : paragraphs(doc)) {
    if (std::find(para.edit_indices.begin(), para.edit_indices.end(), edit_index) != para.edit_indices.end()) {
      return {render(doc, para, Rendering::Source), render_single(doc, para, edit_index)};
    }
  }
  throw std::out_of_range("edit index " + std::to_string(edit_index) + " out of range for document " + doc.id);
}

CorpusStats corpus_stats(std::span<const Document> docs) {
  CorpusStats st;
  st.documents = docs.size();
  for (const auto& doc : docs) {
    const std::array<std::string, 3> keys = {
        "format=" + std::string(to_string(doc.meta.format)),
        "position=" + std::string(to_string(doc.meta.position)),
        "region=" + std::string(to_string(doc.meta.region)),
    };
    for (const auto& ref : edits(doc)) {
      ++st.edits;
      for (const auto& label : ref.edit->labels) {
        auto a = static_cast<std::size_t>(label.aspect);
        ++st.label_occurrences;
        ++st.counts[a];
        for (const auto& k : keys) ++st.breakdown[k][a];
      }
    }
  }
  std::size_t beyond = 0;
  for (std::size_t a = 0; a < kAspectCount; ++a) {
    st.percent[a] = st.label_occurrences ? 100.0 * static_cast<double>(st.counts[a]) / static_cast<double>(st.label_occurrences) : 0.0;
    if (is_beyond_gec(kAllAspects[a])) beyond += st.counts[a];
  }
  st.beyond_gec_ratio = st.label_occurrences ? static_cast<double>(beyond) / static_cast<double>(st.label_occurrences) : 0.0;
  return st;
}

}  // namespace reveval
