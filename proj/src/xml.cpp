#include "xml.hpp"

#include <cstdint>

#include "reveval/error.hpp"

namespace reveval::xml {

const std::string* Node::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

namespace {

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Reader {
 public:
  Reader(std::string_view in, std::string_view origin) : in_(in), origin_(origin) {}

  Node document() {
    if (in_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    skip_misc();
    if (eof() || peek() != '<') fail("expected root element");
    Node root = element();
    skip_misc();
    if (!eof()) fail("content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(std::string(origin_), line_, what); }

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool starts(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < in_.size(); ++i) {
      if (in_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  void skip_ws() {
    while (!eof() && is_ws(peek())) advance();
  }

  void skip_until(std::string_view terminator, const char* what) {
    while (!eof() && !starts(terminator)) advance();
    if (eof()) fail(std::string("unterminated ") + what);
    advance(terminator.size());
  }

  // Whitespace, comments, processing instructions and DOCTYPE outside the root.
  void skip_misc() {
    while (true) {
      skip_ws();
      if (starts("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts("<!--")) {
        skip_until("-->", "comment");
      } else if (starts("<!DOCTYPE")) {
        int depth = 0;
        while (!eof()) {
          char c = peek();
          advance();
          if (c == '[') ++depth;
          if (c == ']') --depth;
          if (c == '>' && depth <= 0) break;
        }
      } else {
        return;
      }
    }
  }

  std::string name() {
    if (eof() || !is_name_start(peek())) fail("expected name");
    std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) advance();
    return std::string(in_.substr(start, pos_ - start));
  }

  void reference(std::string& out) {
    // at '&'
    advance();
    std::size_t start = pos_;
    while (!eof() && peek() != ';' && pos_ - start < 12) advance();
    if (eof() || peek() != ';') fail("unterminated entity reference");
    std::string_view ent = in_.substr(start, pos_ - start);
    advance();
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      std::string_view digits = ent.substr(hex ? 2 : 1);
      if (digits.empty()) fail("empty character reference");
      for (char d : digits) {
        int v;
        if (d >= '0' && d <= '9') v = d - '0';
        else if (hex && d >= 'a' && d <= 'f') v = d - 'a' + 10;
        else if (hex && d >= 'A' && d <= 'F') v = d - 'A' + 10;
        else fail("bad character reference &" + std::string(ent) + ";");
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
        if (cp > 0x10FFFF) fail("character reference out of range");
      }
      append_utf8(out, cp);
    } else {
      fail("unknown entity &" + std::string(ent) + ";");
    }
  }

  std::string attribute_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    char quote = peek();
    advance();
    std::string value;
    while (true) {
      if (eof()) fail("unterminated attribute value");
      char c = peek();
      if (c == quote) break;
      if (c == '<') fail("'<' in attribute value");
      if (c == '&') {
        reference(value);
        continue;
      }
      // Attribute-value normalization: literal whitespace becomes a space.
      if (c == '\r' && pos_ + 1 < in_.size() && in_[pos_ + 1] == '\n') advance();
      value += is_ws(c) ? ' ' : c;
      advance();
    }
    advance();
    return value;
  }

  Node element() {
    Node node;
    node.kind = Node::Kind::Element;
    node.line = line_;
    advance();  // '<'
    node.name = name();
    while (true) {
      bool had_ws = !eof() && is_ws(peek());
      skip_ws();
      if (eof()) fail("unterminated start tag <" + node.name + ">");
      if (peek() == '/') {
        advance();
        if (eof() || peek() != '>') fail("expected '>' after '/'");
        advance();
        return node;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_ws) fail("expected whitespace before attribute");
      std::size_t attr_line = line_;
      std::string key = name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '=' after attribute " + key);
      advance();
      skip_ws();
      std::string value = attribute_value();
      if (node.attribute(key)) {
        line_ = attr_line;
        fail("duplicate attribute " + key);
      }
      node.attributes.emplace_back(std::move(key), std::move(value));
    }

    std::string text;
    std::size_t text_line = line_;
    auto flush = [&] {
      if (!text.empty()) {
        Node t;
        t.kind = Node::Kind::Text;
        t.text = std::move(text);
        t.line = text_line;
        node.children.push_back(std::move(t));
        text.clear();
      }
    };
    while (true) {
      if (eof()) fail("unclosed element <" + node.name + ">");
      if (starts("</")) {
        flush();
        advance(2);
        std::string closing = name();
        skip_ws();
        if (eof() || peek() != '>') fail("expected '>' in end tag");
        if (closing != node.name) fail("mismatched end tag </" + closing + ">, expected </" + node.name + ">");
        advance();
        return node;
      }
      if (starts("<!--")) {
        skip_until("-->", "comment");
        continue;
      }
      if (starts("<![CDATA[")) {
        if (text.empty()) text_line = line_;
        advance(9);
        std::size_t start = pos_;
        while (!eof() && !starts("]]>")) advance();
        if (eof()) fail("unterminated CDATA section");
        text.append(in_.substr(start, pos_ - start));
        advance(3);
        continue;
      }
      if (starts("<?")) {
        skip_until("?>", "processing instruction");
        continue;
      }
      if (peek() == '<') {
        flush();
        node.children.push_back(element());
        text_line = line_;
        continue;
      }
      if (text.empty()) text_line = line_;
      if (peek() == '&') {
        reference(text);
        continue;
      }
      char c = peek();
      if (c == '\r') {
        advance();
        if (!eof() && peek() == '\n') continue;
        text += '\n';
        continue;
      }
      text += c;
      advance();
    }
  }

  std::string_view in_;
  std::string_view origin_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

Node parse(std::string_view input, std::string_view origin) { return Reader(input, origin).document(); }

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace reveval::xml
