#pragma once

// Minimal non-validating XML reader sufficient for the corpus format:
// elements, attributes, character data, entity and character references,
// comments, CDATA, processing instructions and a skipped DOCTYPE.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reveval::xml {

struct Node {
  enum class Kind { Element, Text };

  Kind kind = Kind::Element;
  std::string name;  // element name
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;  // character data
  std::size_t line = 1;
  std::vector<Node> children;

  const std::string* attribute(std::string_view key) const;
};

// Throws ParseError(origin, line, ...) on malformed input.
Node parse(std::string_view input, std::string_view origin);

std::string escape_text(std::string_view s);
std::string escape_attribute(std::string_view s);

}  // namespace reveval::xml
