#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace reveval::text {

bool is_space(char c);
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Splits after '.', '!' or '?' (optionally followed by closing quotes or
// brackets) when whitespace and then an uppercase letter follow. Returned
// sentences are trimmed; empty input yields no sentences.
std::vector<std::string> split_sentences(std::string_view paragraph);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace reveval::text
