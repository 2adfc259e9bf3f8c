#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mimick::utf8 {

// Splits UTF-8 text into code points. Invalid bytes decode to U+FFFD, one per
// offending byte, so every input maps to some character sequence.
std::vector<char32_t> decode(std::string_view text);

std::string encode(char32_t code_point);
std::string encode(const std::vector<char32_t>& code_points);

// Simple per-character Unicode lowercase mapping (no locale tailoring, no
// length-changing special cases).
char32_t to_lower(char32_t c);
std::string to_lower(std::string_view text);

}  // namespace mimick::utf8
