#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mgdil::utf8 {

// Decodes UTF-8 into Unicode scalar values. Invalid bytes decode to U+FFFD
// one byte at a time, so every input has a defined length.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

std::size_t length(std::string_view text);

// ASCII-only case folding; non-ASCII scalars pass through.
std::string to_lower_ascii(std::string_view text);
char32_t to_lower_ascii(char32_t c);

bool is_emoji(char32_t c);
bool is_ascii_digit(char32_t c);
bool is_whitespace(char32_t c);
// Letters: ASCII letters plus any non-ASCII scalar that is not an emoji,
// whitespace or general punctuation.
bool is_letter(char32_t c);

}  // namespace mgdil::utf8
