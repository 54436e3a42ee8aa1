#include "mgdil/util/text.hpp"

#include "mgdil/util/utf8.hpp"

namespace mgdil::text {

std::string normalize_words(std::string_view text) {
  std::string out = " ";
  for (char32_t c : utf8::decode(text)) {
    c = utf8::to_lower_ascii(c);
    if (utf8::is_letter(c) || utf8::is_ascii_digit(c)) {
      out += utf8::encode(std::u32string(1, c));
    } else if (out.back() != ' ') {
      out += ' ';
    }
  }
  if (out.back() != ' ') out += ' ';
  return out;
}

std::size_t count_phrase(const std::string& normalized_text, const std::string& normalized_phrase) {
  if (normalized_phrase.size() <= 2) return 0;  // blank phrase
  std::size_t n = 0;
  // Step to the phrase's trailing space so adjacent matches share it.
  for (auto pos = normalized_text.find(normalized_phrase); pos != std::string::npos;
       pos = normalized_text.find(normalized_phrase, pos + normalized_phrase.size() - 1)) {
    ++n;
  }
  return n;
}

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(a, b - a + 1));
}

}  // namespace mgdil::text
