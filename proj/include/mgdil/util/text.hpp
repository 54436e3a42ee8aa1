#pragma once

#include <string>
#include <string_view>

namespace mgdil::text {

// Lowercases ASCII, turns every character that is neither a letter nor a
// digit into a space and collapses runs, padded with one space each side:
// "I'm back!" -> " i m back ". Phrases normalized the same way can then be
// matched on word boundaries with a plain substring search.
std::string normalize_words(std::string_view text);

// Occurrences of normalized `phrase` (already padded) in normalized `text`.
std::size_t count_phrase(const std::string& normalized_text, const std::string& normalized_phrase);

std::string trim(std::string_view s);

}  // namespace mgdil::text
