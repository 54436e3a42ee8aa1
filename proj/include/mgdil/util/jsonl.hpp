#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"

namespace mgdil::jsonl {

// Calls `fn(line_number, object)` for every non-blank line. Throws
// ParseError carrying the line number on invalid JSON.
void for_each(const std::filesystem::path& path, const std::function<void(std::size_t, const nlohmann::json&)>& fn);

std::string dump_line(const nlohmann::json& value);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace mgdil::jsonl
