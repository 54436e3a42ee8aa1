#pragma once

// Reader for the TOML subset used by registry and pipeline config files:
// [table], [[array-of-tables]], dotted keys, strings, integers, floats,
// booleans and (possibly multi-line) arrays of those. Parsed into a JSON
// object so callers can use one accessor vocabulary.

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace mgdil::config {

nlohmann::json parse_toml(std::string_view text);
nlohmann::json load_toml(const std::filesystem::path& path);

// Typed lookups on a parsed object. `key` may be dotted ("train.seed").
const nlohmann::json* find(const nlohmann::json& root, std::string_view key);

template <typename T>
T get_or(const nlohmann::json& root, std::string_view key, T fallback) {
  const nlohmann::json* v = find(root, key);
  if (v == nullptr || v->is_null()) return fallback;
  return v->get<T>();
}

// Directory holding lexicons and prompt templates: $MGDIL_DATA_DIR when set,
// otherwise the source tree's data/ recorded at configure time.
std::filesystem::path default_data_dir();

}  // namespace mgdil::config
