#pragma once

// Structured logging: one JSON object per line on stderr.

#include <string_view>

#include "json.hpp"

namespace mgdil::log {

enum class Level { kDebug, kInfo, kWarn, kError };

void set_min_level(Level level);
void emit(Level level, std::string_view event, const nlohmann::json& fields = nlohmann::json::object());

inline void info(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
  emit(Level::kInfo, event, fields);
}
inline void warn(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
  emit(Level::kWarn, event, fields);
}
inline void error(std::string_view event, const nlohmann::json& fields = nlohmann::json::object()) {
  emit(Level::kError, event, fields);
}

}  // namespace mgdil::log
