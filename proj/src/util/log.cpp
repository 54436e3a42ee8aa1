#include "mgdil/util/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace mgdil::log {

namespace {

std::atomic<Level> g_min_level{Level::kWarn};
std::mutex g_mutex;

const char* level_name(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

}  // namespace

void set_min_level(Level level) { g_min_level.store(level); }

void emit(Level level, std::string_view event, const nlohmann::json& fields) {
  if (level < g_min_level.load()) return;
  nlohmann::json line = {{"level", level_name(level)}, {"event", std::string(event)}};
  for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  const std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

}  // namespace mgdil::log
