#include "emla_sens/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>
#include <unordered_set>

namespace emla {

namespace {

LogLevel parse_threshold() {
  const char* raw = std::getenv("EMLA_SENS_LOG");
  if (raw == nullptr) return LogLevel::info;
  const std::string value(raw);
  if (value == "debug") return LogLevel::debug;
  if (value == "info") return LogLevel::info;
  if (value == "warn") return LogLevel::warn;
  std::fprintf(stderr, "[warn] unrecognized EMLA_SENS_LOG value '%s', using 'info'\n",
               value.c_str());
  return LogLevel::info;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
  }
  return "info";
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

LogLevel log_threshold() {
  static const LogLevel threshold = parse_threshold();
  return threshold;
}

void log_message(LogLevel level, const std::string& text) {
  if (static_cast<int>(level) < static_cast<int>(log_threshold())) return;
  std::lock_guard<std::mutex> lock(log_mutex());
  std::fprintf(stderr, "[%s] %s\n", level_tag(level), text.c_str());
}

void log_debug(const std::string& text) { log_message(LogLevel::debug, text); }
void log_info(const std::string& text) { log_message(LogLevel::info, text); }
void log_warn(const std::string& text) { log_message(LogLevel::warn, text); }

void warn_once(const std::string& key, const std::string& text) {
  {
    static std::unordered_set<std::string> seen;
    std::lock_guard<std::mutex> lock(log_mutex());
    if (!seen.insert(key).second) return;
  }
  log_message(LogLevel::warn, text);
}

}  // namespace emla
