#include "engage/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace engage {

LogLevel log_level() {
  static LogLevel cached = [] {
    const char* raw = std::getenv("ENGAGE_EEG_LOG");
    if (raw == nullptr) return LogLevel::Warn;
    if (std::strcmp(raw, "error") == 0) return LogLevel::Error;
    if (std::strcmp(raw, "warn") == 0) return LogLevel::Warn;
    if (std::strcmp(raw, "info") == 0) return LogLevel::Info;
    if (std::strcmp(raw, "debug") == 0) return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return cached;
}

void log(LogLevel level, const std::string& message) {
  if (level > log_level()) return;
  static const char* tags[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", tags[static_cast<int>(level)], message.c_str());
}

}  // namespace engage
