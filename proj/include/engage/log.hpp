#pragma once

#include <string>

namespace engage {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

//! Reads ENGAGE_EEG_LOG ("error" | "warn" | "info" | "debug"); defaults to Warn.
LogLevel log_level();

void log(LogLevel level, const std::string& message);

inline void log_error(const std::string& m) { log(LogLevel::Error, m); }
inline void log_warn(const std::string& m) { log(LogLevel::Warn, m); }
inline void log_info(const std::string& m) { log(LogLevel::Info, m); }
inline void log_debug(const std::string& m) { log(LogLevel::Debug, m); }

}  // namespace engage
