#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semicont {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument or parameter outside its admissible domain.
class DomainError : public Error {
public:
  using Error::Error;
};

// Iterative routine failed to converge; message carries the diagnostic payload.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

// Data cannot support the requested fit (single class, too few positives, ...).
class DataError : public Error {
public:
  using Error::Error;
};

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

namespace detail {

inline LogLevel parse_level(const char* s) {
  if (s == nullptr) return LogLevel::warn;
  std::string_view v{s};
  if (v == "error") return LogLevel::error;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

inline LogLevel& level_ref() {
  static LogLevel level = parse_level(std::getenv("SEMICONT_QR_LOG"));
  return level;
}

inline std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

inline LogLevel log_level() { return detail::level_ref(); }
inline void set_log_level(LogLevel level) { detail::level_ref() = level; }

inline void log(LogLevel level, std::string_view msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard lock(detail::log_mutex());
  std::cerr << "[semicont:" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void warn(std::string_view msg) { log(LogLevel::warn, msg); }
inline void debug(std::string_view msg) { log(LogLevel::debug, msg); }

}  // namespace semicont
