#pragma once

// Minimal leveled logging to stderr; level from MESHGEN_LOG.

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace meshgen::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

inline Level parse_level(std::string_view s) {
  if (s == "error") return Level::error;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  return Level::warn;
}

inline Level& threshold() {
  static Level level = [] {
    const char* env = std::getenv("MESHGEN_LOG");
    return env ? parse_level(env) : Level::warn;
  }();
  return level;
}

inline std::ostream*& sink() {
  static std::ostream* s = &std::cerr;
  return s;
}

inline void write(Level level, std::string_view msg) {
  if (level > threshold()) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  *sink() << "[meshgen] " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

inline void error(std::string_view m) { write(Level::error, m); }
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

} // namespace meshgen::log
