#pragma once

#include <string>

namespace foldgate::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Active level, parsed once from the FOLDGATE_LOG environment variable
/// (error|warn|info|debug). Defaults to warn.
Level level();

void emit(Level lv, const std::string& msg);

inline void error(const std::string& msg) { emit(Level::error, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void debug(const std::string& msg) { emit(Level::debug, msg); }

} // namespace foldgate::log
