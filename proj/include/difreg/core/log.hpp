#pragma once

#include <functional>
#include <string>

namespace difreg::log {

enum class Level { Debug, Info, Warn, Error };

using Sink = std::function<void(Level, const std::string&)>;

/// Replaces the process-wide sink. The default writes warnings and errors to stderr.
void set_sink(Sink sink);
void set_min_level(Level level);

void write(Level level, const std::string& message);
inline void debug(const std::string& m) { write(Level::Debug, m); }
inline void info(const std::string& m) { write(Level::Info, m); }
inline void warn(const std::string& m) { write(Level::Warn, m); }

}  // namespace difreg::log
