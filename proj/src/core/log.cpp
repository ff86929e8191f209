#include "difreg/core/log.hpp"

#include <iostream>
#include <mutex>

namespace difreg::log {
namespace {

struct State {
    std::mutex mutex;
    Level min_level = Level::Warn;
    Sink sink;
};

State& state() {
    static State s;
    return s;
}

const char* tag(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warn: return "warning";
        case Level::Error: return "error";
    }
    return "";
}

}  // namespace

void set_sink(Sink sink) {
    std::lock_guard lock(state().mutex);
    state().sink = std::move(sink);
}

void set_min_level(Level level) {
    std::lock_guard lock(state().mutex);
    state().min_level = level;
}

void write(Level level, const std::string& message) {
    auto& s = state();
    std::lock_guard lock(s.mutex);
    if (level < s.min_level) return;
    if (s.sink) {
        s.sink(level, message);
        return;
    }
    std::cerr << "difreg " << tag(level) << ": " << message << '\n';
}

}  // namespace difreg::log
