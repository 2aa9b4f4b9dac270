#include "core/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace foldgate::log {

namespace {

Level parse_env() {
    const char* v = std::getenv("FOLDGATE_LOG");
    if (!v) return Level::warn;
    if (std::strcmp(v, "error") == 0) return Level::error;
    if (std::strcmp(v, "warn") == 0) return Level::warn;
    if (std::strcmp(v, "info") == 0) return Level::info;
    if (std::strcmp(v, "debug") == 0) return Level::debug;
    return Level::warn;
}

const char* tag(Level lv) {
    switch (lv) {
        case Level::error: return "error";
        case Level::warn: return "warn";
        case Level::info: return "info";
        case Level::debug: return "debug";
    }
    return "?";
}

std::mutex g_mutex;

} // namespace

Level level() {
    static const Level lv = parse_env();
    return lv;
}

void emit(Level lv, const std::string& msg) {
    if (lv > level()) return;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[foldgate][%s] %s\n", tag(lv), msg.c_str());
}

} // namespace foldgate::log
