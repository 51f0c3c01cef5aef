#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace frictionlab::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

// Verbosity comes from the FRICTION_LAB_LOG environment variable
// (error|warn|info|debug); default is warn.
inline Level threshold() {
    static const Level lv = [] {
        const char* env = std::getenv("FRICTION_LAB_LOG");
        if (env == nullptr) return Level::warn;
        const std::string v(env);
        if (v == "error") return Level::error;
        if (v == "info") return Level::info;
        if (v == "debug") return Level::debug;
        return Level::warn;
    }();
    return lv;
}

inline void write(Level lv, const std::string& msg) {
    if (static_cast<int>(lv) > static_cast<int>(threshold())) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[" << names[static_cast<int>(lv)] << "] " << msg << "\n";
}

inline void error(const std::string& msg) { write(Level::error, msg); }
inline void warn(const std::string& msg) { write(Level::warn, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace frictionlab::log
