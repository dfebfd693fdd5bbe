#include "pintlab/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <string>

namespace pintlab::log {

namespace {
std::atomic<Level> g_level{Level::warn};
std::mutex g_mutex;

const char* tag(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "";
  }
}
}  // namespace

void set_level(Level l) { g_level = l; }
Level level() { return g_level; }

Level parse_level(std::string_view name) {
  if (name == "debug") return Level::debug;
  if (name == "info") return Level::info;
  if (name == "warn") return Level::warn;
  if (name == "error") return Level::error;
  if (name == "off") return Level::off;
  throw std::invalid_argument("unknown log level '" + std::string(name) + "'");
}

void write(Level l, std::string_view message) {
  if (l < g_level.load() || l == Level::off) return;
  std::lock_guard lock(g_mutex);
  std::fprintf(stderr, "[pint-lab %s] %.*s\n", tag(l), static_cast<int>(message.size()),
               message.data());
}

}  // namespace pintlab::log
