// SPDX-License-Identifier: Apache-2.0

#include "orchsim/log.hpp"

#include <cstdio>
#include <cstdlib>

namespace orchsim::log {

namespace {

Level parse_threshold() {
  const char* env = std::getenv("ORCHSIM_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string value(env);
  if (value == "debug") return Level::Debug;
  if (value == "info") return Level::Info;
  if (value == "warn") return Level::Warn;
  if (value == "error") return Level::Error;
  return Level::Warn;
}

const char* tag(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
  }
  return "?";
}

}  // namespace

Level threshold() {
  static const Level cached = parse_threshold();
  return cached;
}

void message(Level level, const std::string& text) {
  if (level < threshold()) return;
  std::fprintf(stderr, "[orchsim %s] %s\n", tag(level), text.c_str());
}

}  // namespace orchsim::log
