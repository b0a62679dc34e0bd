// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace orchsim::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

/// Threshold parsed once from ORCHSIM_LOG (debug|info|warn|error); warn by
/// default.
Level threshold();

void message(Level level, const std::string& text);

inline void debug(const std::string& text) { message(Level::Debug, text); }
inline void info(const std::string& text) { message(Level::Info, text); }
inline void warn(const std::string& text) { message(Level::Warn, text); }
inline void error(const std::string& text) { message(Level::Error, text); }

}  // namespace orchsim::log
