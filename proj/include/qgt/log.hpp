// Copyright 2026 The qgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace qgt::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

// Level is read once from QGT_LOG (debug|info|warn|error|off); default warn.
inline Level threshold() {
  static const Level level = [] {
    const char* env = std::getenv("QGT_LOG");
    if (env == nullptr) return Level::Warn;
    const std::string_view v(env);
    if (v == "debug") return Level::Debug;
    if (v == "info") return Level::Info;
    if (v == "error") return Level::Error;
    if (v == "off") return Level::Off;
    return Level::Warn;
  }();
  return level;
}

inline void write(Level level, std::string_view msg) {
  if (level < threshold()) return;
  static constexpr const char* names[] = {"debug", "info", "warn", "error"};
  std::clog << "[qgt " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

inline void debug(std::string_view msg) { write(Level::Debug, msg); }
inline void info(std::string_view msg) { write(Level::Info, msg); }
inline void warn(std::string_view msg) { write(Level::Warn, msg); }
inline void error(std::string_view msg) { write(Level::Error, msg); }

}  // namespace qgt::log
