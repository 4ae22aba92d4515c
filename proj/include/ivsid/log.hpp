/*
 * Copyright 2025 The ivsid Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IVSID_LOG_HPP
#define IVSID_LOG_HPP

#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>

namespace ivsid::log {

enum class Level { Quiet = 0, Info = 1, Debug = 2 };

// Verbosity comes from the IVSID_LOG environment variable
// ("quiet" | "info" | "debug"); default is info.
inline Level level() {
  static const Level lv = [] {
    const char* env = std::getenv("IVSID_LOG");
    if (env == nullptr) return Level::Info;
    if (std::strcmp(env, "quiet") == 0) return Level::Quiet;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Info;
  }();
  return lv;
}

inline void info(const std::string& msg) {
  if (level() >= Level::Info) std::cerr << "[ivsid] " << msg << "\n";
}

inline void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::cerr << "[ivsid:debug] " << msg << "\n";
}

}  // namespace ivsid::log

#endif  // IVSID_LOG_HPP
