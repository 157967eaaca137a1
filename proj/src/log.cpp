// Copyright 2026 The herbprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "herbprobe/log.hpp"

#include <iostream>
#include <mutex>
#include <string>

namespace herbprobe {

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(LogLevel, std::string_view)>& log_sink() {
  static std::function<void(LogLevel, std::string_view)> sink;
  return sink;
}

}  // namespace

void log(LogLevel level, std::string_view message) {
  std::lock_guard lock(log_mutex());
  if (auto& sink = log_sink()) {
    sink(level, message);
    return;
  }
  const char* tag = level == LogLevel::kInfo ? "info" : level == LogLevel::kWarning ? "warning" : "error";
  std::cerr << "herbprobe: " << tag << ": " << message << '\n';
}

void set_log_sink(std::function<void(LogLevel, std::string_view)> sink) {
  std::lock_guard lock(log_mutex());
  log_sink() = std::move(sink);
}

}  // namespace herbprobe
