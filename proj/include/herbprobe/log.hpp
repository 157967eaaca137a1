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

#pragma once

#include <functional>
#include <string_view>

namespace herbprobe {

enum class LogLevel { kInfo, kWarning, kError };

// Thread-safe; defaults to stderr.
void log(LogLevel level, std::string_view message);
inline void log_warning(std::string_view message) { log(LogLevel::kWarning, message); }

// Replaces the sink (tests capture warnings); an empty function restores stderr.
void set_log_sink(std::function<void(LogLevel, std::string_view)> sink);

}  // namespace herbprobe
