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

// Shared fixtures for the unit tests.
#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "herbprobe/corpus.hpp"
#include "herbprobe/retrieval.hpp"

namespace herbprobe::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HERBPROBE_DATA_DIR) / name;
}

inline const Corpus& sample_corpus() {
  static const Corpus corpus = load_corpus(data_path("sample_corpus.jsonl"));
  return corpus;
}

inline const Index& sample_index() {
  static const Index index = build_index(sample_corpus());
  return index;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("herbprobe-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace herbprobe::testing
