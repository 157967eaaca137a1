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

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "herbprobe/corpus.hpp"
#include "herbprobe/dataset.hpp"
#include "herbprobe/metrics.hpp"
#include "herbprobe/runner.hpp"

namespace herbprobe {

struct FileRef {
  std::string path;
  std::string fingerprint;  // SHA-256 of the file bytes
};

FileRef file_ref(const std::filesystem::path& path);

struct RunManifest {
  FileRef corpus;
  FileRef dataset;
  std::vector<FileRef> runs;
  nlohmann::json provider = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::string tool_version;

  nlohmann::ordered_json to_json() const;
};

struct ScoreOptions {
  InvalidPolicy policy = InvalidPolicy::kCountAsIncorrect;
  MarkerMode mode = MarkerMode::kIgnore;
  std::size_t top_n = 10;
  std::size_t repetition_threshold = 3;
};

// Label shown in tables: provider name, else model_name, else kind.
std::string provider_label(const nlohmann::json& provider);

// Writes metrics.json, the CSV tables for the run's protocol, and
// manifest.json into out_dir. Returns the written paths.
std::vector<std::filesystem::path> write_score_outputs(const std::filesystem::path& out_dir,
                                                       const RunLog& run,
                                                       const EvalDataset& dataset,
                                                       const Corpus& corpus,
                                                       const RunManifest& manifest,
                                                       const ScoreOptions& options = {});

// Markdown comparison of every metrics.json under metrics_dir. Throws
// ConfigError when none is found. Same inputs give the same bytes.
std::string render_report(const std::filesystem::path& metrics_dir);

}  // namespace herbprobe
