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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herbprobe/dataset.hpp"
#include "herbprobe/protocols.hpp"
#include "herbprobe/providers.hpp"

namespace herbprobe {

struct RunRecord {
  std::uint64_t item_id = 0;
  std::string drug_name;
  Protocol protocol = Protocol::kVerify;
  std::string prompt;
  std::string raw_response;
  std::vector<std::string> parsed_ingredients;  // inquiry; display form
  Verdict verdict = Verdict::kInvalid;          // verify
  double latency_ms = 0.0;
  // Logged without rendered_text.
  std::optional<std::vector<RetrievedEntry>> retrieval_context;
  std::optional<ProviderError> error;
};

struct RunMeta {
  Protocol protocol = Protocol::kVerify;
  Language lang = Language::kZh;
  nlohmann::json provider = nlohmann::json::object();
  std::string dataset_fingerprint;
  std::string corpus_fingerprint;
  std::string started;
  std::string finished;  // empty while the run is in progress
  std::string tool_version;
};

// One record per dataset item, in presentation order, once finished.
struct RunLog {
  RunMeta meta;
  std::vector<RunRecord> records;

  const RunRecord* find(std::uint64_t item_id) const;
  std::size_t error_count() const;
};

struct RunOptions {
  Protocol protocol = Protocol::kVerify;
  Language lang = Language::kZh;
  std::size_t concurrency = 1;
  // Incremental JSONL log; rewritten in presentation order at the end.
  std::optional<std::filesystem::path> log_path;
  // Keep finished, error-free records already in log_path.
  bool resume = false;
  nlohmann::json provider_snapshot = nlohmann::json::object();
};

// One provider call plus response parsing; provider failures become an
// Invalid verdict or an empty list with the error attached.
RunRecord execute_item(const EvalItem& item, const Provider& provider, Protocol protocol,
                       Language lang);

// Bounded worker pool over the dataset; the calling thread is the only
// writer of the log. Throws IoError on log I/O failure and ConfigError when
// resuming a log that belongs to another dataset or protocol.
RunLog run_protocol(const EvalDataset& dataset, const Provider& provider, const RunOptions& options);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);
std::string serialize_run_log(const RunLog& log);
// With tolerate_truncated, an unparsable final line (an interrupted write)
// is dropped instead of rejected.
RunLog parse_run_log(std::string_view jsonl, bool tolerate_truncated = false);
RunLog load_run_log(const std::filesystem::path& path, bool tolerate_truncated = false);

}  // namespace herbprobe
