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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "herbprobe/confusion_matrix.hpp"
#include "herbprobe/corpus.hpp"

namespace herbprobe {

enum class ProviderKind {
  kRemote,
  kRag,
  kOracle,
  kGrounded,
  kLiteral,
  kCommonHerb,
  kBiased,
  kFixedConfusion,
};

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view text);

enum class BiasMode { kAlwaysYes, kAlwaysNo, kBernoulli };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kOracle;
  // Display label for reports; defaults to model_name, then kind.
  std::optional<std::string> name;

  // remote
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model_name;
  double temperature = 0.0;
  std::string api_key_env = "PROVIDER_API_KEY";
  std::size_t concurrency_limit = 4;
  std::chrono::milliseconds timeout{60'000};
  std::size_t retries = 3;
  std::chrono::milliseconds backoff{500};

  // rag
  std::shared_ptr<const ProviderConfig> inner;
  std::size_t k = 10;

  // common_herb
  std::size_t m = 10;

  // biased
  BiasMode bias_mode = BiasMode::kAlwaysYes;
  double p = 0.5;

  // biased (bernoulli) and fixed_confusion
  std::uint64_t seed = 0;

  // fixed_confusion
  ConfusionMatrix cm;

  // oracle and grounded comparisons
  MarkerMode marker_mode = MarkerMode::kIgnore;

  // Throws ConfigError when a kind's required fields are missing or out of
  // range (remote: endpoint_url and model_name; rag: inner; temperature >= 0).
  void validate() const;
};

// JSON object, or a TOML subset: `key = value` lines (strings, integers,
// floats, booleans) with [inner] / [inner.inner] tables for nesting.
ProviderConfig parse_provider_config(std::string_view text);
ProviderConfig provider_config_from_json(const nlohmann::json& j);
ProviderConfig load_provider_config(const std::filesystem::path& path);

// Snapshot for run logs; never contains the API key itself.
nlohmann::json to_json(const ProviderConfig& config);

}  // namespace herbprobe
