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
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "herbprobe/corpus.hpp"
#include "herbprobe/dataset.hpp"
#include "herbprobe/protocols.hpp"
#include "herbprobe/provider_config.hpp"
#include "herbprobe/retrieval.hpp"

namespace herbprobe {

// What a provider is asked. The prompt is what a language model sees; the
// structured fields let retrieval and the simulated providers work without
// re-parsing it.
struct Question {
  std::uint64_t item_id = 0;
  Protocol protocol = Protocol::kVerify;
  std::string drug_name;
  std::vector<std::string> ingredients;  // empty for inquiry
  std::string prompt;
};

// Builds the question for a dataset item.
Question make_question(const EvalItem& item, Protocol protocol, Language lang);

struct ProviderError {
  std::string kind;  // "transport", "http_status", "malformed_response", "unsupported", ...
  std::string message;
  int http_status = 0;
  int attempts = 0;
};

// Exactly one of raw_text / error is set.
struct ProviderResponse {
  std::optional<std::string> raw_text;
  std::optional<ProviderError> error;
  std::chrono::duration<double, std::milli> latency{0.0};
  std::optional<std::vector<RetrievedEntry>> retrieval_context;

  static ProviderResponse text(std::string raw);
  static ProviderResponse failure(std::string kind, std::string message);
  bool ok() const noexcept { return raw_text.has_value(); }
};

// Callable from several threads at once.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResponse complete(const Question& question) const = 0;
};

// Answers from the corpus itself: the full ingredient list for inquiry and
// exact set comparison for verification.
class OracleProvider final : public Provider {
 public:
  explicit OracleProvider(const Corpus& corpus, MarkerMode mode = MarkerMode::kIgnore)
      : corpus_(corpus), mode_(mode) {}
  ProviderResponse complete(const Question& question) const override;

 private:
  const Corpus& corpus_;
  MarkerMode mode_;
};

// Retrieval-only verifier: takes the top-1 entry for the drug name and
// compares ingredient sets. doc ids must be corpus indices (build_index).
class GroundedVerifier final : public Provider {
 public:
  GroundedVerifier(const Corpus& corpus, const Index& index, MarkerMode mode = MarkerMode::kIgnore)
      : corpus_(corpus), index_(index), mode_(mode) {}
  ProviderResponse complete(const Question& question) const override;

 private:
  const Corpus& corpus_;
  const Index& index_;
  MarkerMode mode_;
};

// Names every herb spelled inside the drug name, then pads with the three
// most frequent corpus herbs.
class LiteralProvider final : public Provider {
 public:
  explicit LiteralProvider(const Corpus& corpus) : corpus_(corpus) {}
  std::vector<std::string> literal_herbs(std::string_view drug_name) const;
  std::vector<std::string> answer(std::string_view drug_name) const;
  ProviderResponse complete(const Question& question) const override;

 private:
  const Corpus& corpus_;
};

// Always lists the m most frequent herbs; always confirms a verification.
class CommonHerbProvider final : public Provider {
 public:
  CommonHerbProvider(const Corpus& corpus, std::size_t m);
  const std::vector<std::string>& herbs() const noexcept { return herbs_; }
  ProviderResponse complete(const Question& question) const override;

 private:
  std::vector<std::string> herbs_;
};

// Verification only. Bernoulli answers are a function of (seed, item_id).
class BiasedVerifier final : public Provider {
 public:
  explicit BiasedVerifier(BiasMode mode, double p = 0.5, std::uint64_t seed = 0)
      : mode_(mode), p_(p), seed_(seed) {}
  ProviderResponse complete(const Question& question) const override;

 private:
  BiasMode mode_;
  double p_;
  std::uint64_t seed_;
};

// Verification only. Realizes a given confusion matrix on a dataset exactly;
// the seed decides which items land in which cell. Throws ConfigError when
// tp+fn / fp+tn differ from the dataset's T / F counts.
class FixedConfusionProvider final : public Provider {
 public:
  FixedConfusionProvider(const ConfusionMatrix& cm, const EvalDataset& dataset, std::uint64_t seed);
  ProviderResponse complete(const Question& question) const override;

 private:
  std::map<std::uint64_t, bool> says_yes_;
};

// Wraps another provider: retrieves k entries for the question, renders the
// context template around the protocol prompt and delegates.
class RagProvider final : public Provider {
 public:
  RagProvider(std::shared_ptr<const Provider> inner, const Index& index, std::size_t k = 10,
              Language lang = Language::kZh);
  static std::string query_for(const Question& question);
  ProviderResponse complete(const Question& question) const override;

 private:
  std::shared_ptr<const Provider> inner_;
  const Index& index_;
  std::size_t k_;
  Language lang_;
};

// OpenAI-style chat completions over HTTP(S).
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(ProviderConfig config);
  ~RemoteProvider() override;
  ProviderResponse complete(const Question& question) const override;

  // Request body for a prompt.
  nlohmann::json request_body(std::string_view prompt) const;

 private:
  ProviderConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

struct ProviderContext {
  const Corpus* corpus = nullptr;
  const Index* index = nullptr;
  const EvalDataset* dataset = nullptr;
  Language lang = Language::kZh;
};

// Throws ConfigError when the context lacks what the kind needs.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config, const ProviderContext& context);

}  // namespace herbprobe
