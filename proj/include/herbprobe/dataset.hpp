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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "herbprobe/corpus.hpp"
#include "herbprobe/rng.hpp"

namespace herbprobe {

enum class Subset { kTrue, kFalse };
enum class Answer { kYes, kNo };

std::string_view to_string(Subset subset);
std::string_view to_string(Answer answer);

// One verification question. T items present the oracle list unchanged;
// F items have replacement_count(n) positions swapped for herbs the drug
// does not contain.
struct EvalItem {
  std::uint64_t item_id = 0;
  std::string drug_name;
  // Display form (canonical plus （marker） where the corpus has one).
  std::vector<std::string> presented_ingredients;
  Subset subset = Subset::kTrue;
  Answer expected = Answer::kYes;
  std::vector<std::size_t> replaced_positions;

  friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

enum class DatasetView { kMixed, kTrueOnly, kFalseOnly };

struct EvalDataset {
  std::vector<EvalItem> items;  // presentation order
  std::uint64_t seed = 0;
  std::string corpus_fingerprint;
  DatasetView view = DatasetView::kMixed;

  std::size_t count(Subset subset) const;
  const EvalItem* find(std::uint64_t item_id) const;
  // Items of one subset, order preserved.
  EvalDataset only(Subset subset) const;
  // SHA-256 of the serialized form.
  std::string fingerprint() const;
};

struct Halves {
  std::vector<std::size_t> true_ids;
  std::vector<std::size_t> false_ids;
};

// Shuffles a copy of the ids and cuts it; T receives the extra id when the
// count is odd. Throws Error on empty input.
Halves split_halves(std::span<const std::size_t> record_ids, Rng& rng);

// max(1, ceil(n / 2)).
std::size_t replacement_count(std::size_t n);

struct Perturbation {
  std::vector<std::string> presented;
  std::vector<std::size_t> replaced_positions;  // ascending
};

// Replaces replacement_count(|truth|) positions, chosen uniformly without
// repetition, with herbs drawn uniformly from pool minus the truth minus
// replacements already drawn. Throws Error naming the drug when the pool
// cannot supply enough distinct replacements.
Perturbation perturb_ingredients(std::string_view drug_name, std::span<const Ingredient> truth,
                                 const std::set<std::string>& pool, Rng& rng);

// One generator drives, in order: the split, per F drug (corpus order) the
// positions and then the replacements, and finally the presentation shuffle.
// item_id is the record's index in the corpus.
EvalDataset build_dataset(const Corpus& corpus, std::uint64_t seed);

std::string serialize_dataset(const EvalDataset& dataset);
EvalDataset parse_dataset(std::string_view jsonl);
EvalDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const EvalDataset& dataset, const std::filesystem::path& path);

}  // namespace herbprobe
