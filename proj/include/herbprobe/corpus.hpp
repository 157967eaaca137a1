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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace herbprobe {

// One ingredient of a formulation. `canonical` is what comparisons use;
// `processing_marker` keeps preparation notes such as 蒸 in 草乌（蒸）.
struct Ingredient {
  std::string canonical;
  std::optional<std::string> processing_marker;
  std::string raw;

  // canonical, followed by （marker） when a marker is present.
  std::string display() const;

  friend bool operator==(const Ingredient&, const Ingredient&) = default;
};

// Whether processing markers take part in ingredient comparison.
enum class MarkerMode { kIgnore, kMatch };

std::string ingredient_key(const Ingredient& ingredient, MarkerMode mode);
// Convenience overload for display-form strings; parses first.
std::string ingredient_key(std::string_view display, MarkerMode mode);

struct DrugRecord {
  std::string name;
  std::vector<Ingredient> ingredients;
  std::optional<std::string> source_text;

  std::vector<std::string> display_ingredients() const;
  std::vector<std::string> canonical_ingredients() const;
};

// NFC, full-width ASCII folded (parentheses excepted), all whitespace
// removed. Throws ParseError when nothing usable is left.
std::string normalize_name(std::string_view raw);

// Splits a trailing (marker) or （marker） off a normalized name.
// Throws ParseError if the name is only a marker.
Ingredient parse_ingredient(std::string_view raw);

// Validating constructor for a record from raw strings.
DrugRecord make_record(std::string_view name, const std::vector<std::string>& ingredients,
                       std::optional<std::string> source_text = std::nullopt);

// Immutable collection of records with a unique-name index and the
// ingredient pool. Safe for concurrent reads.
class Corpus {
 public:
  Corpus() = default;
  // Throws ParseError on duplicate names, empty or duplicated ingredients.
  explicit Corpus(std::vector<DrugRecord> records);

  const std::vector<DrugRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  // Union of every record's canonical ingredient names.
  const std::set<std::string>& ingredient_pool() const noexcept { return pool_; }

  const DrugRecord* find(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;

  // Number of records listing the canonical herb.
  std::size_t oracle_frequency(std::string_view canonical) const;
  // All herbs by descending oracle frequency, ties in byte order.
  const std::vector<std::pair<std::string, std::size_t>>& herbs_by_frequency() const noexcept {
    return ranked_herbs_;
  }

  // SHA-256 of the canonical JSONL serialization.
  const std::string& fingerprint() const noexcept { return fingerprint_; }

  static std::set<std::string> compute_pool(const std::vector<DrugRecord>& records);

 private:
  std::vector<DrugRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::set<std::string> pool_;
  std::map<std::string, std::size_t, std::less<>> frequency_;
  std::vector<std::pair<std::string, std::size_t>> ranked_herbs_;
  std::string fingerprint_;
};

// JSONL corpus: {"name": str, "ingredients": [str, ...], "text"?: str}.
Corpus parse_corpus(std::string_view jsonl);
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const std::vector<DrugRecord>& records);

// CSV with header name,ingredients[,text]; ingredients separated by 、 ; or |.
Corpus parse_corpus_csv(std::string_view csv);

}  // namespace herbprobe
