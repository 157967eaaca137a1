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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herbprobe/corpus.hpp"

namespace herbprobe {

// CJK runs yield every character followed by every overlapping bigram;
// other letter/digit runs yield one lower-cased word. Everything else
// separates runs.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc_id = 0;
  std::uint32_t term_frequency = 0;
};

// The text a record is indexed under: name, ingredients, free text.
std::string document_text(const DrugRecord& record);
// The text a record contributes to a prompt context.
std::string render_entry(const DrugRecord& record);

// Inverted index, one document per corpus record (doc_id = record index).
class Index {
 public:
  struct Parts {
    std::map<std::string, std::vector<Posting>, std::less<>> postings;
    std::vector<std::uint32_t> doc_lengths;
    std::vector<std::string> drug_names;
    std::vector<std::string> rendered;
    Bm25Params params;
    std::string corpus_fingerprint;
  };

  Index() = default;
  // Validates: postings sorted by doc_id without duplicates, per-doc arrays
  // of equal length. Throws ParseError otherwise.
  explicit Index(Parts parts);

  std::size_t doc_count() const noexcept { return parts_.doc_lengths.size(); }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  const std::vector<std::uint32_t>& doc_lengths() const noexcept { return parts_.doc_lengths; }
  const std::vector<Posting>* postings(std::string_view token) const;
  const auto& all_postings() const noexcept { return parts_.postings; }
  const std::string& drug_name(std::size_t doc_id) const { return parts_.drug_names.at(doc_id); }
  const std::string& rendered_text(std::size_t doc_id) const { return parts_.rendered.at(doc_id); }
  const Bm25Params& params() const noexcept { return parts_.params; }
  const std::string& corpus_fingerprint() const noexcept { return parts_.corpus_fingerprint; }

  // ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
  double idf(std::size_t document_frequency) const;

 private:
  Parts parts_;
  double avg_doc_length_ = 0.0;
};

Index build_index(const Corpus& corpus, Bm25Params params = {});

struct RetrievedEntry {
  std::size_t doc_id = 0;
  std::string drug_name;
  double score = 0.0;
  std::string rendered_text;
};

// Top-k documents by BM25 over the distinct query tokens; only documents
// with a positive score are returned, highest first, ties by doc_id.
std::vector<RetrievedEntry> search(const Index& index, std::string_view query, std::size_t k = 10);

// JSON cache keyed by corpus fingerprint.
void save_index(const Index& index, const std::filesystem::path& path);
// nullopt when the file is missing, unreadable, or built from another corpus
// or with other BM25 constants.
std::optional<Index> load_index(const std::filesystem::path& path,
                                std::string_view corpus_fingerprint, Bm25Params params);
Index load_or_build_index(const Corpus& corpus, const std::filesystem::path& cache,
                          Bm25Params params = {});

}  // namespace herbprobe
