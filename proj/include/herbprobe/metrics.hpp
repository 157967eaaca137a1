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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "herbprobe/confusion_matrix.hpp"
#include "herbprobe/corpus.hpp"
#include "herbprobe/dataset.hpp"
#include "herbprobe/runner.hpp"

namespace herbprobe {

// Exact non-negative rational; reporting rounds from it, never from a double.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 0;

  bool defined() const noexcept { return den != 0; }
  // 0 when undefined.
  double value() const noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  }
  double percent() const noexcept { return 100.0 * value(); }
  // Percentage rounded half-up to two decimals, e.g. "66.67".
  std::string percent_2dp() const;
};

enum class InvalidPolicy {
  kCountAsIncorrect,  // expected Yes -> fn, expected No -> fp
  kExclude,           // left out of the matrix, reported as invalid_count
};

struct ConfusionResult {
  ConfusionMatrix cm;
  std::size_t invalid_count = 0;
};

// Throws Error when the run is not a verification run over this dataset.
ConfusionResult confusion(const RunLog& run, const EvalDataset& dataset,
                          InvalidPolicy policy = InvalidPolicy::kCountAsIncorrect);

struct MetricsRow {
  Fraction accuracy;
  Fraction precision;  // undefined (reported 0, flagged) when nothing was predicted Yes
  Fraction recall;     // undefined when there are no expected-Yes items
  Fraction f1;         // 2tp / (2tp + fp + fn); 0 when tp = 0
  std::size_t invalid_count = 0;

  bool precision_undefined() const noexcept { return !precision.defined(); }
  bool recall_undefined() const noexcept { return !recall.defined(); }
};

// Throws Error on an empty matrix.
MetricsRow prf1(const ConfusionMatrix& cm, std::size_t invalid_count = 0);

struct BiasAccuracy {
  Fraction on_expected_no;   // tn / F
  Fraction on_expected_yes;  // tp / T
  // |yes - no| in percentage points.
  double bias_points() const noexcept {
    const double d = on_expected_yes.percent() - on_expected_no.percent();
    return d < 0 ? -d : d;
  }
};

BiasAccuracy bias_accuracy(const RunLog& run, const EvalDataset& dataset,
                           InvalidPolicy policy = InvalidPolicy::kCountAsIncorrect);

// ---- failure-pattern detectors --------------------------------------------

struct RepetitionReport {
  std::size_t max_run_length = 0;
  std::size_t duplicate_count = 0;  // entries minus distinct entries
  bool flagged = false;
};

RepetitionReport detect_repetition(const std::vector<std::string>& predicted,
                                   std::size_t threshold = 3);

struct LiteralReport {
  bool flagged = false;
  std::vector<std::string> literal_hits;
};

// Predicted names spelled inside the drug name but absent from the oracle.
LiteralReport detect_literal(std::string_view drug_name, const std::vector<std::string>& predicted,
                             const std::vector<std::string>& oracle);

// ---- inquiry scoring --------------------------------------------------------

struct ItemScore {
  std::uint64_t item_id = 0;
  std::string drug_name;
  std::size_t predicted = 0;  // distinct keys
  std::size_t oracle = 0;
  std::size_t hits = 0;
  Fraction precision;  // undefined for an empty answer
  Fraction recall;
  double f1 = 0.0;
  RepetitionReport repetition;
  LiteralReport literal;
  bool errored = false;
};

struct InquiryScores {
  std::vector<ItemScore> items;
  Fraction micro_precision;
  Fraction micro_recall;
  double micro_f1 = 0.0;
  double macro_precision = 0.0;  // over items with a defined precision
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::size_t empty_answers = 0;
  std::size_t repetition_flagged = 0;
  std::size_t literal_flagged = 0;
};

// Items whose drug is not in the corpus are skipped. Throws Error for a
// verification run.
InquiryScores inquiry_scores(const RunLog& run, const Corpus& corpus,
                             MarkerMode mode = MarkerMode::kIgnore,
                             std::size_t repetition_threshold = 3);

struct HerbStats {
  std::string herb;
  std::size_t oracle_freq = 0;     // dataset drugs whose oracle lists the herb
  std::size_t response_freq = 0;   // responses naming it at least once
  std::size_t total_mentions = 0;  // every mention, repeats included
  std::size_t tp = 0;              // (drug, herb) pairs predicted and in the oracle
  std::size_t fp = 0;
  std::size_t fn = 0;
  Fraction precision;
  Fraction recall;
};

// Over the dataset items the run answered; ordered by oracle_freq desc, then
// herb. Throws Error for a verification run.
std::vector<HerbStats> herb_frequency(const RunLog& run, const Corpus& corpus,
                                      const EvalDataset& dataset,
                                      MarkerMode mode = MarkerMode::kIgnore);

struct HerbReport {
  std::vector<HerbStats> top;
  std::vector<HerbStats> bottom;
};

// Herbs with oracle_freq > 0 only; top by descending and bottom by ascending
// oracle frequency, ties by name.
HerbReport top_bottom_herb_report(const std::vector<HerbStats>& stats, std::size_t n = 10);

}  // namespace herbprobe
