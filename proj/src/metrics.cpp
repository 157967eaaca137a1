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

#include "herbprobe/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "herbprobe/error.hpp"

namespace herbprobe {

namespace {

void require_protocol(const RunLog& run, Protocol protocol, std::string_view what) {
  if (run.meta.protocol != protocol) {
    throw Error(std::string(what) + " needs a " + std::string(to_string(protocol)) + " run, got " +
                std::string(to_string(run.meta.protocol)));
  }
}

std::unordered_map<std::uint64_t, const RunRecord*> by_item(const RunLog& run) {
  std::unordered_map<std::uint64_t, const RunRecord*> out;
  for (const auto& r : run.records) out.emplace(r.item_id, &r);
  return out;
}

Verdict verdict_of(const RunRecord* record) {
  if (record == nullptr || record->error) return Verdict::kInvalid;
  return record->verdict;
}

std::vector<std::string> keys_of(const std::vector<std::string>& display, MarkerMode mode) {
  std::vector<std::string> out;
  out.reserve(display.size());
  for (const auto& d : display) {
    try {
      out.push_back(ingredient_key(d, mode));
    } catch (const ParseError&) {
    }
  }
  return out;
}

std::vector<std::string> keys_of(const DrugRecord& record, MarkerMode mode) {
  std::vector<std::string> out;
  for (const auto& i : record.ingredients) out.push_back(ingredient_key(i, mode));
  return out;
}

}  // namespace

std::string Fraction::percent_2dp() const {
  if (den == 0) return "0.00";
  // round(num * 10000 / den), halves up, in exact integer arithmetic.
  const unsigned __int128 scaled = static_cast<unsigned __int128>(num) * 20000u + den;
  const auto hundredths = static_cast<std::uint64_t>(scaled / (static_cast<unsigned __int128>(den) * 2u));
  auto frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

ConfusionResult confusion(const RunLog& run, const EvalDataset& dataset, InvalidPolicy policy) {
  require_protocol(run, Protocol::kVerify, "confusion");
  const auto records = by_item(run);
  ConfusionResult result;
  for (const auto& item : dataset.items) {
    const auto it = records.find(item.item_id);
    const auto verdict = verdict_of(it == records.end() ? nullptr : it->second);
    const bool expect_yes = item.expected == Answer::kYes;
    if (verdict == Verdict::kInvalid) {
      ++result.invalid_count;
      if (policy == InvalidPolicy::kExclude) continue;
      ++(expect_yes ? result.cm.fn : result.cm.fp);
      continue;
    }
    const bool said_yes = verdict == Verdict::kYes;
    if (expect_yes) {
      ++(said_yes ? result.cm.tp : result.cm.fn);
    } else {
      ++(said_yes ? result.cm.fp : result.cm.tn);
    }
  }
  return result;
}

MetricsRow prf1(const ConfusionMatrix& cm, std::size_t invalid_count) {
  if (cm.total() == 0) throw Error("prf1: empty confusion matrix");
  MetricsRow row;
  row.accuracy = {cm.tp + cm.tn, cm.total()};
  row.precision = {cm.tp, cm.tp + cm.fp};
  row.recall = {cm.tp, cm.tp + cm.fn};
  const auto f1_den = 2 * cm.tp + cm.fp + cm.fn;
  row.f1 = cm.tp == 0 ? Fraction{0, 1} : Fraction{2 * cm.tp, f1_den};
  row.invalid_count = invalid_count;
  return row;
}

BiasAccuracy bias_accuracy(const RunLog& run, const EvalDataset& dataset, InvalidPolicy policy) {
  const auto result = confusion(run, dataset, policy);
  return BiasAccuracy{{result.cm.tn, result.cm.expected_no()}, {result.cm.tp, result.cm.expected_yes()}};
}

RepetitionReport detect_repetition(const std::vector<std::string>& predicted, std::size_t threshold) {
  RepetitionReport report;
  std::size_t run = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    run = (i > 0 && predicted[i] == predicted[i - 1]) ? run + 1 : 1;
    report.max_run_length = std::max(report.max_run_length, run);
  }
  const std::set<std::string> distinct(predicted.begin(), predicted.end());
  report.duplicate_count = predicted.size() - distinct.size();
  report.flagged = report.max_run_length >= threshold;
  return report;
}

LiteralReport detect_literal(std::string_view drug_name, const std::vector<std::string>& predicted,
                             const std::vector<std::string>& oracle) {
  const std::set<std::string> truth(oracle.begin(), oracle.end());
  LiteralReport report;
  std::set<std::string> seen;
  for (const auto& name : predicted) {
    if (name.empty() || truth.contains(name) || !seen.insert(name).second) continue;
    if (drug_name.find(name) != std::string_view::npos) report.literal_hits.push_back(name);
  }
  report.flagged = !report.literal_hits.empty();
  return report;
}

InquiryScores inquiry_scores(const RunLog& run, const Corpus& corpus, MarkerMode mode,
                             std::size_t repetition_threshold) {
  require_protocol(run, Protocol::kInquiry, "inquiry_scores");
  InquiryScores out;
  std::uint64_t sum_hits = 0;
  std::uint64_t sum_pred = 0;
  std::uint64_t sum_oracle = 0;
  double macro_p = 0.0;
  std::size_t macro_p_count = 0;
  double macro_r = 0.0;
  double macro_f = 0.0;
  for (const auto& record : run.records) {
    const auto* drug = corpus.find(record.drug_name);
    if (drug == nullptr) continue;
    ItemScore score;
    score.item_id = record.item_id;
    score.drug_name = record.drug_name;
    score.errored = record.error.has_value();
    const auto predicted_keys = keys_of(record.parsed_ingredients, mode);
    const auto oracle_keys = keys_of(*drug, mode);
    const std::set<std::string> predicted(predicted_keys.begin(), predicted_keys.end());
    const std::set<std::string> oracle(oracle_keys.begin(), oracle_keys.end());
    score.predicted = predicted.size();
    score.oracle = oracle.size();
    for (const auto& k : predicted) score.hits += oracle.contains(k) ? 1 : 0;
    score.precision = {score.hits, score.predicted};
    score.recall = {score.hits, score.oracle};
    score.f1 = score.hits == 0 ? 0.0
                               : 2.0 * static_cast<double>(score.hits) /
                                     static_cast<double>(score.predicted + score.oracle);
    score.repetition = detect_repetition(predicted_keys, repetition_threshold);
    score.literal = detect_literal(drug->name, keys_of(record.parsed_ingredients, MarkerMode::kIgnore),
                                   drug->canonical_ingredients());

    sum_hits += score.hits;
    sum_pred += score.predicted;
    sum_oracle += score.oracle;
    if (score.precision.defined()) {
      macro_p += score.precision.value();
      ++macro_p_count;
    } else {
      ++out.empty_answers;
    }
    macro_r += score.recall.value();
    macro_f += score.f1;
    out.repetition_flagged += score.repetition.flagged ? 1 : 0;
    out.literal_flagged += score.literal.flagged ? 1 : 0;
    out.items.push_back(std::move(score));
  }
  out.micro_precision = {sum_hits, sum_pred};
  out.micro_recall = {sum_hits, sum_oracle};
  out.micro_f1 = sum_hits == 0 ? 0.0
                               : 2.0 * static_cast<double>(sum_hits) /
                                     static_cast<double>(sum_pred + sum_oracle);
  if (macro_p_count > 0) out.macro_precision = macro_p / static_cast<double>(macro_p_count);
  if (!out.items.empty()) {
    out.macro_recall = macro_r / static_cast<double>(out.items.size());
    out.macro_f1 = macro_f / static_cast<double>(out.items.size());
  }
  return out;
}

std::vector<HerbStats> herb_frequency(const RunLog& run, const Corpus& corpus,
                                      const EvalDataset& dataset, MarkerMode mode) {
  require_protocol(run, Protocol::kInquiry, "herb_frequency");
  const auto records = by_item(run);
  std::map<std::string, HerbStats> stats;
  const auto entry = [&](const std::string& herb) -> HerbStats& {
    auto& s = stats[herb];
    s.herb = herb;
    return s;
  };
  for (const auto& item : dataset.items) {
    const auto it = records.find(item.item_id);
    const auto* drug = corpus.find(item.drug_name);
    if (it == records.end() || drug == nullptr) continue;
    const auto oracle_keys = keys_of(*drug, mode);
    const std::set<std::string> oracle(oracle_keys.begin(), oracle_keys.end());
    const auto mentions = keys_of(it->second->parsed_ingredients, mode);
    const std::set<std::string> predicted(mentions.begin(), mentions.end());
    for (const auto& h : oracle) {
      auto& s = entry(h);
      ++s.oracle_freq;
      ++(predicted.contains(h) ? s.tp : s.fn);
    }
    for (const auto& h : mentions) ++entry(h).total_mentions;
    for (const auto& h : predicted) {
      auto& s = entry(h);
      ++s.response_freq;
      if (!oracle.contains(h)) ++s.fp;
    }
  }
  std::vector<HerbStats> out;
  out.reserve(stats.size());
  for (auto& [herb, s] : stats) {
    s.precision = {s.tp, s.tp + s.fp};
    s.recall = {s.tp, s.tp + s.fn};
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const HerbStats& a, const HerbStats& b) { return a.oracle_freq > b.oracle_freq; });
  return out;
}

HerbReport top_bottom_herb_report(const std::vector<HerbStats>& stats, std::size_t n) {
  std::vector<HerbStats> present;
  std::copy_if(stats.begin(), stats.end(), std::back_inserter(present),
               [](const HerbStats& s) { return s.oracle_freq > 0; });
  HerbReport report;
  auto top = present;
  std::sort(top.begin(), top.end(), [](const HerbStats& a, const HerbStats& b) {
    return a.oracle_freq != b.oracle_freq ? a.oracle_freq > b.oracle_freq : a.herb < b.herb;
  });
  auto bottom = std::move(present);
  std::sort(bottom.begin(), bottom.end(), [](const HerbStats& a, const HerbStats& b) {
    return a.oracle_freq != b.oracle_freq ? a.oracle_freq < b.oracle_freq : a.herb < b.herb;
  });
  top.resize(std::min(n, top.size()));
  bottom.resize(std::min(n, bottom.size()));
  report.top = std::move(top);
  report.bottom = std::move(bottom);
  return report;
}

}  // namespace herbprobe
