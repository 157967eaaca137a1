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

#include "herbprobe/dataset.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/version.hpp"

namespace herbprobe {

namespace {

using nlohmann::json;

constexpr std::string_view kReplacementRule = "max(1,ceil(n/2))";

std::string_view to_string(DatasetView view) {
  switch (view) {
    case DatasetView::kTrueOnly: return "T";
    case DatasetView::kFalseOnly: return "F";
    case DatasetView::kMixed: break;
  }
  return "mixed";
}

}  // namespace

std::string_view to_string(Subset subset) { return subset == Subset::kTrue ? "T" : "F"; }
std::string_view to_string(Answer answer) { return answer == Answer::kYes ? "Yes" : "No"; }

std::size_t EvalDataset::count(Subset subset) const {
  return static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [&](const EvalItem& i) { return i.subset == subset; }));
}

const EvalItem* EvalDataset::find(std::uint64_t item_id) const {
  const auto it = std::find_if(items.begin(), items.end(),
                               [&](const EvalItem& i) { return i.item_id == item_id; });
  return it == items.end() ? nullptr : &*it;
}

EvalDataset EvalDataset::only(Subset subset) const {
  EvalDataset out;
  out.seed = seed;
  out.corpus_fingerprint = corpus_fingerprint;
  out.view = subset == Subset::kTrue ? DatasetView::kTrueOnly : DatasetView::kFalseOnly;
  std::copy_if(items.begin(), items.end(), std::back_inserter(out.items),
               [&](const EvalItem& i) { return i.subset == subset; });
  return out;
}

std::string EvalDataset::fingerprint() const { return sha256_hex(serialize_dataset(*this)); }

Halves split_halves(std::span<const std::size_t> record_ids, Rng& rng) {
  if (record_ids.empty()) throw Error("cannot split an empty record list");
  std::vector<std::size_t> ids(record_ids.begin(), record_ids.end());
  rng.shuffle(ids);
  const auto true_count = (ids.size() + 1) / 2;
  Halves halves;
  halves.true_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(true_count));
  halves.false_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(true_count), ids.end());
  return halves;
}

std::size_t replacement_count(std::size_t n) { return std::max<std::size_t>(1, (n + 1) / 2); }

Perturbation perturb_ingredients(std::string_view drug_name, std::span<const Ingredient> truth,
                                 const std::set<std::string>& pool, Rng& rng) {
  if (truth.empty()) throw Error("drug " + std::string(drug_name) + " has no ingredients");
  const auto r = replacement_count(truth.size());

  std::set<std::string_view> own;
  for (const auto& i : truth) own.insert(i.canonical);
  // Sorted candidate list; pool is an ordered set so draws are reproducible.
  std::vector<std::string> candidates;
  for (const auto& herb : pool) {
    if (!own.contains(herb)) candidates.push_back(herb);
  }
  if (candidates.size() < r) {
    throw Error("ingredient pool too small to perturb drug " + std::string(drug_name) + ": need " +
                std::to_string(r) + " replacements, have " + std::to_string(candidates.size()));
  }

  // Partial Fisher-Yates over positions.
  std::vector<std::size_t> positions(truth.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  for (std::size_t i = 0; i < r; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(positions.size() - i));
    std::swap(positions[i], positions[j]);
  }
  positions.resize(r);
  std::sort(positions.begin(), positions.end());

  Perturbation out;
  for (const auto& i : truth) out.presented.push_back(i.display());
  for (const auto pos : positions) {
    const auto pick = static_cast<std::size_t>(rng.below(candidates.size()));
    out.presented[pos] = candidates[pick];
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  out.replaced_positions = std::move(positions);
  return out;
}

EvalDataset build_dataset(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.size() < 2) throw Error("dataset needs at least two corpus records");
  Rng rng(seed);
  std::vector<std::size_t> ids(corpus.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  auto halves = split_halves(ids, rng);
  std::sort(halves.true_ids.begin(), halves.true_ids.end());
  std::sort(halves.false_ids.begin(), halves.false_ids.end());

  EvalDataset dataset;
  dataset.seed = seed;
  dataset.corpus_fingerprint = corpus.fingerprint();
  std::vector<EvalItem> items(corpus.size());
  for (const auto id : halves.true_ids) {
    const auto& record = corpus.records()[id];
    items[id] = EvalItem{id, record.name, record.display_ingredients(), Subset::kTrue,
                         Answer::kYes, {}};
  }
  for (const auto id : halves.false_ids) {
    const auto& record = corpus.records()[id];
    auto p = perturb_ingredients(record.name, record.ingredients, corpus.ingredient_pool(), rng);
    items[id] = EvalItem{id,           record.name,   std::move(p.presented),
                         Subset::kFalse, Answer::kNo, std::move(p.replaced_positions)};
  }
  rng.shuffle(items);
  dataset.items = std::move(items);
  return dataset;
}

std::string serialize_dataset(const EvalDataset& dataset) {
  json meta;
  meta["tool"] = kToolName;
  meta["tool_version"] = kToolVersion;
  meta["seed"] = dataset.seed;
  meta["corpus_fingerprint"] = dataset.corpus_fingerprint;
  meta["view"] = to_string(dataset.view);
  meta["replacement_rule"] = kReplacementRule;
  meta["items"] = dataset.items.size();
  std::string out = json{{"meta", meta}}.dump();
  out += '\n';
  for (const auto& item : dataset.items) {
    json line;
    line["item_id"] = item.item_id;
    line["drug_name"] = item.drug_name;
    line["presented_ingredients"] = item.presented_ingredients;
    line["subset"] = to_string(item.subset);
    line["expected"] = to_string(item.expected);
    line["replaced_positions"] = item.replaced_positions;
    out += line.dump();
    out += '\n';
  }
  return out;
}

EvalDataset parse_dataset(std::string_view jsonl) {
  EvalDataset dataset;
  bool have_meta = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::set<std::uint64_t> ids;
  while (start < jsonl.size()) {
    const auto nl = jsonl.find('\n', start);
    const auto end = nl == std::string_view::npos ? jsonl.size() : nl;
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    try {
      if (!have_meta) {
        const auto& meta = obj.at("meta");
        dataset.seed = meta.at("seed").get<std::uint64_t>();
        dataset.corpus_fingerprint = meta.at("corpus_fingerprint").get<std::string>();
        const auto view = meta.value("view", std::string("mixed"));
        dataset.view = view == "T"   ? DatasetView::kTrueOnly
                       : view == "F" ? DatasetView::kFalseOnly
                                     : DatasetView::kMixed;
        have_meta = true;
        continue;
      }
      EvalItem item;
      item.item_id = obj.at("item_id").get<std::uint64_t>();
      item.drug_name = obj.at("drug_name").get<std::string>();
      item.presented_ingredients = obj.at("presented_ingredients").get<std::vector<std::string>>();
      const auto subset = obj.at("subset").get<std::string>();
      const auto expected = obj.at("expected").get<std::string>();
      if (subset != "T" && subset != "F") throw ParseError("subset must be T or F", line_no);
      if (expected != "Yes" && expected != "No") {
        throw ParseError("expected must be Yes or No", line_no);
      }
      item.subset = subset == "T" ? Subset::kTrue : Subset::kFalse;
      item.expected = expected == "Yes" ? Answer::kYes : Answer::kNo;
      item.replaced_positions = obj.at("replaced_positions").get<std::vector<std::size_t>>();
      const bool consistent =
          item.subset == Subset::kTrue
              ? item.expected == Answer::kYes && item.replaced_positions.empty()
              : item.expected == Answer::kNo && !item.replaced_positions.empty();
      if (!consistent) throw ParseError("subset, expected and replaced_positions disagree", line_no);
      if (item.presented_ingredients.empty()) throw ParseError("empty ingredient list", line_no);
      if (!ids.insert(item.item_id).second) throw ParseError("duplicate item_id", line_no);
      dataset.items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad dataset line: ") + e.what(), line_no);
    }
  }
  if (!have_meta) throw ParseError("dataset has no meta line");
  return dataset;
}

EvalDataset load_dataset(const std::filesystem::path& path) {
  try {
    return parse_dataset(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_dataset(const EvalDataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(dataset));
}

}  // namespace herbprobe
