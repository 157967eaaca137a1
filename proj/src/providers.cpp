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

#include "herbprobe/providers.hpp"

#include <algorithm>
#include <set>

#include "herbprobe/error.hpp"
#include "herbprobe/log.hpp"
#include "herbprobe/rng.hpp"

namespace herbprobe {

namespace {

constexpr std::string_view kYes = "是";
constexpr std::string_view kNo = "否";

std::string join_list(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += "、";
    out += names[i];
  }
  return out;
}

std::set<std::string> key_set(const std::vector<std::string>& display_names, MarkerMode mode) {
  std::set<std::string> keys;
  for (const auto& name : display_names) keys.insert(ingredient_key(name, mode));
  return keys;
}

std::set<std::string> key_set(const DrugRecord& record, MarkerMode mode) {
  std::set<std::string> keys;
  for (const auto& i : record.ingredients) keys.insert(ingredient_key(i, mode));
  return keys;
}

ProviderResponse unsupported(std::string_view provider, Protocol protocol) {
  return ProviderResponse::failure(
      "unsupported", std::string(provider) + " provider does not answer " +
                         std::string(to_string(protocol)) + " questions");
}

}  // namespace

Question make_question(const EvalItem& item, Protocol protocol, Language lang) {
  Question q;
  q.item_id = item.item_id;
  q.protocol = protocol;
  q.drug_name = item.drug_name;
  if (protocol == Protocol::kVerify) {
    q.ingredients = item.presented_ingredients;
    q.prompt = build_verify_prompt(item.drug_name, item.presented_ingredients, lang);
  } else {
    q.prompt = build_inquiry_prompt(item.drug_name, lang);
  }
  return q;
}

ProviderResponse ProviderResponse::text(std::string raw) {
  ProviderResponse r;
  r.raw_text = std::move(raw);
  return r;
}

ProviderResponse ProviderResponse::failure(std::string kind, std::string message) {
  ProviderResponse r;
  r.error = ProviderError{std::move(kind), std::move(message), 0, 0};
  return r;
}

ProviderResponse OracleProvider::complete(const Question& question) const {
  const auto* record = corpus_.find(question.drug_name);
  if (record == nullptr) {
    return ProviderResponse::failure("unknown_drug", "not in corpus: " + question.drug_name);
  }
  if (question.protocol == Protocol::kInquiry) {
    return ProviderResponse::text(join_list(record->display_ingredients()));
  }
  const bool match = key_set(question.ingredients, mode_) == key_set(*record, mode_);
  return ProviderResponse::text(std::string(match ? kYes : kNo));
}

ProviderResponse GroundedVerifier::complete(const Question& question) const {
  if (index_.corpus_fingerprint() != corpus_.fingerprint()) {
    return ProviderResponse::failure("config", "index was built from a different corpus");
  }
  auto hits = search(index_, question.drug_name, 1);
  const bool miss = hits.empty() || hits.front().drug_name != question.drug_name;
  ProviderResponse response;
  if (miss) {
    log_warning("grounded verifier: no entry retrieved for " + question.drug_name);
    response = ProviderResponse::text(
        question.protocol == Protocol::kVerify ? std::string(kNo) : std::string());
  } else {
    const auto& record = corpus_.records().at(hits.front().doc_id);
    if (question.protocol == Protocol::kInquiry) {
      response = ProviderResponse::text(join_list(record.display_ingredients()));
    } else {
      const bool match = key_set(question.ingredients, mode_) == key_set(record, mode_);
      response = ProviderResponse::text(std::string(match ? kYes : kNo));
    }
  }
  response.retrieval_context = std::move(hits);
  return response;
}

std::vector<std::string> LiteralProvider::literal_herbs(std::string_view drug_name) const {
  std::vector<std::pair<std::size_t, std::string>> found;
  for (const auto& herb : corpus_.ingredient_pool()) {
    // Byte search is code-point safe: UTF-8 is self-synchronizing.
    if (const auto pos = drug_name.find(herb); pos != std::string_view::npos) {
      found.emplace_back(pos, herb);
    }
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.size() != b.second.size()) return a.second.size() > b.second.size();
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (auto& [pos, herb] : found) out.push_back(std::move(herb));
  return out;
}

std::vector<std::string> LiteralProvider::answer(std::string_view drug_name) const {
  auto out = literal_herbs(drug_name);
  const auto& ranked = corpus_.herbs_by_frequency();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i) {
    if (std::find(out.begin(), out.end(), ranked[i].first) == out.end()) {
      out.push_back(ranked[i].first);
    }
  }
  return out;
}

ProviderResponse LiteralProvider::complete(const Question& question) const {
  if (question.protocol == Protocol::kInquiry) {
    return ProviderResponse::text(join_list(answer(question.drug_name)));
  }
  const auto presented = key_set(question.ingredients, MarkerMode::kIgnore);
  const auto named = literal_herbs(question.drug_name);
  const bool all_present = std::all_of(named.begin(), named.end(),
                                       [&](const std::string& h) { return presented.contains(h); });
  return ProviderResponse::text(std::string(all_present ? kYes : kNo));
}

CommonHerbProvider::CommonHerbProvider(const Corpus& corpus, std::size_t m) {
  const auto& ranked = corpus.herbs_by_frequency();
  for (std::size_t i = 0; i < std::min(m, ranked.size()); ++i) herbs_.push_back(ranked[i].first);
}

ProviderResponse CommonHerbProvider::complete(const Question& question) const {
  if (question.protocol == Protocol::kInquiry) return ProviderResponse::text(join_list(herbs_));
  return ProviderResponse::text(std::string(kYes));
}

ProviderResponse BiasedVerifier::complete(const Question& question) const {
  if (question.protocol != Protocol::kVerify) return unsupported("biased", question.protocol);
  bool yes = mode_ == BiasMode::kAlwaysYes;
  if (mode_ == BiasMode::kBernoulli) {
    Rng rng(mix_seed(seed_, question.item_id));
    yes = rng.unit() < p_;
  }
  return ProviderResponse::text(std::string(yes ? kYes : kNo));
}

FixedConfusionProvider::FixedConfusionProvider(const ConfusionMatrix& cm, const EvalDataset& dataset,
                                               std::uint64_t seed) {
  std::vector<std::uint64_t> positives;
  std::vector<std::uint64_t> negatives;
  for (const auto& item : dataset.items) {
    (item.expected == Answer::kYes ? positives : negatives).push_back(item.item_id);
  }
  if (cm.expected_yes() != positives.size() || cm.expected_no() != negatives.size()) {
    throw ConfigError("confusion matrix rows (tp+fn=" + std::to_string(cm.expected_yes()) +
                      ", fp+tn=" + std::to_string(cm.expected_no()) + ") do not match the dataset (" +
                      std::to_string(positives.size()) + " T, " + std::to_string(negatives.size()) +
                      " F)");
  }
  std::sort(positives.begin(), positives.end());
  std::sort(negatives.begin(), negatives.end());
  Rng rng(seed);
  rng.shuffle(positives);
  rng.shuffle(negatives);
  for (std::size_t i = 0; i < positives.size(); ++i) says_yes_[positives[i]] = i < cm.tp;
  for (std::size_t i = 0; i < negatives.size(); ++i) says_yes_[negatives[i]] = i < cm.fp;
}

ProviderResponse FixedConfusionProvider::complete(const Question& question) const {
  if (question.protocol != Protocol::kVerify) return unsupported("fixed_confusion", question.protocol);
  const auto it = says_yes_.find(question.item_id);
  if (it == says_yes_.end()) {
    return ProviderResponse::failure("unknown_item",
                                     "item " + std::to_string(question.item_id) + " not in dataset");
  }
  return ProviderResponse::text(std::string(it->second ? kYes : kNo));
}

RagProvider::RagProvider(std::shared_ptr<const Provider> inner, const Index& index, std::size_t k,
                         Language lang)
    : inner_(std::move(inner)), index_(index), k_(k), lang_(lang) {
  if (!inner_) throw ConfigError("rag provider needs an inner provider");
  if (k_ == 0) throw ConfigError("rag k must be at least 1");
}

std::string RagProvider::query_for(const Question& question) {
  std::string query = question.drug_name;
  if (question.protocol == Protocol::kVerify) {
    for (const auto& i : question.ingredients) {
      query += ' ';
      query += i;
    }
  }
  return query;
}

ProviderResponse RagProvider::complete(const Question& question) const {
  auto entries = search(index_, query_for(question), k_);
  std::string context;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0) context += "\n\n";
    context += entries[i].rendered_text;
  }
  if (entries.empty()) {
    log_warning("rag: empty retrieval context for item " + std::to_string(question.item_id));
  }
  Question wrapped = question;
  wrapped.prompt = build_rag_prompt(context, question.prompt, lang_);
  auto response = inner_->complete(wrapped);
  response.retrieval_context = std::move(entries);
  return response;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, const ProviderContext& context) {
  config.validate();
  const auto need_corpus = [&]() -> const Corpus& {
    if (context.corpus == nullptr) {
      throw ConfigError(std::string(to_string(config.kind)) + " provider needs a corpus");
    }
    return *context.corpus;
  };
  const auto need_index = [&]() -> const Index& {
    if (context.index == nullptr) {
      throw ConfigError(std::string(to_string(config.kind)) + " provider needs a retrieval index");
    }
    return *context.index;
  };
  switch (config.kind) {
    case ProviderKind::kOracle:
      return std::make_unique<OracleProvider>(need_corpus(), config.marker_mode);
    case ProviderKind::kGrounded: {
      const auto& corpus = need_corpus();
      const auto& index = need_index();
      if (index.corpus_fingerprint() != corpus.fingerprint()) {
        throw ConfigError("grounded provider: index was built from a different corpus");
      }
      return std::make_unique<GroundedVerifier>(corpus, index, config.marker_mode);
    }
    case ProviderKind::kLiteral:
      return std::make_unique<LiteralProvider>(need_corpus());
    case ProviderKind::kCommonHerb:
      return std::make_unique<CommonHerbProvider>(need_corpus(), config.m);
    case ProviderKind::kBiased:
      return std::make_unique<BiasedVerifier>(config.bias_mode, config.p, config.seed);
    case ProviderKind::kFixedConfusion:
      if (context.dataset == nullptr) throw ConfigError("fixed_confusion provider needs a dataset");
      return std::make_unique<FixedConfusionProvider>(config.cm, *context.dataset, config.seed);
    case ProviderKind::kRag: {
      std::shared_ptr<const Provider> inner = make_provider(*config.inner, context);
      return std::make_unique<RagProvider>(std::move(inner), need_index(), config.k, context.lang);
    }
    case ProviderKind::kRemote:
      return std::make_unique<RemoteProvider>(config);
  }
  throw ConfigError("unhandled provider kind");
}

}  // namespace herbprobe
