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

#include "herbprobe/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <unordered_map>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/unicode.hpp"

namespace herbprobe {

namespace {

using nlohmann::json;

void flush_cjk(const std::u32string& run, std::vector<std::string>& out) {
  for (char32_t cp : run) out.push_back(unicode::encode(std::u32string_view(&cp, 1)));
  for (std::size_t i = 0; i + 1 < run.size(); ++i) {
    out.push_back(unicode::encode(std::u32string_view(run).substr(i, 2)));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::u32string cjk;
  std::string word;
  const auto flush = [&] {
    if (!cjk.empty()) flush_cjk(cjk, out);
    if (!word.empty()) out.push_back(word);
    cjk.clear();
    word.clear();
  };
  for (char32_t cp : unicode::decode(text)) {
    cp = unicode::to_lower_ascii(unicode::fold_fullwidth(cp));
    if (unicode::is_cjk(cp)) {
      if (!word.empty()) flush();
      cjk.push_back(cp);
    } else if (unicode::is_alnum(cp)) {
      if (!cjk.empty()) flush();
      unicode::append(word, cp);
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string document_text(const DrugRecord& record) {
  std::string text = record.name;
  for (const auto& i : record.ingredients) {
    text += ' ';
    text += i.display();
  }
  if (record.source_text) {
    text += '\n';
    text += *record.source_text;
  }
  return text;
}

std::string render_entry(const DrugRecord& record) {
  std::string text = "【" + record.name + "】\n【处方】";
  for (std::size_t i = 0; i < record.ingredients.size(); ++i) {
    if (i > 0) text += "、";
    text += record.ingredients[i].display();
  }
  if (record.source_text) {
    text += '\n';
    text += *record.source_text;
  }
  return text;
}

Index::Index(Parts parts) : parts_(std::move(parts)) {
  const auto n = parts_.doc_lengths.size();
  if (parts_.drug_names.size() != n || parts_.rendered.size() != n) {
    throw ParseError("index per-document arrays disagree in length");
  }
  for (const auto& [token, list] : parts_.postings) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].doc_id >= n) throw ParseError("posting for " + token + " out of range");
      if (i > 0 && list[i - 1].doc_id >= list[i].doc_id) {
        throw ParseError("postings for " + token + " not strictly sorted");
      }
    }
  }
  if (n > 0) {
    const double total = std::accumulate(parts_.doc_lengths.begin(), parts_.doc_lengths.end(), 0.0);
    avg_doc_length_ = total / static_cast<double>(n);
  }
}

const std::vector<Posting>* Index::postings(std::string_view token) const {
  const auto it = parts_.postings.find(token);
  return it == parts_.postings.end() ? nullptr : &it->second;
}

double Index::idf(std::size_t document_frequency) const {
  const auto n = static_cast<double>(doc_count());
  const auto df = static_cast<double>(document_frequency);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

Index build_index(const Corpus& corpus, Bm25Params params) {
  Index::Parts parts;
  parts.params = params;
  parts.corpus_fingerprint = corpus.fingerprint();
  for (std::size_t doc = 0; doc < corpus.size(); ++doc) {
    const auto& record = corpus.records()[doc];
    const auto tokens = tokenize(document_text(record));
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    // Documents are visited in ascending order, so appending keeps lists sorted.
    for (const auto& [token, count] : tf) {
      parts.postings[std::string(token)].push_back(Posting{static_cast<std::uint32_t>(doc), count});
    }
    parts.doc_lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
    parts.drug_names.push_back(record.name);
    parts.rendered.push_back(render_entry(record));
  }
  return Index(std::move(parts));
}

std::vector<RetrievedEntry> search(const Index& index, std::string_view query, std::size_t k) {
  if (k == 0) throw Error("search: k must be at least 1");
  auto tokens = tokenize(query);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

  const auto& p = index.params();
  const double avgdl = index.avg_doc_length();
  std::unordered_map<std::uint32_t, double> scores;
  for (const auto& token : tokens) {
    const auto* list = index.postings(token);
    if (list == nullptr || list->empty()) continue;
    const double idf = index.idf(list->size());
    for (const auto& posting : *list) {
      const double tf = posting.term_frequency;
      const double dl = index.doc_lengths()[posting.doc_id];
      const double norm = p.k1 * (1.0 - p.b + p.b * (avgdl > 0.0 ? dl / avgdl : 0.0));
      scores[posting.doc_id] += idf * tf * (p.k1 + 1.0) / (tf + norm);
    }
  }

  std::vector<std::pair<std::uint32_t, double>> ranked;
  ranked.reserve(scores.size());
  for (const auto& [doc, score] : scores) {
    if (score > 0.0) ranked.emplace_back(doc, score);
  }
  const auto better = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  const auto take = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take),
                    ranked.end(), better);
  ranked.resize(take);

  std::vector<RetrievedEntry> out;
  out.reserve(take);
  for (const auto& [doc, score] : ranked) {
    out.push_back(RetrievedEntry{doc, index.drug_name(doc), score, index.rendered_text(doc)});
  }
  return out;
}

void save_index(const Index& index, const std::filesystem::path& path) {
  json postings = json::object();
  for (const auto& [token, list] : index.all_postings()) {
    json arr = json::array();
    for (const auto& posting : list) arr.push_back({posting.doc_id, posting.term_frequency});
    postings[token] = std::move(arr);
  }
  json doc;
  doc["corpus_fingerprint"] = index.corpus_fingerprint();
  doc["k1"] = index.params().k1;
  doc["b"] = index.params().b;
  doc["doc_lengths"] = index.doc_lengths();
  json names = json::array();
  json rendered = json::array();
  for (std::size_t i = 0; i < index.doc_count(); ++i) {
    names.push_back(index.drug_name(i));
    rendered.push_back(index.rendered_text(i));
  }
  doc["drug_names"] = std::move(names);
  doc["rendered"] = std::move(rendered);
  doc["postings"] = std::move(postings);
  write_file_atomic(path, doc.dump());
}

std::optional<Index> load_index(const std::filesystem::path& path,
                                std::string_view corpus_fingerprint, Bm25Params params) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const auto doc = json::parse(read_file(path));
    if (doc.at("corpus_fingerprint").get<std::string>() != corpus_fingerprint) return std::nullopt;
    if (doc.at("k1").get<double>() != params.k1 || doc.at("b").get<double>() != params.b) {
      return std::nullopt;
    }
    Index::Parts parts;
    parts.params = params;
    parts.corpus_fingerprint = std::string(corpus_fingerprint);
    parts.doc_lengths = doc.at("doc_lengths").get<std::vector<std::uint32_t>>();
    parts.drug_names = doc.at("drug_names").get<std::vector<std::string>>();
    parts.rendered = doc.at("rendered").get<std::vector<std::string>>();
    for (const auto& [token, arr] : doc.at("postings").items()) {
      auto& list = parts.postings[token];
      for (const auto& pair : arr) {
        list.push_back(Posting{pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>()});
      }
    }
    return Index(std::move(parts));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Index load_or_build_index(const Corpus& corpus, const std::filesystem::path& cache,
                          Bm25Params params) {
  if (auto cached = load_index(cache, corpus.fingerprint(), params)) return std::move(*cached);
  auto index = build_index(corpus, params);
  save_index(index, cache);
  return index;
}

}  // namespace herbprobe
