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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "herbprobe/error.hpp"
#include "herbprobe/retrieval.hpp"
#include "support.hpp"

using namespace herbprobe;
using herbprobe::testing::sample_corpus;
using herbprobe::testing::sample_index;

namespace {

// Scores every document directly from its text, no inverted index.
std::vector<double> brute_force_scores(const Corpus& corpus, std::string_view query, double k1, double b) {
  std::vector<std::map<std::string, int>> tf(corpus.size());
  std::vector<double> len(corpus.size());
  double total = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& t : tokenize(document_text(corpus.records()[d]))) ++tf[d][t];
    len[d] = 0;
    for (const auto& [t, c] : tf[d]) len[d] += c;
    total += len[d];
  }
  const double avg = total / static_cast<double>(corpus.size());
  const auto q = tokenize(query);
  const std::set<std::string> distinct(q.begin(), q.end());
  std::vector<double> scores(corpus.size(), 0.0);
  const double n = static_cast<double>(corpus.size());
  for (const auto& term : distinct) {
    double df = 0;
    for (const auto& m : tf) df += m.contains(term) ? 1 : 0;
    if (df == 0) continue;
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto it = tf[d].find(term);
      if (it == tf[d].end()) continue;
      const double f = it->second;
      scores[d] += idf * f * (k1 + 1) / (f + k1 * (1 - b + b * len[d] / avg));
    }
  }
  return scores;
}

std::vector<std::string> queries() {
  std::vector<std::string> qs;
  for (const auto& r : sample_corpus().records()) {
    qs.push_back(r.name);
    std::string q = r.name;
    for (const auto& i : r.ingredients) q += " " + i.canonical;
    qs.push_back(q);
  }
  for (const char* extra : {"丹参 三七", "甘草", "清热解毒", "当归川芎", "no match here", "颗粒", "茶叶"}) {
    qs.push_back(extra);
  }
  return qs;
}

}  // namespace

TEST_CASE("tokenize: CJK unigrams and bigrams, lower-cased words") {
  CHECK(tokenize("四物颗粒") ==
        std::vector<std::string>{"四", "物", "颗", "粒", "四物", "物颗", "颗粒"});
  CHECK(tokenize("Hello, World 42") == std::vector<std::string>{"hello", "world", "42"});
  CHECK(tokenize("丹参ABC片") == std::vector<std::string>{"丹", "参", "丹参", "abc", "片"});
  CHECK(tokenize("茶") == std::vector<std::string>{"茶"});
  CHECK(tokenize("、。 ！").empty());
}

TEST_CASE("BM25 matches a brute-force scorer to 1e-9") {
  const auto& corpus = sample_corpus();
  const auto& index = sample_index();
  REQUIRE(index.doc_count() == corpus.size());
  for (const auto& q : queries()) {
    const auto expected = brute_force_scores(corpus, q, 1.2, 0.75);
    const auto got = search(index, q, corpus.size());
    std::size_t positive = 0;
    for (double s : expected) positive += s > 0 ? 1 : 0;
    CHECK(got.size() == positive);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i].score - expected[got[i].doc_id]) < 1e-9);
      CHECK(got[i].drug_name == corpus.records()[got[i].doc_id].name);
      if (i > 0) {
        const bool ordered = got[i - 1].score > got[i].score ||
                             (got[i - 1].score == got[i].score && got[i - 1].doc_id < got[i].doc_id);
        CHECK(ordered);
      }
    }
  }
}

TEST_CASE("other BM25 constants also match the brute-force scorer") {
  const auto& corpus = sample_corpus();
  const auto index = build_index(corpus, Bm25Params{2.0, 0.3});
  for (const auto& q : {"四物颗粒", "丹参 冰片 三七", "甘草"}) {
    const auto expected = brute_force_scores(corpus, q, 2.0, 0.3);
    for (const auto& e : search(index, q, corpus.size())) {
      CHECK(std::abs(e.score - expected[e.doc_id]) < 1e-9);
    }
  }
}

TEST_CASE("exact-name queries hit at rank 1") {
  const auto& corpus = sample_corpus();
  for (const auto& r : corpus.records()) {
    const auto top = search(sample_index(), r.name, 1);
    REQUIRE(top.size() == 1);
    CHECK_MESSAGE(top[0].drug_name == r.name, r.name);
  }
}

TEST_CASE("top-k rankings are prefix-consistent") {
  for (const auto& q : queries()) {
    const auto ten = search(sample_index(), q, 10);
    for (std::size_t k = 1; k <= 10; ++k) {
      const auto shorter = search(sample_index(), q, k);
      REQUIRE(shorter.size() == std::min(k, ten.size()));
      for (std::size_t i = 0; i < shorter.size(); ++i) CHECK(shorter[i].doc_id == ten[i].doc_id);
    }
  }
}

TEST_CASE("search edge cases") {
  CHECK_THROWS_AS(search(sample_index(), "四物颗粒", 0), Error);
  CHECK(search(sample_index(), "zzz qqq", 10).empty());
  CHECK(search(sample_index(), "", 10).empty());
}

TEST_CASE("rendered entries carry name and formula") {
  const auto& corpus = sample_corpus();
  const auto idx = *corpus.index_of("三七伤药胶囊");
  const auto& text = sample_index().rendered_text(idx);
  CHECK(text.rfind("【三七伤药胶囊】\n【处方】三七、草乌（蒸）、", 0) == 0);
}

TEST_CASE("index cache round-trips and detects staleness") {
  herbprobe::testing::TempDir dir;
  const auto path = dir / "index.json";
  const auto& corpus = sample_corpus();
  save_index(sample_index(), path);
  const auto loaded = load_index(path, corpus.fingerprint(), Bm25Params{});
  REQUIRE(loaded);
  CHECK(loaded->doc_count() == sample_index().doc_count());
  CHECK(loaded->all_postings() .size() == sample_index().all_postings().size());
  for (const auto& q : {"四物颗粒", "丹参 三七"}) {
    const auto a = search(*loaded, q, 10);
    const auto b = search(sample_index(), q, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].doc_id == b[i].doc_id);
      CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-12));
    }
  }
  CHECK_FALSE(load_index(path, "not-the-fingerprint", Bm25Params{}));
  CHECK_FALSE(load_index(path, corpus.fingerprint(), Bm25Params{1.5, 0.75}));
  CHECK_FALSE(load_index(dir / "missing.json", corpus.fingerprint(), Bm25Params{}));

  const auto rebuilt = load_or_build_index(corpus, dir / "fresh.json");
  CHECK(std::filesystem::exists(dir / "fresh.json"));
  CHECK(rebuilt.doc_count() == corpus.size());
}

TEST_CASE("Index rejects unsorted postings") {
  Index::Parts parts;
  parts.doc_lengths = {1, 1};
  parts.drug_names = {"a", "b"};
  parts.rendered = {"a", "b"};
  parts.postings["x"] = {Posting{1, 1}, Posting{0, 1}};
  CHECK_THROWS_AS(Index(std::move(parts)), ParseError);
}
