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

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "herbprobe/dataset.hpp"
#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/runner.hpp"
#include "support.hpp"

using namespace herbprobe;
using herbprobe::testing::sample_corpus;
using herbprobe::testing::TempDir;

namespace {

const EvalDataset& sample_dataset() {
  static const EvalDataset ds = build_dataset(sample_corpus(), 42);
  return ds;
}

// Oracle answers after an id-dependent delay, so completion order scrambles.
class JitterOracle final : public Provider {
 public:
  ProviderResponse complete(const Question& q) const override {
    ++calls;
    std::this_thread::sleep_for(std::chrono::microseconds((q.item_id * 7919) % 3000));
    return oracle_.complete(q);
  }
  mutable std::atomic<int> calls{0};

 private:
  OracleProvider oracle_{sample_corpus()};
};

class FailsOn final : public Provider {
 public:
  FailsOn(std::uint64_t bad_id, bool throws) : bad_id_(bad_id), throws_(throws) {}
  ProviderResponse complete(const Question& q) const override {
    if (q.item_id == bad_id_) {
      if (throws_) throw std::runtime_error("provider exploded");
      return ProviderResponse::failure("transport", "simulated outage");
    }
    return oracle_.complete(q);
  }

 private:
  std::uint64_t bad_id_;
  bool throws_;
  OracleProvider oracle_{sample_corpus()};
};

// Record JSON without the timing field.
std::vector<std::string> stable_records(const RunLog& log) {
  std::vector<std::string> out;
  for (const auto& r : log.records) {
    auto j = record_to_json(r);
    j.erase("latency_ms");
    out.push_back(j.dump());
  }
  return out;
}

}  // namespace

TEST_CASE("oracle verify run: complete, ordered, no Invalid") {
  const OracleProvider oracle(sample_corpus());
  RunOptions options;
  options.protocol = Protocol::kVerify;
  const auto log = run_protocol(sample_dataset(), oracle, options);
  REQUIRE(log.records.size() == sample_dataset().items.size());
  CHECK(log.error_count() == 0);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& item = sample_dataset().items[i];
    CHECK(log.records[i].item_id == item.item_id);
    CHECK(log.records[i].verdict == (item.expected == Answer::kYes ? Verdict::kYes : Verdict::kNo));
  }
  CHECK(log.meta.dataset_fingerprint == sample_dataset().fingerprint());
  CHECK_FALSE(log.meta.finished.empty());
}

TEST_CASE("concurrency 1 and 8 give identical records") {
  for (auto protocol : {Protocol::kVerify, Protocol::kInquiry}) {
    JitterOracle provider;
    RunOptions one;
    one.protocol = protocol;
    one.concurrency = 1;
    RunOptions eight = one;
    eight.concurrency = 8;
    const auto a = run_protocol(sample_dataset(), provider, one);
    const auto b = run_protocol(sample_dataset(), provider, eight);
    CHECK(stable_records(a) == stable_records(b));
    CHECK(provider.calls == static_cast<int>(2 * sample_dataset().items.size()));
  }
}

TEST_CASE("a failing item is isolated") {
  const auto bad = sample_dataset().items.at(5).item_id;
  for (bool throws : {false, true}) {
    const FailsOn provider(bad, throws);
    RunOptions options;
    options.protocol = Protocol::kVerify;
    options.concurrency = 4;
    const auto log = run_protocol(sample_dataset(), provider, options);
    REQUIRE(log.records.size() == sample_dataset().items.size());
    CHECK(log.error_count() == 1);
    const auto* r = log.find(bad);
    REQUIRE(r);
    CHECK(r->error.has_value());
    CHECK(r->verdict == Verdict::kInvalid);
    for (const auto& other : log.records) {
      if (other.item_id != bad) CHECK_FALSE(other.error.has_value());
    }
  }
}

TEST_CASE("inquiry records carry parsed ingredient lists") {
  const OracleProvider oracle(sample_corpus());
  RunOptions options;
  options.protocol = Protocol::kInquiry;
  const auto log = run_protocol(sample_dataset(), oracle, options);
  for (const auto& r : log.records) {
    CHECK(r.parsed_ingredients == sample_corpus().find(r.drug_name)->display_ingredients());
  }
}

TEST_CASE("log is persisted and round-trips") {
  TempDir dir;
  const OracleProvider oracle(sample_corpus());
  RunOptions options;
  options.protocol = Protocol::kVerify;
  options.log_path = dir / "run.jsonl";
  options.provider_snapshot = {{"kind", "oracle"}};
  const auto log = run_protocol(sample_dataset(), oracle, options);
  const auto text = read_file(*options.log_path);
  CHECK(text == serialize_run_log(log));
  const auto back = load_run_log(*options.log_path);
  CHECK(serialize_run_log(back) == text);
  CHECK(back.meta.provider == options.provider_snapshot);
  CHECK(text.rfind("{\"meta\":", 0) == 0);
}

TEST_CASE("resume executes only the missing items") {
  TempDir dir;
  const auto path = dir / "run.jsonl";
  RunOptions options;
  options.protocol = Protocol::kVerify;
  options.log_path = path;
  options.concurrency = 3;
  {
    JitterOracle first;
    run_protocol(sample_dataset(), first, options);
  }
  // Keep the header and ten records, then a torn line from an interrupted write.
  std::string kept;
  {
    std::ifstream in(path);
    std::string line;
    for (int i = 0; i < 11 && std::getline(in, line); ++i) kept += line + "\n";
  }
  kept += "{\"item_id\": 3, \"drug_na";
  write_file_atomic(path, kept);

  JitterOracle second;
  options.resume = true;
  const auto log = run_protocol(sample_dataset(), second, options);
  CHECK(second.calls == static_cast<int>(sample_dataset().items.size() - 10));
  REQUIRE(log.records.size() == sample_dataset().items.size());
  CHECK(log.error_count() == 0);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    CHECK(log.records[i].item_id == sample_dataset().items[i].item_id);
  }
  CHECK(load_run_log(path).records.size() == sample_dataset().items.size());

  SUBCASE("errored records are retried") {
    const auto bad = sample_dataset().items.at(2).item_id;
    const FailsOn failing(bad, false);
    options.resume = false;
    run_protocol(sample_dataset(), failing, options);
    JitterOracle third;
    options.resume = true;
    const auto fixed = run_protocol(sample_dataset(), third, options);
    CHECK(third.calls == 1);
    CHECK(fixed.error_count() == 0);
  }
  SUBCASE("a log for another dataset is refused") {
    const auto other = build_dataset(sample_corpus(), 43);
    JitterOracle third;
    CHECK_THROWS_AS(run_protocol(other, third, options), ConfigError);
  }
}

TEST_CASE("parse_run_log rejects a torn line unless tolerated") {
  const OracleProvider oracle(sample_corpus());
  RunOptions options;
  const auto text = serialize_run_log(run_protocol(sample_dataset(), oracle, options)) + "{\"item_id\":";
  CHECK_THROWS_AS(parse_run_log(text), ParseError);
  CHECK(parse_run_log(text, true).records.size() == sample_dataset().items.size());
}
