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

#include <fstream>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/report.hpp"
#include "herbprobe/version.hpp"
#include "support.hpp"

using namespace herbprobe;
using herbprobe::testing::sample_corpus;
using herbprobe::testing::TempDir;

namespace {

struct Scored {
  RunLog log;
  RunManifest manifest;
};

// Runs a provider, persists the log, and builds the manifest a CLI run would.
Scored scored_run(const TempDir& dir, const std::string& tag, const EvalDataset& ds, const Provider& provider,
                  Protocol protocol, nlohmann::json snapshot) {
  RunOptions options;
  options.protocol = protocol;
  options.log_path = dir / (tag + ".jsonl");
  options.provider_snapshot = std::move(snapshot);
  Scored s;
  s.log = run_protocol(ds, provider, options);
  s.manifest.runs.push_back(file_ref(*options.log_path));
  s.manifest.provider = s.log.meta.provider;
  s.manifest.seeds = {ds.seed};
  s.manifest.tool_version = std::string(kToolVersion);
  return s;
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("score outputs for verify and inquiry runs") {
  TempDir dir;
  const auto ds = build_dataset(sample_corpus(), 42);
  save_dataset(ds, dir / "ds.jsonl");

  const auto verify = scored_run(dir, "yes", ds, BiasedVerifier(BiasMode::kAlwaysYes), Protocol::kVerify,
                                 {{"kind", "biased"}, {"name", "always-yes"}});
  const auto written = write_score_outputs(dir / "m/yes", verify.log, ds, sample_corpus(), verify.manifest);
  CHECK(written.size() == 4);
  for (const char* f : {"metrics.json", "metrics_table.csv", "bias.csv", "manifest.json"}) {
    CHECK(std::filesystem::exists(dir / "m/yes" / f));
  }
  const auto csv_meta = first_line(dir / "m/yes/metrics_table.csv");
  CHECK(csv_meta.rfind("# herbprobe " + std::string(kToolVersion), 0) == 0);
  CHECK(csv_meta.find(ds.fingerprint()) != std::string::npos);
  CHECK(csv_meta.find(sample_corpus().fingerprint()) != std::string::npos);
  CHECK(csv_meta.find(verify.manifest.runs[0].fingerprint) != std::string::npos);
  CHECK(read_file(dir / "m/yes/metrics_table.csv").find("always-yes,50.00,50.00,100.00,66.67,0,0,0") !=
        std::string::npos);
  CHECK(read_file(dir / "m/yes/bias.csv").find("always-yes,0.00,100.00,100.00") != std::string::npos);
  const auto metrics_text = read_file(dir / "m/yes/metrics.json");
  CHECK(metrics_text.find("{\n  \"meta\"") == 0);
  const auto metrics = nlohmann::json::parse(metrics_text);
  CHECK(metrics["confusion"]["tp"] == ds.count(Subset::kTrue));
  CHECK(metrics["metrics"]["f1"]["rounded"] == "66.67");

  const auto inquiry = scored_run(dir, "inq", ds, OracleProvider(sample_corpus()), Protocol::kInquiry,
                                  {{"kind", "oracle"}});
  write_score_outputs(dir / "m/inq", inquiry.log, ds, sample_corpus(), inquiry.manifest);
  for (const char* f : {"metrics.json", "inquiry_scores.csv", "herb_frequency.csv", "herb_prf_top.csv",
                        "herb_prf_bottom.csv", "manifest.json"}) {
    CHECK(std::filesystem::exists(dir / "m/inq" / f));
  }
  CHECK(first_line(dir / "m/inq/herb_frequency.csv").rfind("# herbprobe", 0) == 0);
  const auto inq = nlohmann::json::parse(read_file(dir / "m/inq/metrics.json"));
  CHECK(inq["inquiry"]["micro_f1"] == 1.0);
  CHECK(inq["herbs_top"].size() == 10);

  const auto manifest = nlohmann::json::parse(read_file(dir / "m/inq/manifest.json"));
  CHECK(manifest["runs"][0]["fingerprint"] == sha256_hex(read_file(dir / "inq.jsonl")));
  CHECK(manifest["meta"]["tool_version"] == std::string(kToolVersion));

  SUBCASE("report compares providers, sorted by accuracy, deterministically") {
    const auto oracle = scored_run(dir, "oracle", ds, OracleProvider(sample_corpus()), Protocol::kVerify,
                                   {{"kind", "oracle"}});
    write_score_outputs(dir / "m/oracle", oracle.log, ds, sample_corpus(), oracle.manifest);
    const auto no = scored_run(dir, "no", ds, BiasedVerifier(BiasMode::kAlwaysNo), Protocol::kVerify,
                               {{"kind", "biased"}, {"name", "always-no"}});
    write_score_outputs(dir / "m/no", no.log, ds, sample_corpus(), no.manifest);

    const auto report = render_report(dir / "m");
    CHECK(report.rfind("<!-- herbprobe " + std::string(kToolVersion), 0) == 0);
    const auto p_oracle = report.find("| oracle | 100.00");
    const auto p_no = report.find("| always-no | 50.00");
    const auto p_yes = report.find("| always-yes | 50.00");
    REQUIRE(p_oracle != std::string::npos);
    REQUIRE(p_no != std::string::npos);
    REQUIRE(p_yes != std::string::npos);
    CHECK(p_oracle < p_no);
    CHECK(p_no < p_yes);
    CHECK(report.find("0.00*") != std::string::npos);
    CHECK(report.find("Direct ingredient inquiry") != std::string::npos);
    CHECK(render_report(dir / "m") == report);
  }
}

TEST_CASE("report needs at least one metrics file") {
  TempDir dir;
  CHECK_THROWS_AS(render_report(dir.path()), ConfigError);
  CHECK_THROWS_AS(render_report(dir / "missing"), ConfigError);
}

TEST_CASE("provider labels") {
  CHECK(provider_label({{"kind", "remote"}, {"model_name", "m"}}) == "m");
  CHECK(provider_label({{"kind", "remote"}, {"model_name", "m"}, {"name", "n"}}) == "n");
  CHECK(provider_label({{"kind", "oracle"}}) == "oracle");
}
