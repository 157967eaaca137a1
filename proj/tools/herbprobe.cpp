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

// herbprobe command-line entry point.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "herbprobe/corpus.hpp"
#include "herbprobe/dataset.hpp"
#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/log.hpp"
#include "herbprobe/provider_config.hpp"
#include "herbprobe/providers.hpp"
#include "herbprobe/report.hpp"
#include "herbprobe/retrieval.hpp"
#include "herbprobe/runner.hpp"
#include "herbprobe/version.hpp"

namespace fs = std::filesystem;
using namespace herbprobe;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

// Input problems are the caller's to fix.
struct UsageError : Error {
  using Error::Error;
};

void require_file(const fs::path& path, std::string_view what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError(std::string(what) + " not found: " + path.string());
  }
}

template <typename F>
auto load_input(const fs::path& path, std::string_view what, F&& loader) {
  require_file(path, what);
  try {
    return loader(path);
  } catch (const ParseError& e) {
    throw UsageError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw UsageError(e.what());
  }
}

fs::path sibling_view(const fs::path& mixed, std::string_view tag) {
  auto name = mixed.stem().string() + "." + std::string(tag) + mixed.extension().string();
  return mixed.parent_path() / name;
}

// ---- dataset build ----------------------------------------------------------

struct DatasetArgs {
  fs::path corpus;
  std::uint64_t seed = 0;
  fs::path out;
};

int cmd_dataset_build(const DatasetArgs& a) {
  const auto corpus = load_input(a.corpus, "corpus", [](const fs::path& p) { return load_corpus(p); });
  const auto dataset = build_dataset(corpus, a.seed);
  if (!a.out.parent_path().empty()) fs::create_directories(a.out.parent_path());
  save_dataset(dataset, a.out);
  save_dataset(dataset.only(Subset::kFalse), sibling_view(a.out, "F"));
  save_dataset(dataset.only(Subset::kTrue), sibling_view(a.out, "T"));
  std::cerr << "dataset: " << dataset.items.size() << " items (" << dataset.count(Subset::kTrue)
            << " T, " << dataset.count(Subset::kFalse) << " F) -> " << a.out.string() << "\n";
  return kOk;
}

// ---- corpus convert ---------------------------------------------------------

struct ConvertArgs {
  fs::path csv;
  fs::path out;
};

int cmd_corpus_convert(const ConvertArgs& a) {
  const auto corpus = load_input(a.csv, "CSV corpus",
                                 [](const fs::path& p) { return parse_corpus_csv(read_file(p)); });
  write_file_atomic(a.out, serialize_corpus(corpus.records()));
  std::cerr << "corpus: " << corpus.records().size() << " records -> " << a.out.string() << "\n";
  return kOk;
}

// ---- run --------------------------------------------------------------------

struct RunArgs {
  fs::path dataset;
  std::string protocol;
  fs::path provider_config;
  fs::path out;
  std::optional<std::size_t> concurrency;
  bool resume = false;
  std::string lang = "zh";
  bool match_markers = false;
  std::optional<fs::path> corpus;
  std::optional<fs::path> index_cache;
  std::optional<std::size_t> max_errors;
};

int cmd_run(const RunArgs& a) {
  const auto protocol = parse_protocol(a.protocol);
  const auto lang = parse_language(a.lang);
  const auto dataset = load_input(a.dataset, "dataset", [](const fs::path& p) { return load_dataset(p); });
  require_file(a.provider_config, "provider config");
  auto config = load_provider_config(a.provider_config);
  if (a.match_markers) config.marker_mode = MarkerMode::kMatch;

  std::optional<Corpus> corpus;
  std::optional<Index> index;
  if (a.corpus) {
    corpus = load_input(*a.corpus, "corpus", [](const fs::path& p) { return load_corpus(p); });
    if (corpus->fingerprint() != dataset.corpus_fingerprint) {
      throw UsageError("corpus fingerprint does not match the dataset's");
    }
    index = a.index_cache ? load_or_build_index(*corpus, *a.index_cache) : build_index(*corpus);
  }
  ProviderContext ctx{corpus ? &*corpus : nullptr, index ? &*index : nullptr, &dataset, lang};
  const auto provider = make_provider(config, ctx);

  RunOptions options;
  options.protocol = protocol;
  options.lang = lang;
  options.concurrency = a.concurrency.value_or(config.kind == ProviderKind::kRemote ? config.concurrency_limit : 1);
  if (options.concurrency == 0) throw UsageError("--concurrency must be at least 1");
  options.log_path = a.out;
  options.resume = a.resume;
  options.provider_snapshot = to_json(config);
  if (!a.out.parent_path().empty()) fs::create_directories(a.out.parent_path());

  const auto run = run_protocol(dataset, *provider, options);
  const auto errors = run.error_count();
  std::cerr << "run: " << run.records.size() << " records, " << errors << " errors -> "
            << a.out.string() << "\n";
  if (!run.records.empty() && errors == run.records.size()) {
    std::cerr << "error: every item failed\n";
    return kRuntime;
  }
  if (a.max_errors && errors > *a.max_errors) {
    std::cerr << "error: " << errors << " provider errors exceed --max-errors " << *a.max_errors << "\n";
    return kRuntime;
  }
  return kOk;
}

// ---- score ------------------------------------------------------------------

struct ScoreArgs {
  fs::path run;
  fs::path dataset;
  fs::path corpus;
  fs::path out_dir;
  bool exclude_invalid = false;
  bool match_markers = false;
  std::size_t top_n = 10;
};

int cmd_score(const ScoreArgs& a) {
  const auto run = load_input(a.run, "run log", [](const fs::path& p) { return load_run_log(p); });
  const auto dataset = load_input(a.dataset, "dataset", [](const fs::path& p) { return load_dataset(p); });
  const auto corpus = load_input(a.corpus, "corpus", [](const fs::path& p) { return load_corpus(p); });
  if (run.meta.dataset_fingerprint != dataset.fingerprint()) {
    throw UsageError("run log was produced from a different dataset (fingerprint mismatch)");
  }
  if (dataset.corpus_fingerprint != corpus.fingerprint()) {
    throw UsageError("dataset was built from a different corpus (fingerprint mismatch)");
  }
  if (run.meta.finished.empty() || run.records.size() != dataset.items.size()) {
    throw UsageError("run log is incomplete; finish it with --resume first");
  }

  RunManifest manifest;
  manifest.corpus = file_ref(a.corpus);
  manifest.dataset = file_ref(a.dataset);
  manifest.runs.push_back(file_ref(a.run));
  manifest.provider = run.meta.provider;
  manifest.seeds.push_back(dataset.seed);
  if (run.meta.provider.contains("seed")) manifest.seeds.push_back(run.meta.provider.at("seed").get<std::uint64_t>());
  manifest.tool_version = std::string(kToolVersion);

  ScoreOptions options;
  options.policy = a.exclude_invalid ? InvalidPolicy::kExclude : InvalidPolicy::kCountAsIncorrect;
  options.mode = a.match_markers ? MarkerMode::kMatch : MarkerMode::kIgnore;
  options.top_n = a.top_n;
  const auto written = write_score_outputs(a.out_dir, run, dataset, corpus, manifest, options);
  for (const auto& p : written) std::cerr << "wrote " << p.string() << "\n";
  return kOk;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  fs::path metrics_dir;
  std::optional<fs::path> out;
};

int cmd_report(const ReportArgs& a) {
  const auto markdown = render_report(a.metrics_dir);
  if (a.out) {
    write_file_atomic(*a.out, markdown);
  } else {
    std::cout << markdown;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probe language models on proprietary drug ingredient knowledge."};
  app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kToolVersion));
  app.require_subcommand(1);

  DatasetArgs dataset_args;
  auto* dataset_cmd = app.add_subcommand("dataset", "Evaluation dataset operations");
  dataset_cmd->require_subcommand(1);
  auto* build_cmd = dataset_cmd->add_subcommand("build", "Build the mixed, F-only and T-only datasets");
  build_cmd->add_option("--corpus", dataset_args.corpus, "Corpus JSONL")->required();
  build_cmd->add_option("--seed", dataset_args.seed, "Random seed")->required();
  build_cmd->add_option("--out", dataset_args.out, "Mixed dataset path; views go beside it")->required();

  ConvertArgs convert_args;
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus operations");
  corpus_cmd->require_subcommand(1);
  auto* convert_cmd = corpus_cmd->add_subcommand("convert", "Convert a CSV corpus to JSONL");
  convert_cmd->add_option("--csv", convert_args.csv, "CSV with name,ingredients[,text]")->required();
  convert_cmd->add_option("--out", convert_args.out, "Output JSONL")->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Query a provider for every dataset item");
  run_cmd->add_option("--dataset", run_args.dataset, "Dataset JSONL")->required();
  run_cmd->add_option("--protocol", run_args.protocol, "verify | inquiry")
      ->required()
      ->check(CLI::IsMember({"verify", "inquiry"}));
  run_cmd->add_option("--provider-config", run_args.provider_config, "Provider config (TOML or JSON)")
      ->required();
  run_cmd->add_option("--out", run_args.out, "Run log JSONL")->required();
  run_cmd->add_option("--concurrency", run_args.concurrency, "Requests in flight");
  run_cmd->add_flag("--resume", run_args.resume, "Keep finished records already in --out");
  run_cmd->add_option("--lang", run_args.lang, "Prompt language: zh | en")
      ->check(CLI::IsMember({"zh", "en"}));
  run_cmd->add_flag("--match-markers", run_args.match_markers, "Require processing markers to match");
  run_cmd->add_option("--corpus", run_args.corpus, "Corpus JSONL (local and RAG providers)");
  run_cmd->add_option("--index-cache", run_args.index_cache, "BM25 index cache file");
  run_cmd->add_option("--max-errors", run_args.max_errors, "Fail when more items error than this");

  ScoreArgs score_args;
  auto* score_cmd = app.add_subcommand("score", "Compute metrics and CSV tables for a run");
  score_cmd->add_option("--run", score_args.run, "Run log JSONL")->required();
  score_cmd->add_option("--dataset", score_args.dataset, "Dataset JSONL")->required();
  score_cmd->add_option("--corpus", score_args.corpus, "Corpus JSONL")->required();
  score_cmd->add_option("--out-dir", score_args.out_dir, "Output directory")->required();
  score_cmd->add_flag("--exclude-invalid", score_args.exclude_invalid,
                      "Leave Invalid answers out of the confusion matrix");
  score_cmd->add_flag("--match-markers", score_args.match_markers, "Require processing markers to match");
  score_cmd->add_option("--top-n", score_args.top_n, "Herbs in each top/bottom table");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Markdown comparison of scored runs");
  report_cmd->add_option("--metrics-dir", report_args.metrics_dir, "Directory searched for metrics.json")
      ->required();
  report_cmd->add_option("--out", report_args.out, "Markdown output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (build_cmd->parsed()) return cmd_dataset_build(dataset_args);
    if (convert_cmd->parsed()) return cmd_corpus_convert(convert_args);
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (score_cmd->parsed()) return cmd_score(score_args);
    if (report_cmd->parsed()) return cmd_report(report_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
