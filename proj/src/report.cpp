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

#include "herbprobe/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/version.hpp"

namespace herbprobe {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += csv_field(f);
    first = false;
  }
  return out + "\n";
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ojson ordered(const nlohmann::json& j) { return ojson::parse(j.dump()); }

ojson fraction_json(const Fraction& f) {
  ojson j;
  j["num"] = f.num;
  j["den"] = f.den;
  j["defined"] = f.defined();
  j["percent"] = f.percent();
  j["rounded"] = f.percent_2dp();
  return j;
}

Fraction fraction_from(const nlohmann::json& j) {
  return Fraction{j.at("num").get<std::uint64_t>(), j.at("den").get<std::uint64_t>()};
}

// Rounded percentage, or "n/a" when the denominator is zero.
std::string shown(const Fraction& f) { return f.defined() ? f.percent_2dp() : "n/a"; }

ojson herb_json(const HerbStats& s) {
  ojson j;
  j["herb"] = s.herb;
  j["oracle_freq"] = s.oracle_freq;
  j["response_freq"] = s.response_freq;
  j["total_mentions"] = s.total_mentions;
  j["tp"] = s.tp;
  j["fp"] = s.fp;
  j["fn"] = s.fn;
  j["precision"] = fraction_json(s.precision);
  j["recall"] = fraction_json(s.recall);
  return j;
}

std::string herb_prf_csv(const std::string& meta, const std::vector<HerbStats>& stats) {
  std::string out = meta;
  out += csv_row({"rank", "herb", "oracle_freq", "response_freq", "precision", "recall",
                  "precision_undefined", "recall_undefined"});
  std::size_t rank = 1;
  for (const auto& s : stats) {
    out += csv_row({std::to_string(rank++), s.herb, std::to_string(s.oracle_freq),
                    std::to_string(s.response_freq), s.precision.percent_2dp(),
                    s.recall.percent_2dp(), s.precision.defined() ? "0" : "1",
                    s.recall.defined() ? "0" : "1"});
  }
  return out;
}

void emit(const fs::path& path, const std::string& bytes, std::vector<fs::path>& written) {
  write_file_atomic(path, bytes);
  written.push_back(path);
}

// Exact a/b > c/d for fractions; undefined sorts last.
bool fraction_greater(const Fraction& a, const Fraction& b) {
  if (a.defined() != b.defined()) return a.defined();
  if (!a.defined()) return false;
  return static_cast<unsigned __int128>(a.num) * b.den > static_cast<unsigned __int128>(b.num) * a.den;
}

}  // namespace

FileRef file_ref(const fs::path& path) {
  return FileRef{path.generic_string(), sha256_hex(read_file(path))};
}

ojson RunManifest::to_json() const {
  const auto ref = [](const FileRef& r) {
    ojson j;
    j["path"] = r.path;
    j["fingerprint"] = r.fingerprint;
    return j;
  };
  ojson j;
  j["meta"] = {{"tool", kToolName}, {"tool_version", tool_version}};
  j["corpus"] = ref(corpus);
  j["dataset"] = ref(dataset);
  j["runs"] = ojson::array();
  for (const auto& r : runs) j["runs"].push_back(ref(r));
  j["provider"] = ordered(provider);
  j["seeds"] = seeds;
  return j;
}

std::string provider_label(const nlohmann::json& provider) {
  for (const char* key : {"name", "model_name", "kind"}) {
    if (provider.contains(key) && provider.at(key).is_string() &&
        !provider.at(key).get<std::string>().empty()) {
      return provider.at(key).get<std::string>();
    }
  }
  return "unknown";
}

std::vector<fs::path> write_score_outputs(const fs::path& out_dir, const RunLog& run,
                                          const EvalDataset& dataset, const Corpus& corpus,
                                          const RunManifest& manifest, const ScoreOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const std::string run_fp = manifest.runs.empty() ? "" : manifest.runs.front().fingerprint;
  const std::string label = provider_label(run.meta.provider);
  const std::string csv_meta = "# " + std::string(kToolName) + " " + std::string(kToolVersion) +
                               " run=" + run_fp + " dataset=" + dataset.fingerprint() +
                               " corpus=" + corpus.fingerprint() + "\n";

  ojson doc;
  doc["meta"] = {
      {"tool", kToolName},
      {"tool_version", kToolVersion},
      {"protocol", to_string(run.meta.protocol)},
      {"lang", to_string(run.meta.lang)},
      {"provider", ordered(run.meta.provider)},
      {"provider_label", label},
      {"run_fingerprint", run_fp},
      {"dataset_fingerprint", dataset.fingerprint()},
      {"corpus_fingerprint", corpus.fingerprint()},
      {"invalid_policy", options.policy == InvalidPolicy::kExclude ? "exclude" : "count_as_incorrect"},
      {"match_markers", options.mode == MarkerMode::kMatch},
  };

  std::vector<fs::path> written;
  if (run.meta.protocol == Protocol::kVerify) {
    const auto result = confusion(run, dataset, options.policy);
    const auto row = prf1(result.cm, result.invalid_count);
    const auto bias = bias_accuracy(run, dataset, options.policy);
    doc["confusion"] = {{"tp", result.cm.tp}, {"fp", result.cm.fp}, {"fn", result.cm.fn}, {"tn", result.cm.tn}};
    doc["invalid_count"] = result.invalid_count;
    doc["metrics"] = {{"accuracy", fraction_json(row.accuracy)},
                      {"precision", fraction_json(row.precision)},
                      {"recall", fraction_json(row.recall)},
                      {"f1", fraction_json(row.f1)},
                      {"precision_undefined", row.precision_undefined()},
                      {"recall_undefined", row.recall_undefined()}};
    doc["bias"] = {{"on_expected_no", fraction_json(bias.on_expected_no)},
                   {"on_expected_yes", fraction_json(bias.on_expected_yes)},
                   {"bias_points", bias.bias_points()}};

    emit(out_dir / "metrics_table.csv",
         csv_meta +
             csv_row({"provider", "accuracy", "precision", "recall", "f1", "invalid_count",
                      "precision_undefined", "recall_undefined"}) +
             csv_row({label, row.accuracy.percent_2dp(), row.precision.percent_2dp(),
                      row.recall.percent_2dp(), row.f1.percent_2dp(),
                      std::to_string(row.invalid_count), row.precision_undefined() ? "1" : "0",
                      row.recall_undefined() ? "1" : "0"}),
         written);
    emit(out_dir / "bias.csv",
         csv_meta + csv_row({"provider", "acc_expected_no", "acc_expected_yes", "bias_points"}) +
             csv_row({label, bias.on_expected_no.percent_2dp(), bias.on_expected_yes.percent_2dp(),
                      fixed(bias.bias_points(), 2)}),
         written);
  } else {
    const auto scores = inquiry_scores(run, corpus, options.mode, options.repetition_threshold);
    const auto stats = herb_frequency(run, corpus, dataset, options.mode);
    const auto herbs = top_bottom_herb_report(stats, options.top_n);
    doc["inquiry"] = {{"items", scores.items.size()},
                      {"micro_precision", fraction_json(scores.micro_precision)},
                      {"micro_recall", fraction_json(scores.micro_recall)},
                      {"micro_f1", scores.micro_f1},
                      {"macro_precision", scores.macro_precision},
                      {"macro_recall", scores.macro_recall},
                      {"macro_f1", scores.macro_f1},
                      {"empty_answers", scores.empty_answers},
                      {"repetition_flagged", scores.repetition_flagged},
                      {"literal_flagged", scores.literal_flagged}};
    doc["herbs_top"] = ojson::array();
    for (const auto& s : herbs.top) doc["herbs_top"].push_back(herb_json(s));
    doc["herbs_bottom"] = ojson::array();
    for (const auto& s : herbs.bottom) doc["herbs_bottom"].push_back(herb_json(s));

    std::string items = csv_meta;
    items += csv_row({"item_id", "drug_name", "predicted", "oracle", "hits", "precision", "recall",
                      "f1", "max_run_length", "repetition_flagged", "literal_hits", "errored"});
    for (const auto& s : scores.items) {
      std::string hits;
      for (const auto& h : s.literal.literal_hits) hits += (hits.empty() ? "" : "|") + h;
      items += csv_row({std::to_string(s.item_id), s.drug_name, std::to_string(s.predicted),
                        std::to_string(s.oracle), std::to_string(s.hits), shown(s.precision),
                        shown(s.recall), fixed(100.0 * s.f1, 2),
                        std::to_string(s.repetition.max_run_length),
                        s.repetition.flagged ? "1" : "0", hits, s.errored ? "1" : "0"});
    }
    emit(out_dir / "inquiry_scores.csv", items, written);

    std::string freq = csv_meta;
    freq += csv_row({"herb", "oracle_freq", "response_freq", "total_mentions", "tp", "fp", "fn"});
    for (const auto& s : stats) {
      freq += csv_row({s.herb, std::to_string(s.oracle_freq), std::to_string(s.response_freq),
                       std::to_string(s.total_mentions), std::to_string(s.tp), std::to_string(s.fp),
                       std::to_string(s.fn)});
    }
    emit(out_dir / "herb_frequency.csv", freq, written);
    emit(out_dir / "herb_prf_top.csv", herb_prf_csv(csv_meta, herbs.top), written);
    emit(out_dir / "herb_prf_bottom.csv", herb_prf_csv(csv_meta, herbs.bottom), written);
  }
  emit(out_dir / "metrics.json", doc.dump(2) + "\n", written);
  emit(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n", written);
  return written;
}

namespace {

struct VerifyEntry {
  std::string label;
  std::string source;
  Fraction accuracy, precision, recall, f1, on_no, on_yes;
  std::size_t invalid = 0;
};

struct InquiryEntry {
  std::string label;
  std::string source;
  Fraction micro_p, micro_r;
  double micro_f1 = 0, macro_f1 = 0;
  std::size_t items = 0, empty = 0, repetition = 0, literal = 0;
};

}  // namespace

std::string render_report(const fs::path& metrics_dir) {
  std::error_code ec;
  if (!fs::is_directory(metrics_dir, ec)) {
    throw ConfigError("metrics dir not found: " + metrics_dir.string());
  }
  std::vector<fs::path> files;
  for (auto it = fs::recursive_directory_iterator(metrics_dir, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file() && it->path().filename() == "metrics.json") files.push_back(it->path());
  }
  if (files.empty()) throw ConfigError("no metrics.json under " + metrics_dir.string());
  std::sort(files.begin(), files.end(), [&](const fs::path& a, const fs::path& b) {
    return a.lexically_relative(metrics_dir).generic_string() <
           b.lexically_relative(metrics_dir).generic_string();
  });

  std::vector<VerifyEntry> verify;
  std::vector<InquiryEntry> inquiry;
  std::string inputs;
  for (const auto& path : files) {
    const auto bytes = read_file(path);
    const auto rel = path.lexically_relative(metrics_dir).generic_string();
    inputs += " " + rel + "=" + sha256_hex(bytes);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(bytes);
      const auto& meta = doc.at("meta");
      const auto label = meta.at("provider_label").get<std::string>();
      if (doc.contains("metrics")) {
        const auto& m = doc.at("metrics");
        const auto& b = doc.at("bias");
        verify.push_back({label, rel, fraction_from(m.at("accuracy")), fraction_from(m.at("precision")),
                          fraction_from(m.at("recall")), fraction_from(m.at("f1")),
                          fraction_from(b.at("on_expected_no")), fraction_from(b.at("on_expected_yes")),
                          doc.at("invalid_count").get<std::size_t>()});
      } else if (doc.contains("inquiry")) {
        const auto& q = doc.at("inquiry");
        InquiryEntry e;
        e.label = label;
        e.source = rel;
        e.micro_p = fraction_from(q.at("micro_precision"));
        e.micro_r = fraction_from(q.at("micro_recall"));
        e.micro_f1 = q.at("micro_f1").get<double>();
        e.macro_f1 = q.at("macro_f1").get<double>();
        e.items = q.at("items").get<std::size_t>();
        e.empty = q.at("empty_answers").get<std::size_t>();
        e.repetition = q.at("repetition_flagged").get<std::size_t>();
        e.literal = q.at("literal_flagged").get<std::size_t>();
        inquiry.push_back(std::move(e));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed metrics file " + rel + ": " + e.what());
    }
  }

  std::stable_sort(verify.begin(), verify.end(), [](const VerifyEntry& a, const VerifyEntry& b) {
    if (fraction_greater(a.accuracy, b.accuracy)) return true;
    if (fraction_greater(b.accuracy, a.accuracy)) return false;
    return a.label < b.label;
  });
  std::stable_sort(inquiry.begin(), inquiry.end(), [](const InquiryEntry& a, const InquiryEntry& b) {
    if (a.micro_f1 != b.micro_f1) return a.micro_f1 > b.micro_f1;
    return a.label < b.label;
  });

  std::ostringstream out;
  out << "<!-- " << kToolName << " " << kToolVersion << " inputs:" << inputs << " -->\n";
  out << "# herbprobe report\n";
  if (!verify.empty()) {
    out << "\n## Ingredient list verification\n\n";
    out << "| Provider | Accuracy (%) | Precision (%) | Recall (%) | F1 (%) | Acc. on No (%) | "
           "Acc. on Yes (%) | Invalid | Source |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|---:|---|\n";
    for (const auto& e : verify) {
      out << "| " << e.label << " | " << e.accuracy.percent_2dp() << " | "
          << e.precision.percent_2dp() << (e.precision.defined() ? "" : "*") << " | "
          << e.recall.percent_2dp() << (e.recall.defined() ? "" : "*") << " | "
          << e.f1.percent_2dp() << " | " << e.on_no.percent_2dp() << " | " << e.on_yes.percent_2dp()
          << " | " << e.invalid << " | " << e.source << " |\n";
    }
    const bool any_undefined = std::any_of(verify.begin(), verify.end(), [](const VerifyEntry& e) {
      return !e.precision.defined() || !e.recall.defined();
    });
    if (any_undefined) out << "\n`*` undefined: zero denominator, reported as 0.\n";
  }
  if (!inquiry.empty()) {
    out << "\n## Direct ingredient inquiry\n\n";
    out << "| Provider | Items | Micro P (%) | Micro R (%) | Micro F1 (%) | Macro F1 (%) | Empty | "
           "Repetition | Literal | Source |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---|\n";
    for (const auto& e : inquiry) {
      out << "| " << e.label << " | " << e.items << " | " << shown(e.micro_p) << " | "
          << shown(e.micro_r) << " | " << fixed(100.0 * e.micro_f1, 2) << " | "
          << fixed(100.0 * e.macro_f1, 2) << " | " << e.empty << " | " << e.repetition << " | "
          << e.literal << " | " << e.source << " |\n";
    }
  }
  return out.str();
}

}  // namespace herbprobe
