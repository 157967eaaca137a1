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

#include "herbprobe/runner.hpp"

#include <atomic>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/version.hpp"

namespace herbprobe {

namespace {

using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json meta_to_json(const RunMeta& meta) {
  json j;
  j["tool"] = kToolName;
  j["tool_version"] = meta.tool_version;
  j["protocol"] = to_string(meta.protocol);
  j["lang"] = to_string(meta.lang);
  j["provider"] = meta.provider;
  j["dataset_fingerprint"] = meta.dataset_fingerprint;
  j["corpus_fingerprint"] = meta.corpus_fingerprint;
  j["started"] = meta.started;
  j["finished"] = meta.finished;
  return json{{"meta", j}};
}

RunMeta meta_from_json(const json& j) {
  const auto& m = j.at("meta");
  RunMeta meta;
  meta.protocol = parse_protocol(m.at("protocol").get<std::string>());
  meta.lang = parse_language(m.value("lang", std::string("zh")));
  meta.provider = m.value("provider", json::object());
  meta.dataset_fingerprint = m.at("dataset_fingerprint").get<std::string>();
  meta.corpus_fingerprint = m.value("corpus_fingerprint", std::string());
  meta.started = m.value("started", std::string());
  meta.finished = m.value("finished", std::string());
  meta.tool_version = m.value("tool_version", std::string());
  return meta;
}

}  // namespace

const RunRecord* RunLog::find(std::uint64_t item_id) const {
  for (const auto& r : records) {
    if (r.item_id == item_id) return &r;
  }
  return nullptr;
}

std::size_t RunLog::error_count() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.error.has_value() ? 1 : 0;
  return n;
}

RunRecord execute_item(const EvalItem& item, const Provider& provider, Protocol protocol,
                       Language lang) {
  RunRecord record;
  record.item_id = item.item_id;
  record.drug_name = item.drug_name;
  record.protocol = protocol;
  ProviderResponse response;
  try {
    const auto question = make_question(item, protocol, lang);
    record.prompt = question.prompt;
    response = provider.complete(question);
  } catch (const std::exception& e) {
    response = ProviderResponse::failure("exception", e.what());
  }
  record.latency_ms = response.latency.count();
  record.retrieval_context = std::move(response.retrieval_context);
  if (response.error) {
    record.error = std::move(response.error);
    return record;
  }
  record.raw_response = response.raw_text.value_or("");
  if (protocol == Protocol::kVerify) {
    record.verdict = parse_yes_no(record.raw_response);
  } else {
    for (const auto& ingredient : parse_ingredient_list(record.raw_response)) {
      record.parsed_ingredients.push_back(ingredient.display());
    }
  }
  return record;
}

json record_to_json(const RunRecord& r) {
  json j;
  j["item_id"] = r.item_id;
  j["drug_name"] = r.drug_name;
  j["protocol"] = to_string(r.protocol);
  j["prompt"] = r.prompt;
  j["raw_response"] = r.raw_response;
  if (r.protocol == Protocol::kVerify) {
    j["parsed"] = to_string(r.verdict);
  } else {
    j["parsed"] = r.parsed_ingredients;
  }
  j["latency_ms"] = r.latency_ms;
  if (r.retrieval_context) {
    json ctx = json::array();
    for (const auto& e : *r.retrieval_context) {
      ctx.push_back({{"doc_id", e.doc_id}, {"drug_name", e.drug_name}, {"score", e.score}});
    }
    j["retrieval_context"] = std::move(ctx);
  } else {
    j["retrieval_context"] = nullptr;
  }
  if (r.error) {
    j["error"] = {{"kind", r.error->kind},
                  {"message", r.error->message},
                  {"http_status", r.error->http_status},
                  {"attempts", r.error->attempts}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.item_id = j.at("item_id").get<std::uint64_t>();
  r.drug_name = j.at("drug_name").get<std::string>();
  r.protocol = parse_protocol(j.at("protocol").get<std::string>());
  r.prompt = j.at("prompt").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  const auto& parsed = j.at("parsed");
  if (r.protocol == Protocol::kVerify) {
    r.verdict = parse_verdict_name(parsed.get<std::string>());
  } else {
    r.parsed_ingredients = parsed.get<std::vector<std::string>>();
  }
  r.latency_ms = j.value("latency_ms", 0.0);
  if (const auto it = j.find("retrieval_context"); it != j.end() && it->is_array()) {
    std::vector<RetrievedEntry> ctx;
    for (const auto& e : *it) {
      ctx.push_back(RetrievedEntry{e.at("doc_id").get<std::size_t>(),
                                   e.at("drug_name").get<std::string>(), e.at("score").get<double>(),
                                   {}});
    }
    r.retrieval_context = std::move(ctx);
  }
  if (const auto it = j.find("error"); it != j.end() && it->is_object()) {
    r.error = ProviderError{it->at("kind").get<std::string>(), it->at("message").get<std::string>(),
                            it->value("http_status", 0), it->value("attempts", 0)};
  }
  return r;
}

std::string serialize_run_log(const RunLog& log) {
  std::string out = meta_to_json(log.meta).dump();
  out += '\n';
  for (const auto& r : log.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

RunLog parse_run_log(std::string_view jsonl, bool tolerate_truncated) {
  RunLog log;
  bool have_meta = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    const auto nl = jsonl.find('\n', start);
    const bool last_line = nl == std::string_view::npos;
    const auto end = last_line ? jsonl.size() : nl;
    const auto line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = json::parse(line);
      if (!have_meta) {
        log.meta = meta_from_json(j);
        have_meta = true;
      } else {
        log.records.push_back(record_from_json(j));
      }
    } catch (const std::exception& e) {
      // An interrupted write leaves a final line without its newline.
      if (tolerate_truncated && last_line && have_meta) break;
      throw ParseError(std::string("bad run log line: ") + e.what(), line_no);
    }
  }
  if (!have_meta) throw ParseError("run log has no meta line");
  return log;
}

RunLog load_run_log(const std::filesystem::path& path, bool tolerate_truncated) {
  try {
    return parse_run_log(read_file(path), tolerate_truncated);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

RunLog run_protocol(const EvalDataset& dataset, const Provider& provider, const RunOptions& options) {
  RunLog log;
  log.meta.protocol = options.protocol;
  log.meta.lang = options.lang;
  log.meta.provider = options.provider_snapshot;
  log.meta.dataset_fingerprint = dataset.fingerprint();
  log.meta.corpus_fingerprint = dataset.corpus_fingerprint;
  log.meta.tool_version = std::string(kToolVersion);
  log.meta.started = utc_now();

  std::map<std::uint64_t, RunRecord> done;
  if (options.resume && options.log_path && std::filesystem::exists(*options.log_path)) {
    auto previous = load_run_log(*options.log_path, true);
    if (previous.meta.dataset_fingerprint != log.meta.dataset_fingerprint ||
        previous.meta.protocol != options.protocol) {
      throw ConfigError("cannot resume " + options.log_path->string() +
                        ": it was written for another dataset or protocol");
    }
    log.meta.started = previous.meta.started;
    for (auto& r : previous.records) {
      if (!r.error && dataset.find(r.item_id) != nullptr) done[r.item_id] = std::move(r);
    }
  }

  std::ofstream out;
  const auto write_line = [&](const json& j) {
    if (!out.is_open()) return;
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + options.log_path->string());
  };
  if (options.log_path) {
    out.open(*options.log_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open run log " + options.log_path->string());
    write_line(meta_to_json(log.meta));
    for (const auto& item : dataset.items) {
      if (const auto it = done.find(item.item_id); it != done.end()) write_line(record_to_json(it->second));
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    if (!done.contains(dataset.items[i].item_id)) pending.push_back(i);
  }

  std::mutex mu;
  std::condition_variable ready;
  std::deque<RunRecord> finished;
  std::atomic<std::size_t> next{0};
  {
    const auto workers = std::max<std::size_t>(1, std::min(options.concurrency, pending.size()));
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers && !pending.empty(); ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const auto slot = next.fetch_add(1);
          if (slot >= pending.size()) return;
          auto record = execute_item(dataset.items[pending[slot]], provider, options.protocol,
                                     options.lang);
          {
            std::lock_guard lock(mu);
            finished.push_back(std::move(record));
          }
          ready.notify_one();
        }
      });
    }
    for (std::size_t received = 0; received < pending.size(); ++received) {
      RunRecord record;
      {
        std::unique_lock lock(mu);
        ready.wait(lock, [&] { return !finished.empty(); });
        record = std::move(finished.front());
        finished.pop_front();
      }
      write_line(record_to_json(record));
      const auto id = record.item_id;
      done[id] = std::move(record);
    }
  }

  for (const auto& item : dataset.items) log.records.push_back(std::move(done.at(item.item_id)));
  log.meta.finished = utc_now();
  if (options.log_path) {
    out.close();
    write_file_atomic(*options.log_path, serialize_run_log(log));
  }
  return log;
}

}  // namespace herbprobe
