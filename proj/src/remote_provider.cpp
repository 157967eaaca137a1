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

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

#include "herbprobe/error.hpp"
#include "herbprobe/providers.hpp"

namespace herbprobe {

namespace {

constexpr std::string_view kDefaultPath = "/v1/chat/completions";

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

RemoteProvider::RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
  config_.validate();
  static const std::regex kUrl(R"(^(https?)://([^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  const std::string url = *config_.endpoint_url;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("endpoint_url must look like http(s)://host[:port]/path, got " + url);
  }
  base_ = m[1].str() + "://" + m[2].str();
  path_ = m[3].matched ? m[3].str() : std::string(kDefaultPath);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(config_.concurrency_limit));
}

RemoteProvider::~RemoteProvider() = default;

nlohmann::json RemoteProvider::request_body(std::string_view prompt) const {
  return {
      {"model", *config_.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", config_.temperature},
  };
}

ProviderResponse RemoteProvider::complete(const Question& question) const {
  SlotGuard slot(*in_flight_);
  const auto started = std::chrono::steady_clock::now();
  const auto body = request_body(question.prompt).dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  ProviderError last{"transport", "no attempt made", 0, 0};
  const auto attempts = static_cast<int>(config_.retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1LL << (attempt - 1)));
    httplib::Client client(base_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path_, headers, body, "application/json");
    last.attempts = attempt + 1;
    if (!res) {
      last.kind = "transport";
      last.http_status = 0;
      last.message = "request to " + base_ + path_ + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last.kind = "http_status";
      last.http_status = res->status;
      last.message = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      if (retryable_status(res->status)) continue;
      break;
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw std::runtime_error("content is not a string");
      auto response = ProviderResponse::text(content.get<std::string>());
      response.latency = std::chrono::steady_clock::now() - started;
      return response;
    } catch (const std::exception& e) {
      last.kind = "malformed_response";
      last.http_status = res->status;
      last.message = std::string("unexpected response body: ") + e.what();
      break;
    }
  }
  ProviderResponse response;
  response.error = last;
  response.latency = std::chrono::steady_clock::now() - started;
  return response;
}

}  // namespace herbprobe
