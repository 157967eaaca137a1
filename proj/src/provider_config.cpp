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

#include "herbprobe/provider_config.hpp"

#include <charconv>
#include <set>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"

namespace herbprobe {

namespace {

using nlohmann::json;

constexpr std::pair<ProviderKind, std::string_view> kKindNames[] = {
    {ProviderKind::kRemote, "remote"},
    {ProviderKind::kRag, "rag"},
    {ProviderKind::kOracle, "oracle"},
    {ProviderKind::kGrounded, "grounded"},
    {ProviderKind::kLiteral, "literal"},
    {ProviderKind::kCommonHerb, "common_herb"},
    {ProviderKind::kBiased, "biased"},
    {ProviderKind::kFixedConfusion, "fixed_confusion"},
};

std::string_view to_string(BiasMode mode) {
  switch (mode) {
    case BiasMode::kAlwaysYes: return "always_yes";
    case BiasMode::kAlwaysNo: return "always_no";
    case BiasMode::kBernoulli: break;
  }
  return "bernoulli";
}

BiasMode parse_bias_mode(std::string_view text) {
  if (text == "always_yes") return BiasMode::kAlwaysYes;
  if (text == "always_no") return BiasMode::kAlwaysNo;
  if (text == "bernoulli") return BiasMode::kBernoulli;
  throw ConfigError("unknown bias mode \"" + std::string(text) + "\"");
}

template <class T>
T get_number(const json& j, std::string_view key) {
  if (!j.is_number()) throw ConfigError("\"" + std::string(key) + "\" must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (j.is_number_float() || (j.is_number_integer() && j.get<std::int64_t>() < 0)) {
      throw ConfigError("\"" + std::string(key) + "\" must be a non-negative integer");
    }
  }
  return j.get<T>();
}

std::string get_string(const json& j, std::string_view key) {
  if (!j.is_string()) throw ConfigError("\"" + std::string(key) + "\" must be a string");
  return j.get<std::string>();
}

// --- TOML subset -----------------------------------------------------------

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote != 0) {
      if (c == '\\' && quote == '"') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

json parse_toml_value(std::string_view v, std::size_t line_no) {
  const auto fail = [&](const std::string& what) -> json {
    throw ConfigError("provider config line " + std::to_string(line_no) + ": " + what);
  };
  if (v.empty()) return fail("missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') return fail("unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      char c = v[i];
      if (c == '\\') {
        if (i + 2 >= v.size()) return fail("dangling escape");
        const char e = v[++i];
        c = e == 'n' ? '\n' : e == 't' ? '\t' : e == 'r' ? '\r' : e;
        if (e != 'n' && e != 't' && e != 'r' && e != '"' && e != '\\') {
          return fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    return out;
  }
  if (v.front() == '\'') {
    if (v.size() < 2 || v.back() != '\'') return fail("unterminated string");
    return std::string(v.substr(1, v.size() - 2));
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string digits;
  for (char c : v) {
    if (c != '_') digits.push_back(c);
  }
  const bool is_float = digits.find_first_of(".eE") != std::string::npos;
  if (!is_float) {
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return i;
  } else {
    try {
      std::size_t used = 0;
      const double d = std::stod(digits, &used);
      if (used == digits.size()) return d;
    } catch (const std::exception&) {
    }
  }
  return fail("unsupported value \"" + std::string(v) + "\"");
}

json parse_toml(std::string_view text) {
  json root = json::object();
  json* table = &root;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    const auto line = trim(strip_comment(text.substr(start, end - start)));
    ++line_no;
    start = end + 1;
    if (!line.empty()) {
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError("provider config line " + std::to_string(line_no) + ": bad table header");
        }
        table = &root;
        auto path = trim(line.substr(1, line.size() - 2));
        while (!path.empty()) {
          const auto dot = path.find('.');
          const auto part = std::string(trim(path.substr(0, dot)));
          if (part.empty()) {
            throw ConfigError("provider config line " + std::to_string(line_no) + ": empty table name");
          }
          auto& next = (*table)[part];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) {
            throw ConfigError("provider config line " + std::to_string(line_no) + ": " + part +
                              " is not a table");
          }
          table = &next;
          path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
        }
      } else {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
          throw ConfigError("provider config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        if (key.empty()) {
          throw ConfigError("provider config line " + std::to_string(line_no) + ": empty key");
        }
        (*table)[key] = parse_toml_value(trim(line.substr(eq + 1)), line_no);
      }
    }
    if (nl == std::string_view::npos) break;
  }
  return root;
}

}  // namespace

std::string_view to_string(ProviderKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ProviderKind parse_provider_kind(std::string_view text) {
  for (const auto& [k, name] : kKindNames) {
    if (name == text) return k;
  }
  throw ConfigError("unknown provider kind \"" + std::string(text) + "\"");
}

void ProviderConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (concurrency_limit == 0) throw ConfigError("concurrency_limit must be positive");
  switch (kind) {
    case ProviderKind::kRemote:
      if (!endpoint_url || endpoint_url->empty()) throw ConfigError("remote provider needs endpoint_url");
      if (!model_name || model_name->empty()) throw ConfigError("remote provider needs model_name");
      if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
      break;
    case ProviderKind::kRag:
      if (!inner) throw ConfigError("rag provider needs an inner provider");
      if (k == 0) throw ConfigError("rag k must be at least 1");
      inner->validate();
      break;
    case ProviderKind::kCommonHerb:
      if (m == 0) throw ConfigError("common_herb m must be at least 1");
      break;
    case ProviderKind::kBiased:
      if (bias_mode == BiasMode::kBernoulli && !(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("bernoulli p must lie in [0, 1]");
      }
      break;
    case ProviderKind::kFixedConfusion:
      if (cm.total() == 0) throw ConfigError("fixed_confusion needs a non-empty confusion matrix");
      break;
    case ProviderKind::kOracle:
    case ProviderKind::kGrounded:
    case ProviderKind::kLiteral:
      break;
  }
}

ProviderConfig provider_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("provider config must be an object");
  static const std::set<std::string> kKnown = {
      "kind", "endpoint_url", "model_name", "temperature", "api_key_env", "concurrency_limit",
      "timeout_s", "timeout_ms", "retries", "backoff_ms", "inner", "k", "m", "mode", "p", "seed",
      "cm", "tp", "fp", "fn", "tn", "match_markers", "name"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.contains(key)) throw ConfigError("unknown provider config key \"" + key + "\"");
  }
  if (!j.contains("kind")) throw ConfigError("provider config needs \"kind\"");
  ProviderConfig c;
  c.kind = parse_provider_kind(get_string(j.at("kind"), "kind"));
  if (j.contains("name")) c.name = get_string(j.at("name"), "name");
  if (j.contains("endpoint_url")) c.endpoint_url = get_string(j.at("endpoint_url"), "endpoint_url");
  if (j.contains("model_name")) c.model_name = get_string(j.at("model_name"), "model_name");
  if (j.contains("temperature")) c.temperature = get_number<double>(j.at("temperature"), "temperature");
  if (j.contains("api_key_env")) c.api_key_env = get_string(j.at("api_key_env"), "api_key_env");
  if (j.contains("concurrency_limit")) {
    c.concurrency_limit = get_number<std::size_t>(j.at("concurrency_limit"), "concurrency_limit");
  }
  if (j.contains("timeout_s")) {
    c.timeout = std::chrono::milliseconds(
        static_cast<std::int64_t>(get_number<double>(j.at("timeout_s"), "timeout_s") * 1000.0));
  }
  if (j.contains("timeout_ms")) {
    c.timeout = std::chrono::milliseconds(get_number<std::uint64_t>(j.at("timeout_ms"), "timeout_ms"));
  }
  if (j.contains("retries")) c.retries = get_number<std::size_t>(j.at("retries"), "retries");
  if (j.contains("backoff_ms")) {
    c.backoff = std::chrono::milliseconds(get_number<std::uint64_t>(j.at("backoff_ms"), "backoff_ms"));
  }
  if (j.contains("inner")) {
    c.inner = std::make_shared<const ProviderConfig>(provider_config_from_json(j.at("inner")));
  }
  if (j.contains("k")) c.k = get_number<std::size_t>(j.at("k"), "k");
  if (j.contains("m")) c.m = get_number<std::size_t>(j.at("m"), "m");
  if (j.contains("mode")) c.bias_mode = parse_bias_mode(get_string(j.at("mode"), "mode"));
  if (j.contains("p")) c.p = get_number<double>(j.at("p"), "p");
  if (j.contains("seed")) c.seed = get_number<std::uint64_t>(j.at("seed"), "seed");
  const json& cells = j.contains("cm") ? j.at("cm") : j;
  if (j.contains("cm") && !cells.is_object()) throw ConfigError("\"cm\" must be an object");
  if (cells.contains("tp")) c.cm.tp = get_number<std::uint64_t>(cells.at("tp"), "tp");
  if (cells.contains("fp")) c.cm.fp = get_number<std::uint64_t>(cells.at("fp"), "fp");
  if (cells.contains("fn")) c.cm.fn = get_number<std::uint64_t>(cells.at("fn"), "fn");
  if (cells.contains("tn")) c.cm.tn = get_number<std::uint64_t>(cells.at("tn"), "tn");
  if (j.contains("match_markers")) {
    if (!j.at("match_markers").is_boolean()) throw ConfigError("\"match_markers\" must be a boolean");
    c.marker_mode = j.at("match_markers").get<bool>() ? MarkerMode::kMatch : MarkerMode::kIgnore;
  }
  c.validate();
  return c;
}

ProviderConfig parse_provider_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("provider config is not valid JSON: ") + e.what());
    }
    return provider_config_from_json(j);
  }
  return provider_config_from_json(parse_toml(text));
}

ProviderConfig load_provider_config(const std::filesystem::path& path) {
  try {
    return parse_provider_config(read_file(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const ProviderConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  if (c.name) j["name"] = *c.name;
  switch (c.kind) {
    case ProviderKind::kRemote:
      j["endpoint_url"] = c.endpoint_url.value_or("");
      j["model_name"] = c.model_name.value_or("");
      j["temperature"] = c.temperature;
      j["api_key_env"] = c.api_key_env;
      j["concurrency_limit"] = c.concurrency_limit;
      j["timeout_ms"] = c.timeout.count();
      j["retries"] = c.retries;
      j["backoff_ms"] = c.backoff.count();
      break;
    case ProviderKind::kRag:
      j["k"] = c.k;
      if (c.inner) j["inner"] = to_json(*c.inner);
      break;
    case ProviderKind::kCommonHerb:
      j["m"] = c.m;
      break;
    case ProviderKind::kBiased:
      j["mode"] = to_string(c.bias_mode);
      if (c.bias_mode == BiasMode::kBernoulli) {
        j["p"] = c.p;
        j["seed"] = c.seed;
      }
      break;
    case ProviderKind::kFixedConfusion:
      j["cm"] = {{"tp", c.cm.tp}, {"fp", c.cm.fp}, {"fn", c.cm.fn}, {"tn", c.cm.tn}};
      j["seed"] = c.seed;
      break;
    case ProviderKind::kOracle:
    case ProviderKind::kGrounded:
    case ProviderKind::kLiteral:
      break;
  }
  if (c.marker_mode == MarkerMode::kMatch) j["match_markers"] = true;
  return j;
}

}  // namespace herbprobe
