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

#include <algorithm>
#include <array>

#include "herbprobe/error.hpp"
#include "herbprobe/protocols.hpp"
#include "herbprobe/unicode.hpp"

namespace herbprobe {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

bool starts_with(std::u32string_view text, std::size_t pos, std::u32string_view prefix) {
  return text.substr(pos, prefix.size()) == prefix;
}

bool is_ascii_letter(char32_t cp) { return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'); }

bool is_list_separator(char32_t cp) {
  switch (cp) {
    case U'、': case U'，': case U',': case U';': case U'；': case U'\n': case U'\r':
    case U'\t': case U'|': case U'[': case U']': case U'【': case U'】': case U'\'':
    case U'"': case U'‘': case U'’': case U'“': case U'”': case U'「': case U'」':
    case U'《': case U'》': case U'{': case U'}':
      return true;
    default:
      return false;
  }
}

// Phrases after which an answer's list starts.
constexpr std::array<std::u32string_view, 10> kLeadIns = {
    U"组成成分为", U"组成成分是", U"成分为", U"成分是", U"组成为",
    U"包括",       U"include",   U"：",     U":",     U"如下"};

std::u32string_view list_segment(std::u32string_view text) {
  if (const auto open = text.find(U'['); open != std::u32string_view::npos) {
    auto inner = text.substr(open + 1);
    if (const auto close = inner.find(U']'); close != std::u32string_view::npos) {
      inner = inner.substr(0, close);
    }
    return inner;
  }
  std::size_t best = std::u32string_view::npos;
  std::size_t best_len = 0;
  for (const auto lead : kLeadIns) {
    const auto pos = text.find(lead);
    if (pos == std::u32string_view::npos) continue;
    if (pos < best || (pos == best && lead.size() > best_len)) {
      best = pos;
      best_len = lead.size();
    }
  }
  auto segment = best == std::u32string_view::npos ? text : text.substr(best + best_len);
  while (!segment.empty() && (segment.front() == U'：' || segment.front() == U':')) {
    segment.remove_prefix(1);
  }
  if (const auto stop = segment.find(U'。'); stop != std::u32string_view::npos && stop > 0) {
    segment = segment.substr(0, stop);
  }
  return segment;
}

bool is_trim_char(char32_t cp) { return unicode::is_space(cp) || cp == U'·'; }

std::u32string clean_token(std::u32string token) {
  auto trim = [](std::u32string& s) {
    while (!s.empty() && is_trim_char(s.front())) s.erase(s.begin());
    while (!s.empty() && is_trim_char(s.back())) s.pop_back();
  };
  trim(token);
  // Bullets: "1." "2)" "(3)" "4、" "- " "* " "• ".
  std::size_t i = 0;
  if (i < token.size() && (token[i] == U'(' || token[i] == U'（')) {
    std::size_t j = i + 1;
    while (j < token.size() && token[j] >= U'0' && token[j] <= U'9') ++j;
    if (j > i + 1 && j < token.size() && (token[j] == U')' || token[j] == U'）')) i = j + 1;
  } else {
    std::size_t j = i;
    while (j < token.size() && token[j] >= U'0' && token[j] <= U'9') ++j;
    if (j > i && j < token.size() &&
        (token[j] == U'.' || token[j] == U')' || token[j] == U'）' || token[j] == U'．')) {
      i = j + 1;
    }
  }
  if (i == 0 && !token.empty() &&
      (token[0] == U'-' || token[0] == U'*' || token[0] == U'•' || token[0] == U'·')) {
    i = 1;
  }
  token.erase(0, i);
  trim(token);
  static constexpr std::u32string_view kTrailing = U"。.!！?？：:…";
  while (!token.empty() && kTrailing.find(token.back()) != std::u32string_view::npos) {
    token.pop_back();
  }
  if (token.size() > 2 && token.back() == U'等') token.pop_back();
  for (const auto conj : {std::u32string_view(U"以及"), std::u32string_view(U"和"),
                          std::u32string_view(U"及"), std::u32string_view(U"and ")}) {
    if (token.size() > conj.size() + 1 && starts_with(token, 0, conj)) {
      token.erase(0, conj.size());
      break;
    }
  }
  trim(token);
  return token;
}

bool has_name_character(std::u32string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](char32_t cp) { return unicode::is_cjk(cp) || unicode::is_alnum(cp); });
}

bool all_digits(std::u32string_view token) {
  return std::all_of(token.begin(), token.end(),
                     [](char32_t cp) { return (cp >= U'0' && cp <= U'9') || unicode::is_space(cp); });
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kYes: return "Yes";
    case Verdict::kNo: return "No";
    case Verdict::kInvalid: break;
  }
  return "Invalid";
}

Verdict parse_verdict_name(std::string_view text) {
  if (text == "Yes") return Verdict::kYes;
  if (text == "No") return Verdict::kNo;
  if (text == "Invalid") return Verdict::kInvalid;
  throw ParseError("unknown verdict \"" + std::string(text) + "\"");
}

std::string strip_think(std::string_view raw) {
  std::string text(raw);
  for (;;) {
    const auto close = text.find(kThinkClose);
    if (close == std::string::npos) break;
    const auto open = text.rfind(kThinkOpen, close);
    const auto from = open == std::string::npos ? 0 : open;
    text.erase(from, close + kThinkClose.size() - from);
  }
  return text;
}

Verdict parse_yes_no(std::string_view raw) {
  const auto text = unicode::decode(strip_think(raw));
  const std::u32string_view view(text);
  Verdict last = Verdict::kInvalid;
  std::size_t i = 0;
  while (i < view.size()) {
    if (starts_with(view, i, U"不是")) {
      last = Verdict::kNo;
      i += 2;
    } else if (starts_with(view, i, U"是否")) {
      i += 2;
    } else if (view[i] == U'是') {
      last = Verdict::kYes;
      ++i;
    } else if (view[i] == U'否') {
      last = Verdict::kNo;
      ++i;
    } else if (is_ascii_letter(unicode::fold_fullwidth(view[i]))) {
      std::u32string word;
      while (i < view.size() && is_ascii_letter(unicode::fold_fullwidth(view[i]))) {
        word.push_back(unicode::to_lower_ascii(unicode::fold_fullwidth(view[i])));
        ++i;
      }
      if (word == U"yes") last = Verdict::kYes;
      if (word == U"no") last = Verdict::kNo;
    } else {
      ++i;
    }
  }
  return last;
}

std::vector<Ingredient> parse_ingredient_list(std::string_view raw) {
  const auto text = unicode::decode(strip_think(raw));
  const auto segment = list_segment(text);
  std::vector<Ingredient> out;
  std::u32string token;
  const auto emit = [&] {
    auto cleaned = clean_token(std::move(token));
    token.clear();
    if (cleaned.empty() || !has_name_character(cleaned) || all_digits(cleaned)) return;
    try {
      out.push_back(parse_ingredient(unicode::encode(cleaned)));
    } catch (const ParseError&) {
      // Marker-only fragments such as "(制)" carry no name.
    }
  };
  for (char32_t cp : segment) {
    if (is_list_separator(cp)) {
      emit();
    } else {
      token.push_back(cp);
    }
  }
  emit();
  return out;
}

}  // namespace herbprobe
