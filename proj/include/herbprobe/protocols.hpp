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

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "herbprobe/corpus.hpp"

namespace herbprobe {

enum class Protocol { kInquiry, kVerify };
enum class Language { kZh, kEn };

std::string_view to_string(Protocol protocol);
Protocol parse_protocol(std::string_view text);  // "inquiry" | "verify"
std::string_view to_string(Language lang);
Language parse_language(std::string_view text);  // "zh" | "en"

// "['a', 'b', ...]"
std::string render_ingredient_list(std::span<const std::string> ingredients);

std::string build_inquiry_prompt(std::string_view drug_name, Language lang = Language::kZh);
// Throws Error on an empty ingredient list.
std::string build_verify_prompt(std::string_view drug_name, std::span<const std::string> ingredients,
                                Language lang = Language::kZh);

// Retrieved context followed by the fixed instruction block and the question.
std::string build_rag_prompt(std::string_view context, std::string_view question,
                             Language lang = Language::kZh);

enum class Verdict { kYes, kNo, kInvalid };
std::string_view to_string(Verdict verdict);
Verdict parse_verdict_name(std::string_view text);  // "Yes" | "No" | "Invalid"

// Drops <think>...</think> blocks. A closing tag with no opening tag drops
// everything before it (some reasoning models omit the opener).
std::string strip_think(std::string_view raw);

// Last decision token wins: 是 / 否 / yes / no (ASCII words, any case).
// 不是 counts as No and 是否 ("whether") is not a token.
Verdict parse_yes_no(std::string_view raw);

// Ingredient names out of a free-text answer, order and repeats preserved.
std::vector<Ingredient> parse_ingredient_list(std::string_view raw);

}  // namespace herbprobe
