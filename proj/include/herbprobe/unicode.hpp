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

#include <string>
#include <string_view>

namespace herbprobe::unicode {

// Lenient UTF-8 decoding: invalid sequences become U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

bool is_space(char32_t cp);

// Han ideographs, kana and hangul syllables: the scripts written without
// word separators.
bool is_cjk(char32_t cp);

// Letters and digits outside the CJK ranges (ASCII and the Latin-1/Latin
// extended blocks are enough for herb and drug names).
bool is_alnum(char32_t cp);

// Maps U+FF01..U+FF5E to ASCII and U+3000 to U+0020. The full-width
// parentheses U+FF08/U+FF09 are left alone; they carry processing markers.
char32_t fold_fullwidth(char32_t cp);

char32_t to_lower_ascii(char32_t cp);

}  // namespace herbprobe::unicode
