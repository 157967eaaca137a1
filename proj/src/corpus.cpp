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

#include "herbprobe/corpus.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "herbprobe/error.hpp"
#include "herbprobe/fingerprint.hpp"
#include "herbprobe/unicode.hpp"

namespace herbprobe {

namespace {

using nlohmann::json;

bool is_open_paren(char32_t cp) { return cp == U'(' || cp == U'（'; }
bool is_close_paren(char32_t cp) { return cp == U')' || cp == U'）'; }

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

std::string Ingredient::display() const {
  if (!processing_marker) return canonical;
  return canonical + "（" + *processing_marker + "）";
}

std::string ingredient_key(const Ingredient& ingredient, MarkerMode mode) {
  return mode == MarkerMode::kMatch ? ingredient.display() : ingredient.canonical;
}

std::string ingredient_key(std::string_view display, MarkerMode mode) {
  return ingredient_key(parse_ingredient(display), mode);
}

std::vector<std::string> DrugRecord::display_ingredients() const {
  std::vector<std::string> out;
  out.reserve(ingredients.size());
  for (const auto& i : ingredients) out.push_back(i.display());
  return out;
}

std::vector<std::string> DrugRecord::canonical_ingredients() const {
  std::vector<std::string> out;
  out.reserve(ingredients.size());
  for (const auto& i : ingredients) out.push_back(i.canonical);
  return out;
}

std::string normalize_name(std::string_view raw) {
  const auto composed = unicode::decode(unicode::nfc(raw));
  std::string out;
  out.reserve(raw.size());
  for (char32_t cp : composed) {
    cp = unicode::fold_fullwidth(cp);
    if (unicode::is_space(cp)) continue;
    unicode::append(out, cp);
  }
  if (out.empty()) throw ParseError("unusable name: \"" + std::string(raw) + "\"");
  return out;
}

Ingredient parse_ingredient(std::string_view raw) {
  Ingredient result;
  result.raw = std::string(raw);
  std::u32string name = unicode::decode(normalize_name(raw));
  // Peel trailing groups; more than one is rare (e.g. X(制)(炒)) and is
  // kept as a single marker so that parsing the canonical is a no-op.
  std::vector<std::u32string> markers;
  while (!name.empty() && is_close_paren(name.back())) {
    const auto open = name.find_last_of(U"(（");
    if (open == std::u32string::npos) break;
    auto inner = name.substr(open + 1, name.size() - open - 2);
    if (inner.find_first_of(U"()（）") != std::u32string::npos) break;
    name.resize(open);
    if (!inner.empty()) markers.insert(markers.begin(), std::move(inner));
  }
  if (name.empty()) throw ParseError("ingredient has no name: \"" + std::string(raw) + "\"");
  result.canonical = unicode::encode(name);
  if (!markers.empty()) {
    std::u32string joined;
    for (std::size_t i = 0; i < markers.size(); ++i) {
      if (i > 0) joined += U'/';
      joined += markers[i];
    }
    result.processing_marker = unicode::encode(joined);
  }
  return result;
}

DrugRecord make_record(std::string_view name, const std::vector<std::string>& ingredients,
                       std::optional<std::string> source_text) {
  DrugRecord record;
  record.name = normalize_name(name);
  if (ingredients.empty()) {
    throw ParseError("drug " + record.name + " has an empty ingredient list");
  }
  std::set<std::string> seen;
  for (const auto& raw : ingredients) {
    auto ingredient = parse_ingredient(raw);
    if (!seen.insert(ingredient.canonical).second) {
      throw ParseError("drug " + record.name + " lists " + ingredient.canonical + " twice");
    }
    record.ingredients.push_back(std::move(ingredient));
  }
  record.source_text = std::move(source_text);
  return record;
}

Corpus::Corpus(std::vector<DrugRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.name.empty()) throw ParseError("record " + std::to_string(i) + " has no name");
    if (r.ingredients.empty()) {
      throw ParseError("drug " + r.name + " has an empty ingredient list");
    }
    if (!by_name_.emplace(r.name, i).second) throw ParseError("duplicate drug name: " + r.name);
    std::set<std::string_view> seen;
    for (const auto& ing : r.ingredients) {
      if (!seen.insert(ing.canonical).second) {
        throw ParseError("drug " + r.name + " lists " + ing.canonical + " twice");
      }
      ++frequency_[ing.canonical];
    }
  }
  pool_ = compute_pool(records_);
  ranked_herbs_.assign(frequency_.begin(), frequency_.end());
  std::stable_sort(ranked_herbs_.begin(), ranked_herbs_.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  fingerprint_ = sha256_hex(serialize_corpus(records_));
}

const DrugRecord* Corpus::find(std::string_view name) const {
  const auto idx = index_of(name);
  return idx ? &records_[*idx] : nullptr;
}

std::optional<std::size_t> Corpus::index_of(std::string_view name) const {
  if (const auto it = by_name_.find(name); it != by_name_.end()) return it->second;
  return std::nullopt;
}

std::size_t Corpus::oracle_frequency(std::string_view canonical) const {
  const auto it = frequency_.find(canonical);
  return it == frequency_.end() ? 0 : it->second;
}

std::set<std::string> Corpus::compute_pool(const std::vector<DrugRecord>& records) {
  std::set<std::string> pool;
  for (const auto& r : records) {
    for (const auto& i : r.ingredients) pool.insert(i.canonical);
  }
  return pool;
}

std::string serialize_corpus(const std::vector<DrugRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json line;
    line["name"] = r.name;
    line["ingredients"] = r.display_ingredients();
    if (r.source_text) line["text"] = *r.source_text;
    out += line.dump();
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(std::string_view jsonl) {
  std::vector<DrugRecord> records;
  std::map<std::string, std::size_t, std::less<>> first_line;
  const auto lines = split_lines(jsonl);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line_no = n + 1;
    if (is_blank(lines[n])) continue;
    json obj;
    try {
      obj = json::parse(lines[n]);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    const auto name = obj.find("name");
    if (name == obj.end() || !name->is_string()) {
      throw ParseError("missing string field \"name\"", line_no);
    }
    const auto ingredients = obj.find("ingredients");
    if (ingredients == obj.end() || !ingredients->is_array()) {
      throw ParseError("missing array field \"ingredients\"", line_no);
    }
    std::vector<std::string> raw_ingredients;
    for (const auto& v : *ingredients) {
      if (!v.is_string()) throw ParseError("ingredient entries must be strings", line_no);
      raw_ingredients.push_back(v.get<std::string>());
    }
    std::optional<std::string> text;
    if (const auto t = obj.find("text"); t != obj.end() && !t->is_null()) {
      if (!t->is_string()) throw ParseError("field \"text\" must be a string", line_no);
      text = t->get<std::string>();
    }
    DrugRecord record;
    try {
      record = make_record(name->get<std::string>(), raw_ingredients, std::move(text));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (const auto [it, fresh] = first_line.emplace(record.name, line_no); !fresh) {
      throw ParseError("duplicate drug name " + record.name + " (first seen on line " +
                           std::to_string(it->second) + ")",
                       line_no);
    }
    records.push_back(std::move(record));
  }
  return Corpus(std::move(records));
}

Corpus load_corpus(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_corpus(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

// RFC 4180 fields: quoted fields may contain commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv_rows(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < csv.size() && csv[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> split_ingredient_cell(std::string_view cell) {
  std::vector<std::string> out;
  std::string current;
  for (char32_t cp : unicode::decode(cell)) {
    if (cp == U'、' || cp == U';' || cp == U'；' || cp == U'|') {
      if (!is_blank(current)) out.push_back(current);
      current.clear();
    } else {
      unicode::append(current, cp);
    }
  }
  if (!is_blank(current)) out.push_back(current);
  return out;
}

}  // namespace

Corpus parse_corpus_csv(std::string_view csv) {
  const auto rows = parse_csv_rows(csv);
  if (rows.empty()) throw ParseError("empty CSV");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto name_col = column("name");
  const auto ing_col = column("ingredients");
  const auto text_col = column("text");
  if (!name_col || !ing_col) throw ParseError("CSV header needs name and ingredients columns", 1);
  std::vector<DrugRecord> records;
  std::set<std::string> names;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto cell = [&](std::size_t c) { return c < row.size() ? row[c] : std::string(); };
    std::optional<std::string> text;
    if (text_col && !cell(*text_col).empty()) text = cell(*text_col);
    try {
      auto record = make_record(cell(*name_col), split_ingredient_cell(cell(*ing_col)), text);
      if (!names.insert(record.name).second) {
        throw ParseError("duplicate drug name " + record.name);
      }
      records.push_back(std::move(record));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), r + 1);
    }
  }
  return Corpus(std::move(records));
}

}  // namespace herbprobe
