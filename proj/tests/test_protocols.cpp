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

#include <random>

#include "herbprobe/error.hpp"
#include "herbprobe/metrics.hpp"
#include "herbprobe/protocols.hpp"

using namespace herbprobe;

namespace {

std::vector<std::string> canonical(const std::vector<Ingredient>& list) {
  std::vector<std::string> out;
  for (const auto& i : list) out.push_back(i.canonical);
  return out;
}

const std::string kDeepSeekResponse =
    "<think>\n"
    "好的，现在我来仔细思考一下用户的问题。\n\n"
    "用户再次询问的是“护肝宁胶囊”的组成成分是否包含垂盆草、丹参、川贝母和麦冬。"
    "从之前的对话历史来看，我已经确认过护肝宁胶囊的成分，并给出了明确的答案。\n\n"
    "这次用户提供的成分列表与护肝宁胶囊的实际成分并不一致。根据我的知识库，"
    "护肝宁胶囊的主要成分包括丹参、当归、白芍等，而垂盆草、川贝母和麦冬并不是其组成成分。\n\n"
    "因此，正确的回答是“否”。同时，我需要建议用户如果需要了解药物的详细信息，"
    "请提供更准确的名称，并尽量给出全名。这样可以确保提供准确的信息。\n\n"
    "此外，考虑到用户可能对中药成分存在混淆或误解，我可以进一步解释每种药物的作用和用途，"
    "帮助他们更好地理解中药方剂的组成和使用方法。\n"
    "</think>\n"
    "否";

const std::string kHuatuoResponse =
    "不是的，心脑健片的成分包括黄芪、葛根、丹参、桂枝、三七、淫羊藿、川芎、何首乌、珍珠、冰片，"
    "并不包括茶叶。";

std::string gpt_repetition_response() {
  std::string s = "当归、川芎、川芎、红花、丹参、";
  for (int i = 0; i < 53; ++i) s += "川芎、";
  return s + "……";
}

}  // namespace

TEST_CASE("inquiry prompts") {
  CHECK(build_inquiry_prompt("痛经宝颗粒") ==
        "你是一名资深中医专家。请给出药物：痛经宝颗粒的组成成分。"
        "只回答各成分的名称即可，无需给出剂量或制备流程。");
  CHECK(build_inquiry_prompt("Tongjingbao Granules", Language::kEn) ==
        "What are the ingredients of the drug Tongjingbao Granules? Only give a list of the names "
        "of the ingredients please. No need to give dosages or the production workflow.");
}

TEST_CASE("verification prompts") {
  const std::vector<std::string> list{"垂盆草", "丹参", "川贝母", "麦冬"};
  CHECK(render_ingredient_list(list) == "['垂盆草', '丹参', '川贝母', '麦冬']");
  CHECK(build_verify_prompt("护肝宁胶囊", list) ==
        "作为一个资深中医药专家，请回答如下问题。请问，药物：护肝宁胶囊的组成成分是否为："
        "['垂盆草', '丹参', '川贝母', '麦冬']？只需回答“是”或“否”。");
  const auto en = build_verify_prompt("Huganning Capsules", list, Language::kEn);
  CHECK(en.find("Huganning Capsules") != std::string::npos);
  CHECK(en.find("['垂盆草', '丹参', '川贝母', '麦冬']") != std::string::npos);
  CHECK(en.find("\"Yes\" or \"No\"") != std::string::npos);
  CHECK_THROWS_AS(build_verify_prompt("x", std::vector<std::string>{}), Error);
}

TEST_CASE("RAG prompt wraps context, instructions and question") {
  const auto p = build_rag_prompt("【四物颗粒】\n【处方】当归、川芎、白芍、熟地黄", "问题？");
  CHECK(p.rfind("已知信息：【四物颗粒】", 0) == 0);
  CHECK(p.find("切记不要望文生义") != std::string::npos);
  CHECK(p.size() > std::string("\n\n请回答以下问题：问题？").size());
  CHECK(p.substr(p.size() - std::string("\n\n请回答以下问题：问题？").size()) == "\n\n请回答以下问题：问题？");
  const auto en = build_rag_prompt("ctx", "q?", Language::kEn);
  CHECK(en.rfind("Given the information: ctx", 0) == 0);
  CHECK(en.find("q?") != std::string::npos);
}

TEST_CASE("parse_yes_no: recorded model responses") {
  CHECK(parse_yes_no(kDeepSeekResponse) == Verdict::kNo);
  CHECK(parse_yes_no(kHuatuoResponse) == Verdict::kNo);
  CHECK(parse_yes_no("<think>…reasoning…</think>\n否") == Verdict::kNo);
  CHECK(parse_yes_no("No. The ingredients of Xinnaojian Tablets include 黄芪, 葛根, and 茶叶 (Tea leaves) "
                     "is not included.") == Verdict::kNo);
}

TEST_CASE("parse_yes_no: each token alone parses to its meaning") {
  CHECK(parse_yes_no("是") == Verdict::kYes);
  CHECK(parse_yes_no("否") == Verdict::kNo);
  CHECK(parse_yes_no("Yes") == Verdict::kYes);
  CHECK(parse_yes_no("No") == Verdict::kNo);
  CHECK(parse_yes_no("yes") == Verdict::kYes);
  CHECK(parse_yes_no("NO") == Verdict::kNo);
  CHECK(parse_yes_no("不是") == Verdict::kNo);
  CHECK(parse_yes_no("ＹＥＳ") == Verdict::kYes);
}

TEST_CASE("parse_yes_no: rules") {
  CHECK(parse_yes_no("是。") == Verdict::kYes);
  CHECK(parse_yes_no("“是”") == Verdict::kYes);
  CHECK(parse_yes_no("Yes, it is.") == Verdict::kYes);
  CHECK(parse_yes_no("是的，不过最终答案：否") == Verdict::kNo);
  CHECK(parse_yes_no("否。但经核对，是") == Verdict::kYes);
  CHECK(parse_yes_no("请问组成成分是否为这些？") == Verdict::kInvalid);
  CHECK(parse_yes_no("yesterday nothing notably") == Verdict::kInvalid);
  CHECK(parse_yes_no("") == Verdict::kInvalid);
  CHECK(parse_yes_no("无法判断") == Verdict::kInvalid);
  CHECK(parse_yes_no("<think>是</think>") == Verdict::kInvalid);
  CHECK(parse_yes_no("stray close</think>否") == Verdict::kNo);
}

TEST_CASE("strip_think") {
  CHECK(strip_think("<think>abc</think>\n否") == "\n否");
  CHECK(strip_think("a<think>x</think>b<think>y</think>c") == "abc");
  CHECK(strip_think("no tags") == "no tags");
  CHECK(strip_think("reasoning only</think>final") == "final");
}

TEST_CASE("parse_ingredient_list: bracketed list") {
  const auto three = parse_ingredient_list(
      "作为一名资深的中医药专家，我可以告诉您，根据健脑安神片的配方组成成分，是['鹿茸',    '羚羊角',    '黄芪’]。");
  CHECK(canonical(three) == std::vector<std::string>{"鹿茸", "羚羊角", "黄芪"});
  const auto four = parse_ingredient_list(
      "作为一名资深的中医药专家，根据您提供的信息，四物颗粒的组成成分为['丹参',       '赤芍',       '党参',       '柴胡']。");
  CHECK(canonical(four) == std::vector<std::string>{"丹参", "赤芍", "党参", "柴胡"});
  CHECK(canonical(parse_ingredient_list("['鹿茸', '羚羊角', '黄芪']")) ==
        std::vector<std::string>{"鹿茸", "羚羊角", "黄芪"});
}

TEST_CASE("parse_ingredient_list: prose answers") {
  const auto huatuo = parse_ingredient_list(
      "心脑健片的成分包括：黄芪、葛根、丹参、桂枝、三七、淫羊藿、川芎、何首乌、珍珠、冰片。");
  CHECK(canonical(huatuo) == std::vector<std::string>{"黄芪", "葛根", "丹参", "桂枝", "三七", "淫羊藿",
                                                      "川芎", "何首乌", "珍珠", "冰片"});
  const auto sanqi = parse_ingredient_list(
      "三七伤药胶囊的组成成分包括三七、制草乌、冰片、马钱子粉、南星、木香、乳香（制）、血竭、人工麝香、"
      "没药（制）、红花、赤芍、当归、川芎、地黄、泽兰、香附（制）。");
  REQUIRE(sanqi.size() == 17);
  CHECK(sanqi[0].canonical == "三七");
  CHECK(sanqi[6].canonical == "乳香");
  CHECK(sanqi[6].processing_marker.value_or("") == "制");
  const auto english = parse_ingredient_list(
      "The ingredients of Sanqi Shangyao Capsules include 三七, 制草乌, 冰片, 马钱子粉, 南星, 木香, 乳香 (制), "
      "血竭, 人工麝香, 没药 (制), 红花, 赤芍, 当归, 川芎, 地黄, 泽兰, 香附 (制).");
  CHECK(english.size() == 17);
  CHECK(canonical(parse_ingredient_list("当归\n川芎\n白芍\n熟地黄")) ==
        std::vector<std::string>{"当归", "川芎", "白芍", "熟地黄"});
  CHECK(canonical(parse_ingredient_list("1. 当归\n2. 川芎\n3. 白芍等")) ==
        std::vector<std::string>{"当归", "川芎", "白芍"});
  CHECK(parse_ingredient_list("").empty());
}

TEST_CASE("parse_ingredient_list: repetition fixture is flagged") {
  const auto list = parse_ingredient_list(gpt_repetition_response());
  REQUIRE(list.size() == 58);
  const auto names = canonical(list);
  CHECK(names[0] == "当归");
  CHECK(names[4] == "丹参");
  const auto rep = detect_repetition(names);
  CHECK(rep.flagged);
  CHECK(rep.max_run_length >= 52);
  CHECK(rep.max_run_length == 53);
}

TEST_CASE("parse_ingredient_list property: no separators or brackets survive") {
  const std::vector<std::string> herbs{"当归", "川芎", "白芍（炒）", "乳香(制)", "甘草", "Radix", "三七"};
  const std::vector<std::string> glue{"、", "，", ",", ";", "；", "\n", " ", "|", "'", "\"", "[", "]",
                                      "【", "】", "“", "”", "。", "：", "及", "和", "  - ", "1. "};
  const std::string forbidden[] = {"、", "，", ",", ";", "；", "\n", "|", "[", "]", "【", "】", "'", "\"",
                                   "“", "”"};
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string text;
    const auto parts = 1 + gen() % 12;
    for (std::size_t i = 0; i < parts; ++i) {
      text += glue[gen() % glue.size()];
      text += herbs[gen() % herbs.size()];
    }
    text += glue[gen() % glue.size()];
    for (const auto& ing : parse_ingredient_list(text)) {
      const auto shown = ing.display();
      CHECK_FALSE(shown.empty());
      for (const auto& f : forbidden) CHECK_MESSAGE(shown.find(f) == std::string::npos, text);
    }
  }
}

TEST_CASE("names round-trip through the parsers") {
  CHECK(parse_protocol("verify") == Protocol::kVerify);
  CHECK(parse_protocol("inquiry") == Protocol::kInquiry);
  CHECK(parse_language("en") == Language::kEn);
  CHECK_THROWS(parse_protocol("other"));
  for (auto v : {Verdict::kYes, Verdict::kNo, Verdict::kInvalid}) CHECK(parse_verdict_name(to_string(v)) == v);
}
