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

#include "herbprobe/error.hpp"
#include "herbprobe/protocols.hpp"

namespace herbprobe {

namespace {

constexpr std::string_view kRagInstructionsZh =
    "“你是一个资深的中医与中医药学专家，你具备管理大量药物处方和药材识别的能力；"
    "请注意我向你提供了很多《中华人民共和国药典》PDF文件中的内容，"
    "但每个PDF文件中包括药方、制备方法、药材特性等内容，请仔细识别各个信息。\n\n"
    "现在需要你帮我分析每个中药或中成药的组成成分，"
    "只需要为我提供药典中此药品的各个组成成分药材名称即可，无需给出制备方法或用量等详细信息。"
    "然后帮我完成以下两个功能：\n\n"
    "1.当我给出一个中药名称和一组组成配方表时，给出其正确与否的答案。"
    "当基于我提供的药典信息，你认为问题中给出的配方不正确或者不匹配所提供药名时，"
    "只需回答“否”，反之，只需回答“是”即可。\n\n"
    "2.当我只给出一个中药名称时，请给出你认为此药物正确的配方表，"
    "只需要包含成分的药材名称即可，无需具体含量和制备过程。\n\n"
    "请务必注意：\n\n"
    "有些药物的名称中可能含有类似中医药材但实际上不是药材的名称，切记不要望文生义；\n\n"
    "有些药材经常用于制备药物，切记要根据所提供的内容谨慎地判断这些常见药材是否在当前给出的药物中也存在；\n\n"
    "请仔细识别药物成分，不要重复给出药材名称。”";

constexpr std::string_view kRagInstructionsEn =
    "\"You are a senior expert in traditional Chinese medicine and pharmacology, with the "
    "ability to manage a large number of drug prescriptions and identify medicinal materials. "
    "Please note that I have provided you with extensive content from PDF files of the "
    "Pharmacopoeia of the People's Republic of China, each containing information such as "
    "prescriptions, preparation methods, and characteristics of medicinal materials. Please "
    "carefully identify each piece of information.\n\n"
    "Now, I need you to help me analyze the composition of each traditional Chinese drug or "
    "Chinese proprietary medicine. Simply provide me with the names of the constituent medicinal "
    "materials listed in the Pharmacopoeia for each drug, without including details such as "
    "preparation methods or dosages. Then, assist me in completing the following two tasks:\n\n"
    "1. When I provide the name of a traditional Chinese drug and a set of constituent "
    "ingredients, give a correct or incorrect answer. Based on the Pharmacopoeia information I "
    "have provided, if you determine that the given ingredients in the question are incorrect or "
    "do not match the provided drug name, simply respond with \"No\". Otherwise, reply "
    "\"Yes\".\n\n"
    "2. When I only provide the name of a traditional Chinese drug, please give what you believe "
    "to be the correct list of ingredients for this medicine. Only include the names of the "
    "constituent medicinal materials, without specific quantities or preparation processes.\n\n"
    "Please pay close attention to the following:\n\n"
    "Some drug names may contain terms that resemble traditional Chinese medicinal materials but "
    "are not actual medicinal materials. Do not interpret them literally.\n\n"
    "Some medicinal materials are commonly used in drug preparation. Be cautious in determining "
    "whether these common materials are present in the currently given medicine based on the "
    "provided content.\n\n"
    "Carefully identify the drug components and avoid repeating the names of medicinal "
    "materials.\"";

}  // namespace

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::kInquiry ? "inquiry" : "verify";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "inquiry") return Protocol::kInquiry;
  if (text == "verify") return Protocol::kVerify;
  throw ConfigError("unknown protocol \"" + std::string(text) + "\" (expected inquiry|verify)");
}

std::string_view to_string(Language lang) { return lang == Language::kZh ? "zh" : "en"; }

Language parse_language(std::string_view text) {
  if (text == "zh") return Language::kZh;
  if (text == "en") return Language::kEn;
  throw ConfigError("unknown language \"" + std::string(text) + "\" (expected zh|en)");
}

std::string render_ingredient_list(std::span<const std::string> ingredients) {
  std::string out = "[";
  for (std::size_t i = 0; i < ingredients.size(); ++i) {
    if (i > 0) out += ", ";
    out += '\'';
    out += ingredients[i];
    out += '\'';
  }
  out += ']';
  return out;
}

std::string build_inquiry_prompt(std::string_view drug_name, Language lang) {
  std::string name(drug_name);
  if (lang == Language::kZh) {
    return "你是一名资深中医专家。请给出药物：" + name +
           "的组成成分。只回答各成分的名称即可，无需给出剂量或制备流程。";
  }
  return "What are the ingredients of the drug " + name +
         "? Only give a list of the names of the ingredients please. No need to give dosages or "
         "the production workflow.";
}

std::string build_verify_prompt(std::string_view drug_name, std::span<const std::string> ingredients,
                                Language lang) {
  if (ingredients.empty()) throw Error("verification prompt needs at least one ingredient");
  std::string name(drug_name);
  const auto list = render_ingredient_list(ingredients);
  if (lang == Language::kZh) {
    return "作为一个资深中医药专家，请回答如下问题。请问，药物：" + name + "的组成成分是否为：" +
           list + "？只需回答“是”或“否”。";
  }
  return "Whether the drug " + name + " consists of " + list +
         "? Only respond with \"Yes\" or \"No\", please.";
}

std::string build_rag_prompt(std::string_view context, std::string_view question, Language lang) {
  std::string out;
  if (lang == Language::kZh) {
    out += "已知信息：";
    out += context;
    out += "\n\n";
    out += kRagInstructionsZh;
    out += "\n\n请回答以下问题：";
  } else {
    out += "Given the information: ";
    out += context;
    out += "\n\n";
    out += kRagInstructionsEn;
    out += "\n\nPlease answer the following question: ";
  }
  out += question;
  return out;
}

}  // namespace herbprobe
