#include "vgdial/vocab.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "vgdial/util.hpp"

namespace vgdial {

using nlohmann::json;

std::string to_string(QuestionType t) {
  switch (t) {
    case QuestionType::action_count: return "action_count";
    case QuestionType::action_query: return "action_query";
    case QuestionType::attribute_query: return "attribute_query";
    case QuestionType::compare_action_freq: return "compare_action_freq";
    case QuestionType::compare_action_seq: return "compare_action_seq";
    case QuestionType::compare_action_set: return "compare_action_set";
    case QuestionType::object_count: return "object_count";
    case QuestionType::object_exist: return "object_exist";
  }
  return "?";
}

QuestionType question_type_from_string(const std::string& s) {
  for (int i = 0; i < kNumQuestionTypes; ++i) {
    QuestionType t = static_cast<QuestionType>(i);
    if (to_string(t) == s) return t;
  }
  throw DataError("unknown question type: " + s);
}

namespace {

std::vector<std::string> integer_answers() {
  std::vector<std::string> out;
  for (int i = 0; i <= 10; ++i) out.push_back(std::to_string(i));
  return out;
}

std::vector<std::string> action_answers() {
  // 4 kinds plus every multi-kind set in canonical order
  return {"flying", "rotating", "sliding", "no action",
          "flying,rotating", "flying,sliding", "rotating,sliding",
          "flying,rotating,sliding"};
}

std::vector<std::string> color_answers() {
  std::vector<std::string> out;
  for (int i = 0; i < kNumColors; ++i) out.push_back(to_string(static_cast<Color>(i)));
  return out;
}

std::vector<std::string> shape_answers() {
  std::vector<std::string> out;
  for (int i = 0; i < kNumShapes; ++i) out.push_back(to_string(static_cast<Shape>(i)));
  return out;
}

}  // namespace

std::vector<std::string> build_answer_vocabulary() {
  std::vector<std::string> v = {"True", "False"};
  for (const auto& s : integer_answers()) v.push_back(s);
  for (const auto& s : action_answers()) v.push_back(s);
  for (const auto& s : color_answers()) v.push_back(s);
  v.push_back("metal");
  v.push_back("rubber");
  for (const auto& s : shape_answers()) v.push_back(s);
  v.push_back("small");
  v.push_back("medium");
  v.push_back("large");
  return v;
}

std::vector<std::string> load_answer_vocabulary(const std::string& path) {
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("vocabulary file parse error: ") + e.what());
  }
  if (!root.contains("answers") || !root["answers"].is_array())
    throw ConfigError("vocabulary file must hold an 'answers' array");
  std::vector<std::string> out;
  for (const auto& a : root["answers"]) out.push_back(a.get<std::string>());
  const auto canonical = build_answer_vocabulary();
  if (out != canonical)
    throw ConfigError("vocabulary file diverges from the canonical 40-entry list");
  return out;
}

std::string default_vocab_path() { return std::string(VGDIAL_DATA_DIR) + "/answer_vocab.json"; }
std::string default_templates_path() { return std::string(VGDIAL_DATA_DIR) + "/templates.json"; }

std::vector<std::string> answer_space(QuestionType type, const std::string& sub_type) {
  switch (type) {
    case QuestionType::object_count:
    case QuestionType::action_count:
      return integer_answers();
    case QuestionType::object_exist:
    case QuestionType::compare_action_freq:
      return {"True", "False"};
    case QuestionType::compare_action_seq:
    case QuestionType::compare_action_set:
      return sub_type == "count" ? integer_answers()
                                 : std::vector<std::string>{"True", "False"};
    case QuestionType::action_query:
      return action_answers();
    case QuestionType::attribute_query: {
      if (sub_type == "size") return {"small", "medium", "large"};
      if (sub_type == "color") return color_answers();
      if (sub_type == "material") return {"metal", "rubber"};
      if (sub_type == "shape") return shape_answers();
      throw DataError("unknown attribute_query sub-type: " + sub_type);
    }
  }
  throw DataError("unhandled question type");
}

bool in_answer_vocabulary(const std::string& answer) {
  static const std::set<std::string> vocab = [] {
    auto v = build_answer_vocabulary();
    return std::set<std::string>(v.begin(), v.end());
  }();
  return vocab.count(answer) > 0;
}

}  // namespace vgdial
