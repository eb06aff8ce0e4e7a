#pragma once

// Question taxonomy and the frozen answer vocabulary.  The vocabulary ships
// as a config file (data/answer_vocab.json); the in-code enumeration exists
// so tests can assert the file is exactly the canonical 40 entries.

#include <string>
#include <vector>

#include "vgdial/value.hpp"

namespace vgdial {

enum class QuestionType {
  action_count, action_query, attribute_query, compare_action_freq,
  compare_action_seq, compare_action_set, object_count, object_exist
};

constexpr int kNumQuestionTypes = 8;

std::string to_string(QuestionType t);
QuestionType question_type_from_string(const std::string& s);

// canonical 40-entry answer list: binaries, integers 0..10, action kinds,
// multi-kind action sets, colors, materials, shapes, sizes
std::vector<std::string> build_answer_vocabulary();

// loads and validates the config file; throws ConfigError if it does not
// hold exactly the canonical entries
std::vector<std::string> load_answer_vocabulary(const std::string& path);

std::string default_vocab_path();
std::string default_templates_path();

// Predefined per-(type, sub-type) answer space used by the question-type
// baselines: counts range over {0..10}, comparisons/exists over {True,False},
// action queries over kinds + multi-kind sets, attribute queries over the
// queried attribute's domain.
std::vector<std::string> answer_space(QuestionType type, const std::string& sub_type);

bool in_answer_vocabulary(const std::string& answer);

}  // namespace vgdial
