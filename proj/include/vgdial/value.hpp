#pragma once

/*
 * Typed values flowing through question programs.  The variant fixes the 20
 * data types the executor recognizes; tracker/last-turn/reference types are
 * context handles materialized by the executor from the dialogue state rather
 * than ordinary dataflow, but they participate in type checking.
 */

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vgdial/interval.hpp"
#include "vgdial/scene.hpp"

namespace vgdial {

struct ObjectList { std::vector<int> ids; };
struct ObjectRef { int id = -1; };

struct ActionSet {
  std::vector<ActionKind> kinds;  // canonical: unique, fixed enum order
};
struct ActionSeq {
  std::vector<ActionKind> kinds;  // chronological; [no_action] when idle
};

enum class Superlative { least, most };

// positive occurrence count or a superlative, never both
struct FrequencyVal {
  std::optional<int> count;
  std::optional<Superlative> superlative;
};

struct OrderVal {
  int position = 1;      // 1-based
  bool from_end = false; // "last"
};

struct BinaryVal { bool value = false; };
struct IntegerVal { int value = 0; };
struct ReferenceVal { std::string word; };  // "it", "its", "them"

// context handles (see file comment)
struct LastTurnVal {};
struct ObjectTrackerVal {};
struct IntervalTrackerVal {};

using Value =
    std::variant<ObjectList, ObjectRef, VideoInterval, ActionKind, ActionSet, ActionSeq,
                 SpatialRel, TemporalRel, FrequencyVal, OrderVal, Color, Material, Shape,
                 Size, BinaryVal, IntegerVal, ReferenceVal, LastTurnVal, ObjectTrackerVal,
                 IntervalTrackerVal>;

// type tags in declaration order; used for signatures and error messages
enum class Tag {
  objects, object, interval, action, action_set, action_sequence, spatial_relation,
  temporal_relation, frequency, order, color, material, shape, size, binary, integer,
  reference, last_turn, object_tracker, interval_tracker
};

Tag tag_of(const Value& v);
std::string to_string(Tag t);

ActionSet make_action_set(std::vector<ActionKind> kinds);  // sorts + dedups

// Canonical answer-string form: "True"/"False", decimal integers, attribute
// names, action kinds, and comma-joined multi-kind action sets
// ("flying,sliding").  Throws DataError for values that cannot be answers.
std::string answer_string(const Value& v);

}  // namespace vgdial
