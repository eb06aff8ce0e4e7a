#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/executor.hpp"
#include "vgdial/interval.hpp"
#include "vgdial/program.hpp"
#include "vgdial/vocab.hpp"

namespace vgdial {

// One entry of the dialogue object tracker: an object that has been uniquely
// localized by an earlier turn, together with the attribute values that the
// dialogue has revealed about it so far (either used in a description or
// returned as an attribute answer).
struct TrackedObject {
  int id = -1;
  int first_turn = -1;    // 1-based turn where the object first appeared
  int last_mention = -1;  // most recent turn that referenced the object
  std::vector<std::string> revealed_attrs;

  bool has_attr(const std::string& value) const;
  void reveal(const std::string& value);
};

// A count fact established by an earlier turn over the temporally agnostic
// scope, used to reject questions whose answer is already entailed.
struct CountFact {
  std::vector<std::string> attrs;  // conjunction of attribute values
  int count = 0;
};

// Everything remembered about the previous turn that later turns may refer to.
struct LastTurn {
  std::string template_id;
  QuestionType type = QuestionType::object_exist;
  std::string sub_type;
  std::string question;
  std::string answer;
  Program program;
  std::vector<int> focal_ids;  // objects localized by the turn, in node order
  VideoInterval interval{0.0, 0.0, IntervalKind::none};
  int interval_node = -1;  // program node holding the focal interval
  std::optional<VideoInterval> anchor_interval;  // from find/refer_interval
  std::optional<ActionKind> anchor_kind;         // action of the anchor event
};

// Mutable dialogue generation state threaded through the turns.
struct DialogueState {
  int turns_done = 0;
  double cutoff = 0.0;
  std::vector<TrackedObject> tracker;
  std::optional<LastTurn> last;
  std::vector<CountFact> facts;

  StateView exec_view() const;
  const TrackedObject* tracked(int id) const;
  TrackedObject& track(int id, int turn);
};

inline bool TrackedObject::has_attr(const std::string& value) const {
  return std::find(revealed_attrs.begin(), revealed_attrs.end(), value) !=
         revealed_attrs.end();
}

inline void TrackedObject::reveal(const std::string& value) {
  if (!has_attr(value)) revealed_attrs.push_back(value);
}

inline StateView DialogueState::exec_view() const {
  StateView v;
  v.has_last_turn = last.has_value();
  for (const auto& t : tracker) v.tracker_ids.push_back(t.id);
  if (last) {
    v.last_focal_ids = last->focal_ids;
    v.last_interval = last->interval;
    v.last_anchor_interval = last->anchor_interval;
  }
  return v;
}

inline const TrackedObject* DialogueState::tracked(int id) const {
  for (const auto& t : tracker)
    if (t.id == id) return &t;
  return nullptr;
}

inline TrackedObject& DialogueState::track(int id, int turn) {
  for (auto& t : tracker)
    if (t.id == id) return t;
  tracker.push_back(TrackedObject{id, turn, turn, {}});
  return tracker.back();
}

}  // namespace vgdial
