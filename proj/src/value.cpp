#include "vgdial/value.hpp"

#include <algorithm>

namespace vgdial {

Tag tag_of(const Value& v) { return static_cast<Tag>(v.index()); }

std::string to_string(Tag t) {
  switch (t) {
    case Tag::objects: return "Objects";
    case Tag::object: return "Object";
    case Tag::interval: return "Interval";
    case Tag::action: return "Action";
    case Tag::action_set: return "ActionSet";
    case Tag::action_sequence: return "ActionSequence";
    case Tag::spatial_relation: return "SpatialRelation";
    case Tag::temporal_relation: return "TemporalRelation";
    case Tag::frequency: return "Frequency";
    case Tag::order: return "Order";
    case Tag::color: return "Color";
    case Tag::material: return "Material";
    case Tag::shape: return "Shape";
    case Tag::size: return "Size";
    case Tag::binary: return "Binary";
    case Tag::integer: return "Integer";
    case Tag::reference: return "Reference";
    case Tag::last_turn: return "LastTurn";
    case Tag::object_tracker: return "ObjectTracker";
    case Tag::interval_tracker: return "IntervalTracker";
  }
  return "?";
}

ActionSet make_action_set(std::vector<ActionKind> kinds) {
  std::sort(kinds.begin(), kinds.end(),
            [](ActionKind a, ActionKind b) { return static_cast<int>(a) < static_cast<int>(b); });
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  return ActionSet{std::move(kinds)};
}

std::string answer_string(const Value& v) {
  switch (tag_of(v)) {
    case Tag::binary:
      return std::get<BinaryVal>(v).value ? "True" : "False";
    case Tag::integer:
      return std::to_string(std::get<IntegerVal>(v).value);
    case Tag::action:
      return to_string(std::get<ActionKind>(v));
    case Tag::action_set: {
      const auto& kinds = std::get<ActionSet>(v).kinds;
      if (kinds.empty()) throw DataError("empty action set has no answer form");
      std::string out;
      for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (i) out += ",";
        out += to_string(kinds[i]);
      }
      return out;
    }
    case Tag::color: return to_string(std::get<Color>(v));
    case Tag::material: return to_string(std::get<Material>(v));
    case Tag::shape: return to_string(std::get<Shape>(v));
    case Tag::size: return to_string(std::get<Size>(v));
    default:
      throw DataError("value of type " + to_string(tag_of(v)) + " cannot be an answer");
  }
}

}  // namespace vgdial
