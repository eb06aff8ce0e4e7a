#include "vgdial/interval.hpp"

#include <algorithm>
#include <cmath>

namespace vgdial {

namespace {
constexpr double kEps = 1e-9;
}

std::string to_string(IntervalKind k) {
  switch (k) {
    case IntervalKind::atomic: return "atomic";
    case IntervalKind::compositional: return "compositional";
    case IntervalKind::none: return "none";
  }
  return "?";
}

IntervalKind interval_kind_from_string(const std::string& s) {
  if (s == "atomic") return IntervalKind::atomic;
  if (s == "compositional") return IntervalKind::compositional;
  if (s == "none") return IntervalKind::none;
  throw DataError("unknown interval kind: " + s);
}

std::string to_string(SpatialRel r) {
  switch (r) {
    case SpatialRel::left: return "left";
    case SpatialRel::right: return "right";
    case SpatialRel::front: return "front";
    case SpatialRel::behind: return "behind";
  }
  return "?";
}

std::string to_string(TemporalRel r) {
  switch (r) {
    case TemporalRel::before: return "before";
    case TemporalRel::after: return "after";
    case TemporalRel::during: return "during";
  }
  return "?";
}

SpatialRel spatial_from_string(const std::string& s) {
  if (s == "left") return SpatialRel::left;
  if (s == "right") return SpatialRel::right;
  if (s == "front") return SpatialRel::front;
  if (s == "behind") return SpatialRel::behind;
  throw DataError("unknown spatial relation: " + s);
}

TemporalRel temporal_from_string(const std::string& s) {
  if (s == "before") return TemporalRel::before;
  if (s == "after") return TemporalRel::after;
  if (s == "during") return TemporalRel::during;
  throw DataError("unknown temporal relation: " + s);
}

std::vector<VideoInterval> enumerate_intervals(const SceneGraph& scene, double min_duration) {
  const std::vector<double> ts = scene_timestamps(scene);
  std::vector<VideoInterval> out;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      if (ts[j] - ts[i] < min_duration - kEps) continue;
      out.push_back({ts[i], ts[j],
                     j == i + 1 ? IntervalKind::atomic : IntervalKind::compositional});
    }
  }
  return out;  // already sorted by (start, end) given sorted timestamps
}

IntervalKind classify_interval(const SceneGraph& scene, double start, double end) {
  for (double t : scene_timestamps(scene))
    if (t > start + kEps && t < end - kEps) return IntervalKind::compositional;
  return IntervalKind::atomic;
}

Tri holds_spatial(const SceneGraph& scene, const VideoInterval& interval, int moving_id,
                  int anchor_id, SpatialRel rel) {
  if (interval.kind != IntervalKind::atomic)
    throw IntervalKindError("holds_spatial requires an atomic interval, got " +
                            to_string(interval.kind));
  const SceneObject& m = scene.at(moving_id);
  const SceneObject& a = scene.at(anchor_id);
  const double s = interval.start, e = interval.end;
  const bool m_moves = object_moves_in(scene, moving_id, s, e);
  const bool a_moves = object_moves_in(scene, anchor_id, s, e);
  if (m_moves && a_moves) return Tri::undefined;
  if (contained_overlaps(m, s, e) || contained_overlaps(a, s, e)) return Tri::undefined;

  auto compare = [rel](const Vec2& p, const Vec2& q) {
    switch (rel) {
      case SpatialRel::left: return p.x < q.x - kEps;
      case SpatialRel::right: return p.x > q.x + kEps;
      case SpatialRel::front: return p.y < q.y - kEps;
      case SpatialRel::behind: return p.y > q.y + kEps;
    }
    return false;
  };
  const bool at_start = compare(position_at(scene, moving_id, s), position_at(scene, anchor_id, s));
  const bool at_end = compare(position_at(scene, moving_id, e), position_at(scene, anchor_id, e));
  return (at_start && at_end) ? Tri::yes : Tri::no;
}

ActionSummary summarize_actions(const SceneGraph& scene, const VideoInterval& interval,
                                int object_id) {
  const SceneObject& obj = scene.at(object_id);
  ActionSummary out;
  for (const auto& e : obj.timeline) {
    if (!is_motion(e.kind)) continue;
    if (std::min(e.end, interval.end) - std::max(e.start, interval.start) <= kEps)
      continue;  // zero-measure touches do not count
    out.action_sequence.push_back(e.kind);
    out.frequency[e.kind] += 1;
  }
  if (out.action_sequence.empty()) {
    out.action_set.push_back(ActionKind::no_action);
    out.action_sequence.push_back(ActionKind::no_action);
    return out;  // frequency stays empty for a standalone no_action
  }
  for (ActionKind k : {ActionKind::flying, ActionKind::rotating, ActionKind::sliding})
    if (out.frequency.count(k)) out.action_set.push_back(k);
  return out;
}

bool object_moves_in(const SceneGraph& scene, int object_id, double a, double b) {
  const SceneObject& obj = scene.at(object_id);
  for (const auto& e : obj.timeline)
    if (moves_position(e.kind) && std::min(e.end, b) - std::max(e.start, a) > kEps)
      return true;
  return false;
}

}  // namespace vgdial
