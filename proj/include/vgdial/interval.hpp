#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/scene.hpp"

namespace vgdial {

// Interval taxonomy: atomic spans sit between two consecutive action
// boundaries (every object is in at most one event state); compositional
// spans cross at least one boundary; "none" marks temporally-agnostic
// questions and carries the full video span by convention.
enum class IntervalKind { atomic, compositional, none };

std::string to_string(IntervalKind k);
IntervalKind interval_kind_from_string(const std::string& s);

struct VideoInterval {
  double start = 0.0;
  double end = 0.0;
  IntervalKind kind = IntervalKind::none;

  double length() const { return end - start; }
  bool operator==(const VideoInterval&) const = default;
};

enum class SpatialRel { left, right, front, behind };
enum class TemporalRel { before, after, during };
enum class Tri { yes, no, undefined };

std::string to_string(SpatialRel r);
std::string to_string(TemporalRel r);
SpatialRel spatial_from_string(const std::string& s);
TemporalRel temporal_from_string(const std::string& s);

class IntervalKindError : public std::runtime_error {
public:
  explicit IntervalKindError(const std::string& what) : std::runtime_error(what) {}
};

// All candidate spans between action/video boundaries with length >=
// min_duration, each classified atomic or compositional.  Sorted by
// (start, end).  This is also the oracle candidate list for interval
// identification metrics.
std::vector<VideoInterval> enumerate_intervals(const SceneGraph& scene,
                                               double min_duration = 0.5);

// Classify an arbitrary span against the scene's boundaries.
IntervalKind classify_interval(const SceneGraph& scene, double start, double end);

// Does `moving_id` stand in `rel` to `anchor_id` over an atomic interval?
// Convention: left = smaller x, right = larger x, front = smaller y,
// behind = larger y.  The relation must hold at both interval endpoints;
// undefined when both objects change position or either is contained during
// the span.  Throws IntervalKindError on non-atomic intervals.
Tri holds_spatial(const SceneGraph& scene, const VideoInterval& interval,
                  int moving_id, int anchor_id, SpatialRel rel);

struct ActionSummary {
  std::vector<ActionKind> action_set;       // unique kinds, fixed enum order
  std::vector<ActionKind> action_sequence;  // chronological motion kinds
  std::map<ActionKind, int> frequency;      // motion kinds only
};

// Actions of one object within an interval; overlap must have positive
// measure (shared endpoints do not count).  A fully idle object reports
// {no_action} / [no_action] / empty frequency map.
ActionSummary summarize_actions(const SceneGraph& scene, const VideoInterval& interval,
                                int object_id);

// True when the object has a flying/sliding event overlapping (a, b) with
// positive measure, i.e. its projected position changes during the span.
bool object_moves_in(const SceneGraph& scene, int object_id, double a, double b);

}  // namespace vgdial
