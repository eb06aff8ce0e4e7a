#pragma once

/*
 * Scene metadata model: procedurally generated tabletop scenes in the style
 * of synthetic video-reasoning corpora.  Objects carry attribute tuples and a
 * gap-free action timeline over continuous time; cones may temporarily
 * contain other objects.  No rendering, no physics — the metadata itself is
 * the ground truth that questions are executed against.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/rng.hpp"
#include "vgdial/util.hpp"

namespace vgdial {

enum class Shape { cone, cube, sphere, cylinder, snitch };
enum class Size { small, medium, large };
enum class Color { gold, gray, green, purple, red, cyan, blue, brown, yellow };
enum class Material { metal, rubber };
enum class ActionKind { flying, rotating, sliding, no_action };

constexpr int kNumShapes = 5;
constexpr int kNumSizes = 3;
constexpr int kNumColors = 9;
constexpr int kNumMaterials = 2;

std::string to_string(Shape s);
std::string to_string(Size s);
std::string to_string(Color c);
std::string to_string(Material m);
std::string to_string(ActionKind k);
Shape shape_from_string(const std::string& s);
Size size_from_string(const std::string& s);
Color color_from_string(const std::string& s);
Material material_from_string(const std::string& s);
ActionKind action_from_string(const std::string& s);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_motion(ActionKind k) { return k != ActionKind::no_action; }
// rotating projects to a point on the ground plane, flying/sliding to a line
inline bool moves_position(ActionKind k) {
  return k == ActionKind::flying || k == ActionKind::sliding;
}

struct ActionEvent {
  ActionKind kind = ActionKind::no_action;
  double start = 0.0;
  double end = 0.0;
  Vec2 start_pos;
  Vec2 end_pos;
};

struct ContainEpisode {
  int container = -1;
  double start = 0.0;
  double end = 0.0;
};

struct ObjectAttrs {
  Shape shape = Shape::cube;
  Size size = Size::small;
  Color color = Color::gray;
  Material material = Material::rubber;

  bool operator==(const ObjectAttrs&) const = default;
};

struct SceneObject {
  int id = -1;
  ObjectAttrs attrs;
  std::vector<ActionEvent> timeline;          // chronological, gap-free over [0, duration]
  std::vector<ContainEpisode> containment;    // episodes where this object is contained
};

struct SceneGraph {
  std::string video_id;
  double duration = 10.0;
  std::vector<SceneObject> objects;

  const SceneObject* find(int id) const;
  const SceneObject& at(int id) const;  // throws DataError on unknown id
};

struct SceneConfig {
  double duration = 10.0;
  int min_objects = 4;
  int max_objects = 8;
  // per-object motion event count weights for 0,1,2,3 events; flying gets the
  // largest kind share so flight-anchored questions are plentiful
  std::array<double, 4> motion_count_weights = {0.15, 0.40, 0.30, 0.15};
  std::array<double, 3> kind_weights = {0.45, 0.20, 0.35};  // flying, rotating, sliding
  double containment_prob = 0.45;  // chance a scene gets one containment episode
};

struct Violation {
  int object_id = -1;  // -1 for scene-level problems
  std::string rule;
  std::string detail;
};

// Deterministic pure function of (config, seed).  Throws ConfigError when the
// object count range leaves [3, 10] or duration < 1.0.
SceneGraph simulate_scene(const SceneConfig& config, std::uint64_t seed);

std::vector<Violation> validate_scene(const SceneGraph& scene);

// Effective ground-plane position at time t; follows containment (a contained
// object sits at its container's position).
Vec2 position_at(const SceneGraph& scene, int object_id, double t);

// True when some containment episode of the object covers [a, b] entirely
// (up to eps), i.e. the object is hidden for the whole span.
bool contained_throughout(const SceneObject& obj, double a, double b);
// True when some episode overlaps (a, b) with positive measure.
bool contained_overlaps(const SceneObject& obj, double a, double b);

// Clip the scene to [0, cutoff]: later events dropped, straddling events
// truncated with interpolated end positions, zero-length leftovers removed.
SceneGraph truncate_scene(const SceneGraph& scene, double cutoff);

// sorted unique motion-event boundaries, including 0 and duration
std::vector<double> scene_timestamps(const SceneGraph& scene);

std::string scene_to_json(const SceneGraph& scene);
SceneGraph scene_from_json(const std::string& json_text);

const ObjectAttrs& snitch_attrs();

}  // namespace vgdial
