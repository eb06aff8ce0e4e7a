#include "vgdial/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace vgdial {

using nlohmann::json;

namespace {
constexpr double kEps = 1e-9;
// all distinct motion boundaries in a scene stay at least this far apart so
// that dense-grid oracles (step 0.01) can never miss a sliver of overlap
constexpr double kBoundarySep = 0.05;
constexpr double kMinGap = 0.6;       // idle padding between motion events
constexpr double kArenaMargin = 4.5;  // positions stay within [-4.5, 4.5]^2
}  // namespace

std::string to_string(Shape s) {
  switch (s) {
    case Shape::cone: return "cone";
    case Shape::cube: return "cube";
    case Shape::sphere: return "sphere";
    case Shape::cylinder: return "cylinder";
    case Shape::snitch: return "snitch";
  }
  return "?";
}

std::string to_string(Size s) {
  switch (s) {
    case Size::small: return "small";
    case Size::medium: return "medium";
    case Size::large: return "large";
  }
  return "?";
}

std::string to_string(Color c) {
  switch (c) {
    case Color::gold: return "gold";
    case Color::gray: return "gray";
    case Color::green: return "green";
    case Color::purple: return "purple";
    case Color::red: return "red";
    case Color::cyan: return "cyan";
    case Color::blue: return "blue";
    case Color::brown: return "brown";
    case Color::yellow: return "yellow";
  }
  return "?";
}

std::string to_string(Material m) {
  return m == Material::metal ? "metal" : "rubber";
}

std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::flying: return "flying";
    case ActionKind::rotating: return "rotating";
    case ActionKind::sliding: return "sliding";
    case ActionKind::no_action: return "no action";
  }
  return "?";
}

Shape shape_from_string(const std::string& s) {
  if (s == "cone") return Shape::cone;
  if (s == "cube") return Shape::cube;
  if (s == "sphere") return Shape::sphere;
  if (s == "cylinder") return Shape::cylinder;
  if (s == "snitch") return Shape::snitch;
  throw DataError("unknown shape: " + s);
}

Size size_from_string(const std::string& s) {
  if (s == "small") return Size::small;
  if (s == "medium") return Size::medium;
  if (s == "large") return Size::large;
  throw DataError("unknown size: " + s);
}

Color color_from_string(const std::string& s) {
  static const std::vector<std::pair<std::string, Color>> table = {
      {"gold", Color::gold},   {"gray", Color::gray},   {"green", Color::green},
      {"purple", Color::purple}, {"red", Color::red},   {"cyan", Color::cyan},
      {"blue", Color::blue},   {"brown", Color::brown}, {"yellow", Color::yellow}};
  for (const auto& [name, c] : table)
    if (name == s) return c;
  throw DataError("unknown color: " + s);
}

Material material_from_string(const std::string& s) {
  if (s == "metal") return Material::metal;
  if (s == "rubber") return Material::rubber;
  throw DataError("unknown material: " + s);
}

ActionKind action_from_string(const std::string& s) {
  if (s == "flying") return ActionKind::flying;
  if (s == "rotating") return ActionKind::rotating;
  if (s == "sliding") return ActionKind::sliding;
  if (s == "no action" || s == "no_action") return ActionKind::no_action;
  throw DataError("unknown action kind: " + s);
}

const ObjectAttrs& snitch_attrs() {
  static const ObjectAttrs a{Shape::snitch, Size::small, Color::gold, Material::metal};
  return a;
}

const SceneObject* SceneGraph::find(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const SceneObject& SceneGraph::at(int id) const {
  const SceneObject* o = find(id);
  if (!o) throw DataError("unknown object id " + std::to_string(id));
  return *o;
}

// ---------------------------------------------------------------- simulation

namespace {

bool far_from_all(const std::vector<double>& registry, double t) {
  for (double r : registry)
    if (std::fabs(r - t) < kBoundarySep) return false;
  return true;
}

Vec2 random_point(Rng& rng) {
  return {rng.uniform(-kArenaMargin, kArenaMargin), rng.uniform(-kArenaMargin, kArenaMargin)};
}

Vec2 random_destination(Rng& rng, const Vec2& from) {
  for (int i = 0; i < 64; ++i) {
    Vec2 p = random_point(rng);
    double dx = p.x - from.x, dy = p.y - from.y;
    if (dx * dx + dy * dy >= 1.0) return p;  // displacement >= 1 unit
  }
  return {from.x > 0 ? from.x - 2.0 : from.x + 2.0, from.y};
}

ActionKind sample_kind(Rng& rng, const SceneConfig& cfg, bool is_sphere) {
  // spheres never rotate; renormalize over flying/sliding
  std::vector<double> w = {cfg.kind_weights[0], is_sphere ? 0.0 : cfg.kind_weights[1],
                           cfg.kind_weights[2]};
  switch (rng.weighted(w)) {
    case 0: return ActionKind::flying;
    case 1: return ActionKind::rotating;
    default: return ActionKind::sliding;
  }
}

// Lay out n_motion events with idle gaps (>= kMinGap) on both sides; returns
// false when boundaries collide with the scene-wide registry.
bool layout_timeline(Rng& rng, const SceneConfig& cfg, int n_motion,
                     const std::vector<ActionKind>& kinds,
                     const std::vector<double>& registry, SceneObject& obj) {
  obj.timeline.clear();
  if (n_motion == 0) {
    Vec2 p = random_point(rng);
    obj.timeline.push_back({ActionKind::no_action, 0.0, cfg.duration, p, p});
    return true;
  }
  std::vector<double> durs(n_motion);
  double total = 0.0;
  for (int i = 0; i < n_motion; ++i) {
    durs[i] = rng.uniform(0.8, 2.2);
    total += durs[i];
  }
  double idle_total = cfg.duration - total;
  double slack = idle_total - kMinGap * (n_motion + 1);
  if (slack < 0.0) return false;
  // split slack over the n_motion+1 gaps
  std::vector<double> cuts(n_motion + 1);
  double cut_sum = 0.0;
  for (auto& c : cuts) {
    c = rng.uniform();
    cut_sum += c;
  }
  std::vector<double> bounds;
  double t = 0.0;
  Vec2 pos = random_point(rng);
  for (int i = 0; i < n_motion; ++i) {
    double gap = kMinGap + slack * cuts[i] / cut_sum;
    double s = t + gap;
    double e = s + durs[i];
    if (!far_from_all(registry, s) || !far_from_all(registry, e)) return false;
    if (!bounds.empty() && (s - bounds.back() < kBoundarySep || e - s < kBoundarySep))
      return false;
    obj.timeline.push_back({ActionKind::no_action, t, s, pos, pos});
    Vec2 next_pos = moves_position(kinds[i]) ? random_destination(rng, pos) : pos;
    obj.timeline.push_back({kinds[i], s, e, pos, next_pos});
    bounds.push_back(s);
    bounds.push_back(e);
    pos = next_pos;
    t = e;
  }
  obj.timeline.push_back({ActionKind::no_action, t, cfg.duration, pos, pos});
  return true;
}

// Container arrives by flight just before the episode, sits on the containee,
// and flies away right after; all recorded positions stay coherent.
bool try_containment(Rng& rng, const SceneConfig& cfg, SceneGraph& scene,
                     std::vector<double>& registry) {
  std::vector<int> cones;
  for (const auto& o : scene.objects)
    if (o.attrs.shape == Shape::cone) cones.push_back(o.id);
  if (cones.empty()) return false;
  int container_id = rng.pick(cones);

  std::vector<int> candidates;
  for (const auto& o : scene.objects)
    if (o.id != container_id) candidates.push_back(o.id);
  rng.shuffle(candidates);

  for (int containee_id : candidates) {
    SceneObject& containee = scene.objects[static_cast<std::size_t>(containee_id)];
    if (!containee.containment.empty()) continue;
    for (const auto& idle : containee.timeline) {
      if (idle.kind != ActionKind::no_action) continue;
      double f1 = rng.uniform(0.8, 1.4), f2 = rng.uniform(0.8, 1.4);
      double lead = std::max(idle.start, kMinGap) ;
      double lo = std::max(lead + 0.1, f1 + kMinGap);         // room for inbound flight
      double hi_limit = std::min(idle.end - 0.1, cfg.duration - kMinGap - f2);
      double ep_len = rng.uniform(1.5, 2.5);
      if (hi_limit - lo < ep_len) continue;
      bool placed = false;
      for (int attempt = 0; attempt < 40 && !placed; ++attempt) {
        double t1 = rng.uniform(lo, hi_limit - ep_len);
        double t2 = t1 + ep_len;
        double b0 = t1 - f1, b3 = t2 + f2;
        if (!far_from_all(registry, b0) || !far_from_all(registry, t1) ||
            !far_from_all(registry, t2) || !far_from_all(registry, b3))
          continue;
        Vec2 seat = idle.start_pos;  // containee is idle there for the whole span
        SceneObject& cont = scene.objects[static_cast<std::size_t>(container_id)];
        Vec2 home = random_point(rng);
        Vec2 away = random_destination(rng, seat);
        cont.timeline.clear();
        cont.timeline.push_back({ActionKind::no_action, 0.0, b0, home, home});
        cont.timeline.push_back({ActionKind::flying, b0, t1, home, seat});
        cont.timeline.push_back({ActionKind::no_action, t1, t2, seat, seat});
        cont.timeline.push_back({ActionKind::flying, t2, b3, seat, away});
        cont.timeline.push_back({ActionKind::no_action, b3, cfg.duration, away, away});
        containee.containment.push_back({container_id, t1, t2});
        registry.insert(registry.end(), {b0, t1, t2, b3});
        placed = true;
      }
      if (placed) return true;
    }
  }
  return false;
}

}  // namespace

SceneGraph simulate_scene(const SceneConfig& config, std::uint64_t seed) {
  if (config.min_objects < 3 || config.max_objects > 10 ||
      config.min_objects > config.max_objects)
    throw ConfigError("object count range must sit within [3, 10]");
  if (config.duration < 1.0) throw ConfigError("scene duration must be >= 1.0 s");

  Rng rng(derive_seed(seed, 0x5ceull, 0));
  SceneGraph scene;
  char vid[32];
  std::snprintf(vid, sizeof(vid), "v%016llx", static_cast<unsigned long long>(seed));
  scene.video_id = vid;
  scene.duration = config.duration;

  const int n = rng.uniform_int(config.min_objects, config.max_objects);

  // exactly one snitch, fixed attributes, always object 0
  std::vector<ObjectAttrs> used;
  {
    SceneObject snitch;
    snitch.id = 0;
    snitch.attrs = snitch_attrs();
    used.push_back(snitch.attrs);
    scene.objects.push_back(std::move(snitch));
  }
  for (int i = 1; i < n; ++i) {
    SceneObject obj;
    obj.id = i;
    for (int tries = 0; tries < 256; ++tries) {
      ObjectAttrs a;
      a.shape = static_cast<Shape>(rng.uniform_int(0, kNumShapes - 2));  // snitch excluded
      a.size = static_cast<Size>(rng.uniform_int(0, kNumSizes - 1));
      a.color = static_cast<Color>(rng.uniform_int(0, kNumColors - 1));
      a.material = static_cast<Material>(rng.uniform_int(0, kNumMaterials - 1));
      if (std::find(used.begin(), used.end(), a) == used.end()) {
        obj.attrs = a;
        break;
      }
    }
    used.push_back(obj.attrs);
    scene.objects.push_back(std::move(obj));
  }

  std::vector<double> registry;  // motion boundaries placed so far
  for (auto& obj : scene.objects) {
    int n_motion = rng.weighted({config.motion_count_weights.begin(),
                                 config.motion_count_weights.end()});
    bool done = false;
    while (!done) {
      std::vector<ActionKind> kinds;
      for (int k = 0; k < n_motion; ++k)
        kinds.push_back(sample_kind(rng, config, obj.attrs.shape == Shape::sphere));
      for (int attempt = 0; attempt < 60 && !done; ++attempt)
        done = layout_timeline(rng, config, n_motion, kinds, registry, obj);
      if (!done) n_motion = std::max(0, n_motion - 1);  // degrade gracefully
    }
    for (const auto& e : obj.timeline)
      if (is_motion(e.kind)) {
        registry.push_back(e.start);
        registry.push_back(e.end);
      }
  }

  if (rng.bernoulli(config.containment_prob)) try_containment(rng, config, scene, registry);
  return scene;
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_scene(const SceneGraph& scene) {
  std::vector<Violation> out;
  auto flag = [&out](int id, const std::string& rule, const std::string& detail) {
    out.push_back({id, rule, detail});
  };

  const int n = static_cast<int>(scene.objects.size());
  if (n < 3 || n > 10)
    flag(-1, "object_count", "scene has " + std::to_string(n) + " objects");

  int snitches = 0;
  for (const auto& o : scene.objects)
    if (o.attrs.shape == Shape::snitch) ++snitches;
  if (snitches != 1)
    flag(-1, "snitch_count", std::to_string(snitches) + " snitch objects");

  for (int i = 0; i < n; ++i) {
    const auto& a = scene.objects[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      const auto& b = scene.objects[static_cast<std::size_t>(j)];
      if (a.id == b.id) flag(a.id, "duplicate_id", "two objects share an id");
      if (a.attrs == b.attrs)
        flag(b.id, "duplicate_attrs",
             "objects " + std::to_string(a.id) + " and " + std::to_string(b.id) +
                 " are indistinguishable");
    }
  }

  for (const auto& o : scene.objects) {
    if (o.attrs.shape == Shape::snitch && !(o.attrs == snitch_attrs()))
      flag(o.id, "snitch_attrs", "snitch attributes are fixed");
    if (o.timeline.empty()) {
      flag(o.id, "timeline_empty", "no events");
      continue;
    }
    if (std::fabs(o.timeline.front().start) > kEps ||
        std::fabs(o.timeline.back().end - scene.duration) > kEps)
      flag(o.id, "timeline_span", "timeline does not cover [0, duration]");
    for (std::size_t k = 0; k < o.timeline.size(); ++k) {
      const auto& e = o.timeline[k];
      if (e.end <= e.start + kEps)
        flag(o.id, "event_order", "non-positive event span");
      if (k + 1 < o.timeline.size()) {
        const auto& next = o.timeline[k + 1];
        if (next.start < e.end - kEps)
          flag(o.id, "timeline_overlap", "events overlap at t=" + format_double(next.start));
        else if (next.start > e.end + kEps)
          flag(o.id, "timeline_gap", "timeline gap at t=" + format_double(e.end));
      }
      const bool point = !moves_position(e.kind);
      const double dx = e.end_pos.x - e.start_pos.x, dy = e.end_pos.y - e.start_pos.y;
      const double disp2 = dx * dx + dy * dy;
      if (point && disp2 > kEps)
        flag(o.id, "event_geometry", to_string(e.kind) + " must project to a point");
      if (!point && disp2 <= kEps)
        flag(o.id, "event_geometry", to_string(e.kind) + " must displace the object");
      if (e.kind == ActionKind::rotating && o.attrs.shape == Shape::sphere)
        flag(o.id, "sphere_no_rotate", "sphere objects cannot rotate");
    }
    for (const auto& ep : o.containment) {
      if (ep.end <= ep.start + kEps || ep.start < -kEps || ep.end > scene.duration + kEps)
        flag(o.id, "containment_bounds", "bad episode span");
      if (ep.container == o.id) flag(o.id, "containment_self", "object contains itself");
      const SceneObject* cont = scene.find(ep.container);
      if (!cont)
        flag(o.id, "containment_container", "unknown container id");
      else if (cont->attrs.shape != Shape::cone)
        flag(o.id, "container_not_cone", "only cones can contain");
      for (const auto& e : o.timeline)
        if (is_motion(e.kind) &&
            std::min(e.end, ep.end) - std::max(e.start, ep.start) > kEps)
          flag(o.id, "containment_motion", "contained object must emit no_action");
    }
  }
  return out;
}

// ------------------------------------------------------------------- queries

bool contained_throughout(const SceneObject& obj, double a, double b) {
  for (const auto& ep : obj.containment)
    if (ep.start <= a + kEps && ep.end >= b - kEps) return true;
  return false;
}

bool contained_overlaps(const SceneObject& obj, double a, double b) {
  for (const auto& ep : obj.containment)
    if (std::min(ep.end, b) - std::max(ep.start, a) > kEps) return true;
  return false;
}

namespace {
Vec2 position_at_impl(const SceneGraph& scene, int object_id, double t, int depth) {
  const SceneObject& obj = scene.at(object_id);
  if (depth < 8) {
    for (const auto& ep : obj.containment)
      if (t >= ep.start - kEps && t <= ep.end + kEps)
        return position_at_impl(scene, ep.container, t, depth + 1);
  }
  if (obj.timeline.empty()) return {};
  if (t <= obj.timeline.front().start) return obj.timeline.front().start_pos;
  for (const auto& e : obj.timeline) {
    if (t <= e.end + kEps) {
      if (!moves_position(e.kind) || e.end - e.start <= kEps) return e.start_pos;
      double f = std::clamp((t - e.start) / (e.end - e.start), 0.0, 1.0);
      return {e.start_pos.x + f * (e.end_pos.x - e.start_pos.x),
              e.start_pos.y + f * (e.end_pos.y - e.start_pos.y)};
    }
  }
  return obj.timeline.back().end_pos;
}
}  // namespace

Vec2 position_at(const SceneGraph& scene, int object_id, double t) {
  return position_at_impl(scene, object_id, t, 0);
}

SceneGraph truncate_scene(const SceneGraph& scene, double cutoff) {
  if (cutoff >= scene.duration - kEps) return scene;
  SceneGraph out;
  out.video_id = scene.video_id;
  out.duration = cutoff;
  for (const auto& o : scene.objects) {
    SceneObject t;
    t.id = o.id;
    t.attrs = o.attrs;
    for (const auto& e : o.timeline) {
      if (e.start >= cutoff - kEps) break;
      ActionEvent clipped = e;
      if (e.end > cutoff) {
        clipped.end = cutoff;
        clipped.end_pos = position_at(scene, o.id, cutoff);
      }
      t.timeline.push_back(clipped);
    }
    for (const auto& ep : o.containment) {
      if (ep.start >= cutoff - kEps) continue;
      ContainEpisode c = ep;
      c.end = std::min(c.end, cutoff);
      if (c.end - c.start > kEps) t.containment.push_back(c);
    }
    out.objects.push_back(std::move(t));
  }
  return out;
}

std::vector<double> scene_timestamps(const SceneGraph& scene) {
  std::vector<double> ts = {0.0, scene.duration};
  for (const auto& o : scene.objects)
    for (const auto& e : o.timeline)
      if (is_motion(e.kind)) {
        ts.push_back(e.start);
        ts.push_back(e.end);
      }
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts) {
    if (t < -kEps || t > scene.duration + kEps) continue;
    if (out.empty() || t - out.back() > kEps) out.push_back(t);
  }
  return out;
}

// --------------------------------------------------------------------- json

std::string scene_to_json(const SceneGraph& scene) {
  json objs = json::array();
  for (const auto& o : scene.objects) {
    json timeline = json::array();
    for (const auto& e : o.timeline) {
      timeline.push_back({{"kind", to_string(e.kind)},
                          {"start", e.start},
                          {"end", e.end},
                          {"start_pos", {e.start_pos.x, e.start_pos.y}},
                          {"end_pos", {e.end_pos.x, e.end_pos.y}}});
    }
    json containment = json::array();
    for (const auto& ep : o.containment)
      containment.push_back({{"container", ep.container}, {"start", ep.start}, {"end", ep.end}});
    objs.push_back({{"id", o.id},
                    {"shape", to_string(o.attrs.shape)},
                    {"size", to_string(o.attrs.size)},
                    {"color", to_string(o.attrs.color)},
                    {"material", to_string(o.attrs.material)},
                    {"timeline", timeline},
                    {"containment", containment}});
  }
  json root = {{"video_id", scene.video_id}, {"duration", scene.duration}, {"objects", objs}};
  return root.dump(2);
}

SceneGraph scene_from_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("scene json parse error: ") + e.what());
  }
  try {
    SceneGraph scene;
    scene.video_id = root.at("video_id").get<std::string>();
    scene.duration = root.at("duration").get<double>();
    for (const auto& jo : root.at("objects")) {
      SceneObject o;
      o.id = jo.at("id").get<int>();
      o.attrs.shape = shape_from_string(jo.at("shape").get<std::string>());
      o.attrs.size = size_from_string(jo.at("size").get<std::string>());
      o.attrs.color = color_from_string(jo.at("color").get<std::string>());
      o.attrs.material = material_from_string(jo.at("material").get<std::string>());
      for (const auto& je : jo.at("timeline")) {
        ActionEvent e;
        e.kind = action_from_string(je.at("kind").get<std::string>());
        e.start = je.at("start").get<double>();
        e.end = je.at("end").get<double>();
        e.start_pos = {je.at("start_pos")[0].get<double>(), je.at("start_pos")[1].get<double>()};
        e.end_pos = {je.at("end_pos")[0].get<double>(), je.at("end_pos")[1].get<double>()};
        o.timeline.push_back(e);
      }
      for (const auto& jc : jo.at("containment"))
        o.containment.push_back({jc.at("container").get<int>(), jc.at("start").get<double>(),
                                 jc.at("end").get<double>()});
      scene.objects.push_back(std::move(o));
    }
    return scene;
  } catch (const json::exception& e) {
    throw DataError(std::string("scene json schema error: ") + e.what());
  }
}

}  // namespace vgdial
