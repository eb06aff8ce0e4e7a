#pragma once

/*
 * Brute-force reference semantics for the test suite.  Everything here is
 * recomputed from dense time sampling (step 0.01s) or from first principles,
 * deliberately avoiding the analytic event arithmetic inside the library so
 * that a bug there cannot also hide in the checks meant to catch it.
 *
 * The scene generator keeps distinct motion boundaries at least 0.05s apart,
 * so a 0.01s grid always lands several samples strictly inside any
 * positive-measure overlap; grid answers and event-arithmetic answers can
 * only disagree when one of them is wrong.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vgdial/executor.hpp"
#include "vgdial/interval.hpp"
#include "vgdial/scene.hpp"
#include "vgdial/value.hpp"

namespace oracle {

using namespace vgdial;

constexpr double kStep = 0.01;
constexpr double kTiny = 1e-9;

// ------------------------------------------------------------ dense sampling

// action label at one instant, by plain scan of the (gap-free) timeline
inline ActionKind label_at(const SceneObject& obj, double t) {
  for (const auto& e : obj.timeline)
    if (t >= e.start && t < e.end) return e.kind;
  return obj.timeline.empty() ? ActionKind::no_action : obj.timeline.back().kind;
}

inline bool contained_at(const SceneObject& obj, double t) {
  for (const auto& ep : obj.containment)
    if (t > ep.start && t < ep.end) return true;
  return false;
}

// maximal stretch of constant action label; first/last are sample midpoints
struct Run {
  ActionKind kind = ActionKind::no_action;
  double first = 0.0;
  double last = 0.0;
};

struct GridObject {
  int id = -1;
  std::vector<ActionKind> labels;
  std::vector<char> contained;
  std::vector<Run> runs;
};

struct Grid {
  double duration = 0.0;
  std::vector<double> samples;  // midpoints k*step + step/2
  std::vector<GridObject> objects;

  const GridObject& at(int id) const {
    for (const auto& g : objects)
      if (g.id == id) return g;
    throw DataError("grid: unknown object id " + std::to_string(id));
  }
};

inline Grid build_grid(const SceneGraph& scene) {
  Grid g;
  g.duration = scene.duration;
  for (double t = kStep / 2.0; t < scene.duration; t += kStep) g.samples.push_back(t);
  for (const auto& o : scene.objects) {
    GridObject go;
    go.id = o.id;
    for (double t : g.samples) {
      go.labels.push_back(label_at(o, t));
      go.contained.push_back(contained_at(o, t) ? 1 : 0);
    }
    for (std::size_t i = 0; i < go.labels.size(); ++i) {
      if (go.runs.empty() || go.runs.back().kind != go.labels[i])
        go.runs.push_back({go.labels[i], g.samples[i], g.samples[i]});
      else
        go.runs.back().last = g.samples[i];
    }
    g.objects.push_back(std::move(go));
  }
  return g;
}

// run has at least one sample strictly inside (s, e)
inline bool run_touches(const Run& r, double s, double e) {
  return r.first < e && r.last > s;
}

// ----------------------------------------------- action summaries from grid

struct Summary {
  std::vector<ActionKind> seq;
  std::vector<ActionKind> set;
  std::map<ActionKind, int> freq;
};

inline Summary summarize(const Grid& g, int id, double s, double e) {
  Summary out;
  for (const auto& r : g.at(id).runs) {
    if (!is_motion(r.kind) || !run_touches(r, s, e)) continue;
    out.seq.push_back(r.kind);
    out.freq[r.kind] += 1;
  }
  if (out.seq.empty()) {
    out.seq.push_back(ActionKind::no_action);
    out.set.push_back(ActionKind::no_action);
    return out;
  }
  for (ActionKind k : {ActionKind::flying, ActionKind::rotating, ActionKind::sliding})
    if (out.freq.count(k)) out.set.push_back(k);
  return out;
}

inline bool moves_in(const Grid& g, int id, double s, double e) {
  for (const auto& r : g.at(id).runs)
    if (moves_position(r.kind) && run_touches(r, s, e)) return true;
  return false;
}

inline bool hidden_overlaps(const Grid& g, int id, double s, double e) {
  const GridObject& go = g.at(id);
  for (std::size_t i = 0; i < go.contained.size(); ++i)
    if (go.contained[i] && g.samples[i] > s && g.samples[i] < e) return true;
  return false;
}

inline bool hidden_throughout(const Grid& g, int id, double s, double e) {
  const GridObject& go = g.at(id);
  bool any = false;
  for (std::size_t i = 0; i < go.contained.size(); ++i) {
    if (g.samples[i] <= s || g.samples[i] >= e) continue;
    any = true;
    if (!go.contained[i]) return false;
  }
  return any;  // an empty sample set would mean a sub-step interval
}

// ------------------------------------------------------ positions from data

// own linear interpolation over the event waypoints, following containment
inline Vec2 opos(const SceneGraph& scene, int id, double t, int depth = 0) {
  const SceneObject& o = scene.at(id);
  if (depth < 8) {
    for (const auto& ep : o.containment)
      if (t >= ep.start - kTiny && t <= ep.end + kTiny)
        return opos(scene, ep.container, t, depth + 1);
  }
  if (o.timeline.empty()) return {};
  if (t <= o.timeline.front().start) return o.timeline.front().start_pos;
  for (const auto& e : o.timeline) {
    if (t > e.end + kTiny) continue;
    if (!moves_position(e.kind) || e.end - e.start <= kTiny) return e.start_pos;
    double f = (t - e.start) / (e.end - e.start);
    f = std::max(0.0, std::min(1.0, f));
    return {e.start_pos.x + f * (e.end_pos.x - e.start_pos.x),
            e.start_pos.y + f * (e.end_pos.y - e.start_pos.y)};
  }
  return o.timeline.back().end_pos;
}

enum class STri { yes, no, undefined };

inline STri spatial(const SceneGraph& scene, const Grid& g, double s, double e, int mover,
                    int anchor, SpatialRel rel) {
  if (moves_in(g, mover, s, e) && moves_in(g, anchor, s, e)) return STri::undefined;
  if (hidden_overlaps(g, mover, s, e) || hidden_overlaps(g, anchor, s, e))
    return STri::undefined;
  auto cmp = [rel](const Vec2& p, const Vec2& q) {
    switch (rel) {
      case SpatialRel::left: return p.x < q.x - kTiny;
      case SpatialRel::right: return p.x > q.x + kTiny;
      case SpatialRel::front: return p.y < q.y - kTiny;
      case SpatialRel::behind: return p.y > q.y + kTiny;
    }
    return false;
  };
  const bool a = cmp(opos(scene, mover, s), opos(scene, anchor, s));
  const bool b = cmp(opos(scene, mover, e), opos(scene, anchor, e));
  return (a && b) ? STri::yes : STri::no;
}

// --------------------------------------------------- boundaries from labels

// scene-wide action change points, located between adjacent samples whose
// label vector differs; accurate to half a step
inline std::vector<double> change_points(const Grid& g) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < g.samples.size(); ++i) {
    bool change = false;
    for (const auto& go : g.objects)
      if (go.labels[i] != go.labels[i + 1]) change = true;
    if (change) out.push_back((g.samples[i] + g.samples[i + 1]) / 2.0);
  }
  return out;
}

// interval is compositional iff some change point falls strictly inside
inline IntervalKind classify(const Grid& g, double s, double e) {
  for (double b : change_points(g))
    if (b > s && b < e) return IntervalKind::compositional;
  return IntervalKind::atomic;
}

// --------------------------------------------------------- handmade scenes

// one always-idle object sitting at pos
inline SceneObject idle_object(int id, ObjectAttrs attrs, Vec2 pos, double duration) {
  SceneObject o;
  o.id = id;
  o.attrs = attrs;
  o.timeline.push_back({ActionKind::no_action, 0.0, duration, pos, pos});
  return o;
}

struct MotionSpec {
  ActionKind kind = ActionKind::sliding;
  double start = 0.0;
  double end = 0.0;
  Vec2 from;
  Vec2 to;
};

// gap-free timeline from sorted motion specs; idle stretches fill the gaps
// and keep positions continuous
inline SceneObject moving_object(int id, ObjectAttrs attrs, double duration,
                                 std::vector<MotionSpec> motions) {
  SceneObject o;
  o.id = id;
  o.attrs = attrs;
  double t = 0.0;
  Vec2 pos = motions.empty() ? Vec2{} : motions.front().from;
  for (const auto& m : motions) {
    if (m.start > t) o.timeline.push_back({ActionKind::no_action, t, m.start, pos, pos});
    Vec2 to = moves_position(m.kind) ? m.to : m.from;
    o.timeline.push_back({m.kind, m.start, m.end, m.from, to});
    pos = to;
    t = m.end;
  }
  if (t < duration) o.timeline.push_back({ActionKind::no_action, t, duration, pos, pos});
  return o;
}

inline SceneGraph make_scene(double duration, std::vector<SceneObject> objects) {
  SceneGraph s;
  s.video_id = "handmade";
  s.duration = duration;
  s.objects = std::move(objects);
  return s;
}

// ------------------------------------------------------- module test driver

struct ExecOut {
  std::optional<Value> value;
  bool ill = false;
};

// runs one module in isolation: dummy scene nodes stand in for the inputs and
// are pinned to the given values, so any Value can feed any port
inline ExecOut exec_module(const SceneGraph& scene, const StateView* st,
                           const std::string& mod, std::vector<SideValue> side,
                           std::vector<Value> inputs, double min_duration = 0.5) {
  Program p;
  std::map<int, Value> pin;
  std::vector<int> ports;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    p.nodes.push_back({"scene", {}, {}});
    pin.emplace(static_cast<int>(i), inputs[i]);
    ports.push_back(static_cast<int>(i));
  }
  p.nodes.push_back({mod, ports, std::move(side)});
  ExecContext ctx{&scene, st, min_duration};
  ExecResult res = execute_with_overrides(p, ctx, pin);
  ExecOut out;
  if (res.ok())
    out.value = *res.value;
  else
    out.ill = true;
  return out;
}

// ------------------------------------------------------------- value compare

inline std::string dump_value(const Value& v) {
  std::ostringstream os;
  switch (tag_of(v)) {
    case Tag::objects: {
      os << "objects[";
      for (int id : std::get<ObjectList>(v).ids) os << id << " ";
      os << "]";
      break;
    }
    case Tag::object: os << "object " << std::get<ObjectRef>(v).id; break;
    case Tag::interval: {
      const auto& iv = std::get<VideoInterval>(v);
      os << "interval(" << iv.start << ", " << iv.end << ", " << to_string(iv.kind) << ")";
      break;
    }
    case Tag::action: os << to_string(std::get<ActionKind>(v)); break;
    case Tag::action_set: {
      os << "set{";
      for (ActionKind k : std::get<ActionSet>(v).kinds) os << to_string(k) << " ";
      os << "}";
      break;
    }
    case Tag::action_sequence: {
      os << "seq[";
      for (ActionKind k : std::get<ActionSeq>(v).kinds) os << to_string(k) << " ";
      os << "]";
      break;
    }
    case Tag::binary: os << (std::get<BinaryVal>(v).value ? "True" : "False"); break;
    case Tag::integer: os << std::get<IntegerVal>(v).value; break;
    case Tag::color: os << to_string(std::get<Color>(v)); break;
    case Tag::material: os << to_string(std::get<Material>(v)); break;
    case Tag::shape: os << to_string(std::get<Shape>(v)); break;
    case Tag::size: os << to_string(std::get<Size>(v)); break;
    default: os << "<" << to_string(tag_of(v)) << ">"; break;
  }
  return os.str();
}

inline bool same_interval(const VideoInterval& a, const VideoInterval& b) {
  return std::fabs(a.start - b.start) < 1e-7 && std::fabs(a.end - b.end) < 1e-7 &&
         a.kind == b.kind;
}

inline bool same_value(const Value& a, const Value& b) {
  if (tag_of(a) != tag_of(b)) return false;
  switch (tag_of(a)) {
    case Tag::objects: return std::get<ObjectList>(a).ids == std::get<ObjectList>(b).ids;
    case Tag::object: return std::get<ObjectRef>(a).id == std::get<ObjectRef>(b).id;
    case Tag::interval:
      return same_interval(std::get<VideoInterval>(a), std::get<VideoInterval>(b));
    case Tag::action: return std::get<ActionKind>(a) == std::get<ActionKind>(b);
    case Tag::action_set: return std::get<ActionSet>(a).kinds == std::get<ActionSet>(b).kinds;
    case Tag::action_sequence:
      return std::get<ActionSeq>(a).kinds == std::get<ActionSeq>(b).kinds;
    case Tag::binary: return std::get<BinaryVal>(a).value == std::get<BinaryVal>(b).value;
    case Tag::integer: return std::get<IntegerVal>(a).value == std::get<IntegerVal>(b).value;
    case Tag::color: return std::get<Color>(a) == std::get<Color>(b);
    case Tag::material: return std::get<Material>(a) == std::get<Material>(b);
    case Tag::shape: return std::get<Shape>(a) == std::get<Shape>(b);
    case Tag::size: return std::get<Size>(a) == std::get<Size>(b);
    default: return false;
  }
}

// ----------------------------------------------------------- module battery

class Battery {
public:
  explicit Battery(const SceneGraph& scene)
      : scene_(scene), grid_(build_grid(scene)), cps_(change_points(grid_)) {}

  int mismatches() const { return mismatches_; }
  const std::vector<std::string>& examples() const { return examples_; }

  void run_all() {
    check_timestamps();
    check_attribute_modules();
    check_interval_modules();
    check_find_interval();
    check_integer_modules();
    check_state_modules();
  }

private:
  const SceneGraph& scene_;
  Grid grid_;
  std::vector<double> cps_;
  int mismatches_ = 0;
  std::vector<std::string> examples_;

  IntervalKind cls(double s, double e) const {
    for (double b : cps_)
      if (b > s && b < e) return IntervalKind::compositional;
    return IntervalKind::atomic;
  }

  void flag(const std::string& what) {
    ++mismatches_;
    if (examples_.size() < 20)
      examples_.push_back(scene_.video_id + ": " + what);
  }

  void expect_value(const ExecOut& got, const Value& want, const std::string& what) {
    if (got.ill) {
      flag(what + ": ill-posed, oracle expected " + dump_value(want));
      return;
    }
    if (!same_value(*got.value, want))
      flag(what + ": got " + dump_value(*got.value) + ", oracle " + dump_value(want));
  }

  void expect_ill(const ExecOut& got, const std::string& what) {
    if (!got.ill)
      flag(what + ": got " + dump_value(*got.value) + ", oracle expected ill-posed");
  }

  Value all_objects() const {
    ObjectList l;
    for (const auto& o : scene_.objects) l.ids.push_back(o.id);
    return l;
  }

  ExecOut run1(const std::string& mod, std::vector<SideValue> side,
               std::vector<Value> inputs) const {
    return exec_module(scene_, nullptr, mod, std::move(side), std::move(inputs));
  }

  // scene boundaries: analytic timestamps against grid change points
  void check_timestamps() {
    std::vector<double> exact = scene_timestamps(scene_);
    std::vector<double> interior(exact.begin() + 1, exact.end() - 1);
    const std::vector<double>& approx = cps_;
    if (interior.size() != approx.size()) {
      flag("scene_timestamps: " + std::to_string(interior.size()) + " interior vs " +
           std::to_string(approx.size()) + " grid change points");
      return;
    }
    for (std::size_t i = 0; i < interior.size(); ++i)
      if (std::fabs(interior[i] - approx[i]) > kStep)
        flag("scene_timestamps: boundary " + std::to_string(interior[i]) +
             " vs grid " + std::to_string(approx[i]));
  }

  void check_attribute_modules() {
    ExecOut sc = run1("scene", {}, {});
    expect_value(sc, all_objects(), "scene");

    struct Dim {
      const char* mod;
      const char* query;
      std::vector<std::string> values;
    };
    const std::vector<Dim> dims = {
        {"filter_color", "query_color",
         {"gold", "gray", "green", "purple", "red", "cyan", "blue", "brown", "yellow"}},
        {"filter_material", "query_material", {"metal", "rubber"}},
        {"filter_shape", "query_shape", {"cone", "cube", "sphere", "cylinder", "snitch"}},
        {"filter_size", "query_size", {"small", "medium", "large"}},
    };
    for (const auto& d : dims) {
      for (const auto& val : d.values) {
        ObjectList want;
        for (const auto& o : scene_.objects) {
          const auto& a = o.attrs;
          std::string mine = d.mod == std::string("filter_color") ? to_string(a.color)
                             : d.mod == std::string("filter_material") ? to_string(a.material)
                             : d.mod == std::string("filter_shape") ? to_string(a.shape)
                                                                    : to_string(a.size);
          if (mine == val) want.ids.push_back(o.id);
        }
        ExecOut got = run1(d.mod, {val}, {all_objects()});
        expect_value(got, want, std::string(d.mod) + "[" + val + "]");

        ExecOut cnt = run1("count_object", {}, {Value(want)});
        expect_value(cnt, IntegerVal{static_cast<int>(want.ids.size())},
                     "count_object over " + val);
        ExecOut ex = run1("exist", {}, {Value(want)});
        expect_value(ex, BinaryVal{!want.ids.empty()}, "exist over " + val);
        ExecOut uq = run1("unique", {}, {Value(want)});
        if (want.ids.size() == 1)
          expect_value(uq, ObjectRef{want.ids.front()}, "unique over " + val);
        else
          expect_ill(uq, "unique over " + val);
      }
    }

    for (const auto& o : scene_.objects) {
      std::string tag = "object " + std::to_string(o.id);
      expect_value(run1("query_color", {}, {Value(ObjectRef{o.id})}), o.attrs.color,
                   "query_color " + tag);
      expect_value(run1("query_material", {}, {Value(ObjectRef{o.id})}), o.attrs.material,
                   "query_material " + tag);
      expect_value(run1("query_shape", {}, {Value(ObjectRef{o.id})}), o.attrs.shape,
                   "query_shape " + tag);
      expect_value(run1("query_size", {}, {Value(ObjectRef{o.id})}), o.attrs.size,
                   "query_size " + tag);
    }
  }

  void check_one_interval(const VideoInterval& iv) {
    const double s = iv.start, e = iv.end;
    const std::string where =
        " @(" + std::to_string(s) + "," + std::to_string(e) + ")";

    IntervalKind want_kind = cls(s, e);
    if (classify_interval(scene_, s, e) != want_kind)
      flag("classify_interval" + where + ": " + to_string(classify_interval(scene_, s, e)) +
           " vs oracle " + to_string(want_kind));

    // filter_action over the full object list, each qualifier
    for (const std::string& q : {"flying", "rotating", "sliding", "no action", "contained"}) {
      ObjectList want;
      for (const auto& o : scene_.objects) {
        if (q == "contained") {
          if (hidden_throughout(grid_, o.id, s, e)) want.ids.push_back(o.id);
          continue;
        }
        if (hidden_throughout(grid_, o.id, s, e)) continue;  // not observable
        Summary sum = summarize(grid_, o.id, s, e);
        if (q == "no action") {
          if (sum.freq.empty()) want.ids.push_back(o.id);
        } else if (sum.freq.count(action_from_string(q))) {
          want.ids.push_back(o.id);
        }
      }
      ExecOut got = run1("filter_action", {q}, {Value(iv), all_objects()});
      expect_value(got, want, "filter_action[" + q + "]" + where);
    }

    for (const auto& o : scene_.objects) {
      Summary sum = summarize(grid_, o.id, s, e);
      const std::string who = " obj " + std::to_string(o.id) + where;
      Value ref{ObjectRef{o.id}};

      for (const std::string& k : {"flying", "rotating", "sliding"}) {
        auto it = sum.freq.find(action_from_string(k));
        expect_value(run1("count_action", {k}, {Value(iv), ref}),
                     IntegerVal{it == sum.freq.end() ? 0 : it->second},
                     "count_action[" + k + "]" + who);
      }

      expect_value(run1("query_action_set", {}, {Value(iv), ref}), ActionSet{sum.set},
                   "query_action_set" + who);
      expect_value(run1("query_action_sequence", {}, {Value(iv), ref}), ActionSeq{sum.seq},
                   "query_action_sequence" + who);

      // ordinal access into the sequence, including the idle placeholder
      for (const SideValue& ord : std::vector<SideValue>{1, 2, std::string("last")}) {
        ExecOut got = run1("action_by_order", {ord}, {Value(iv), ref});
        int pos = std::holds_alternative<int>(ord) ? std::get<int>(ord)
                                                   : static_cast<int>(sum.seq.size());
        if (pos >= 1 && pos <= static_cast<int>(sum.seq.size()))
          expect_value(got, sum.seq[static_cast<std::size_t>(pos - 1)],
                       "action_by_order" + who);
        else
          expect_ill(got, "action_by_order" + who);
      }

      for (const std::string& f : {"most", "least"}) {
        ExecOut got = run1("action_by_frequency", {f}, {Value(iv), ref});
        if (sum.freq.empty()) {
          expect_ill(got, "action_by_frequency[" + f + "]" + who);
          continue;
        }
        int extreme = f == "most" ? 0 : 1 << 20;
        for (const auto& [k, c] : sum.freq)
          extreme = f == "most" ? std::max(extreme, c) : std::min(extreme, c);
        std::vector<ActionKind> at;
        for (const auto& [k, c] : sum.freq)
          if (c == extreme) at.push_back(k);
        if (at.size() == 1)
          expect_value(got, make_action_set({at.front()}),
                       "action_by_frequency[" + f + "]" + who);
        else
          expect_ill(got, "action_by_frequency[" + f + "]" + who);
      }
      for (int want_count : {1, 2}) {
        ExecOut got = run1("action_by_frequency", {want_count}, {Value(iv), ref});
        std::vector<ActionKind> at;
        for (const auto& [k, c] : sum.freq)
          if (c == want_count) at.push_back(k);
        if (at.empty())
          expect_ill(got, "action_by_frequency[n]" + who);
        else
          expect_value(got, make_action_set(std::move(at)), "action_by_frequency[n]" + who);
      }

      // same-set / same-sequence against every probe
      ObjectList want_set, want_seq;
      for (const auto& other : scene_.objects) {
        if (other.id == o.id || hidden_throughout(grid_, other.id, s, e)) continue;
        Summary os = summarize(grid_, other.id, s, e);
        if (os.set == sum.set) want_set.ids.push_back(other.id);
        if (os.seq == sum.seq) want_seq.ids.push_back(other.id);
      }
      expect_value(run1("same_action_set", {}, {Value(iv), ref}), want_set,
                   "same_action_set" + who);
      expect_value(run1("same_action_sequence", {}, {Value(iv), ref}), want_seq,
                   "same_action_sequence" + who);

      // spatial relations; compositional scopes must refuse
      for (SpatialRel rel :
           {SpatialRel::left, SpatialRel::right, SpatialRel::front, SpatialRel::behind}) {
        ExecOut got = run1("relate_spatial", {to_string(rel)}, {Value(iv), ref});
        if (want_kind == IntervalKind::compositional) {
          expect_ill(got, "relate_spatial[" + to_string(rel) + "]" + who);
          continue;
        }
        ObjectList want;
        for (const auto& other : scene_.objects) {
          if (other.id == o.id) continue;
          if (spatial(scene_, grid_, s, e, other.id, o.id, rel) == STri::yes)
            want.ids.push_back(other.id);
        }
        expect_value(got, want, "relate_spatial[" + to_string(rel) + "]" + who);
      }
    }

    // temporal shifts of this interval
    struct TRCase {
      const char* rel;
      double s, e;
    };
    for (const TRCase& c : {TRCase{"before", 0.0, s}, TRCase{"after", e, scene_.duration},
                            TRCase{"during", s, e}}) {
      ExecOut got = run1("relate_temporal", {c.rel}, {Value(iv)});
      if (c.e - c.s < 0.5) {
        expect_ill(got, std::string("relate_temporal[") + c.rel + "]" + where);
      } else {
        VideoInterval want{c.s, c.e, cls(c.s, c.e)};
        expect_value(got, want, std::string("relate_temporal[") + c.rel + "]" + where);
      }
    }
  }

  void check_interval_modules() {
    std::vector<VideoInterval> ivs = enumerate_intervals(scene_, 0.5);
    for (const auto& iv : ivs) check_one_interval(iv);

    // implicit whole-video operand equals the explicit one
    ExecOut imp = run1("filter_action", {"flying"}, {all_objects()});
    VideoInterval whole{0.0, scene_.duration, cls(0.0, scene_.duration)};
    ExecOut exp = run1("filter_action", {"flying"}, {Value(whole), all_objects()});
    if (imp.ill != exp.ill ||
        (!imp.ill && !same_value(*imp.value, *exp.value)))
      flag("filter_action: implicit whole-video operand differs from explicit");

    // pairwise intersections, including abutting (empty) ones
    const std::size_t n = std::min<std::size_t>(ivs.size(), 8);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double s = std::max(ivs[i].start, ivs[j].start);
        double e = std::min(ivs[i].end, ivs[j].end);
        ExecOut got = run1("union_interval", {}, {Value(ivs[i]), Value(ivs[j])});
        if (e - s > 0.0)
          expect_value(got, VideoInterval{s, e, cls(s, e)}, "union_interval");
        else
          expect_ill(got, "union_interval (disjoint)");
      }
    }
  }

  void check_find_interval() {
    for (const auto& o : scene_.objects) {
      for (const std::string& k : {"flying", "rotating", "sliding"}) {
        std::vector<Run> hits;
        for (const auto& r : grid_.at(o.id).runs)
          if (r.kind == action_from_string(k)) hits.push_back(r);

        auto expect_hit = [&](const ExecOut& got, const Run& run, const std::string& what) {
          if (got.ill) {
            flag(what + ": ill-posed, oracle found the event");
            return;
          }
          const auto& iv = std::get<VideoInterval>(*got.value);
          // run samples are midpoints: the true boundary sits within a step
          if (run.first < iv.start || run.first > iv.start + kStep ||
              run.last > iv.end || run.last < iv.end - kStep)
            flag(what + ": " + dump_value(*got.value) + " does not bracket run [" +
                 std::to_string(run.first) + ", " + std::to_string(run.last) + "]");
          else if (iv.kind != cls(iv.start, iv.end))
            flag(what + ": kind " + to_string(iv.kind));
        };

        std::string tag = "find_interval[" + k + "] obj " + std::to_string(o.id);
        ExecOut solo = run1("find_interval", {k}, {Value(ObjectRef{o.id})});
        if (hits.size() == 1)
          expect_hit(solo, hits.front(), tag);
        else
          expect_ill(solo, tag + " (no unique event)");

        for (int ord = 1; ord <= 3; ++ord) {
          ExecOut got = run1("find_interval", {k, ord}, {Value(ObjectRef{o.id})});
          if (ord <= static_cast<int>(hits.size()))
            expect_hit(got, hits[static_cast<std::size_t>(ord - 1)],
                       tag + " #" + std::to_string(ord));
          else
            expect_ill(got, tag + " #" + std::to_string(ord));
        }
        ExecOut last = run1("find_interval", {k, std::string("last")}, {Value(ObjectRef{o.id})});
        if (!hits.empty())
          expect_hit(last, hits.back(), tag + " #last");
        else
          expect_ill(last, tag + " #last");
      }
    }
  }

  void check_integer_modules() {
    const int pairs[][2] = {{0, 0}, {0, 1}, {2, 1}, {3, 3}, {1, 4}};
    for (const auto& p : pairs) {
      Value a{IntegerVal{p[0]}}, b{IntegerVal{p[1]}};
      expect_value(run1("greater_than", {}, {a, b}), BinaryVal{p[0] > p[1]}, "greater_than");
      expect_value(run1("less_than", {}, {a, b}), BinaryVal{p[0] < p[1]}, "less_than");
      expect_value(run1("equal_integer", {}, {a, b}), BinaryVal{p[0] == p[1]},
                   "equal_integer");
    }

    Value s1{make_action_set({ActionKind::flying, ActionKind::sliding})};
    Value s2{make_action_set({ActionKind::sliding, ActionKind::flying})};
    Value s3{make_action_set({ActionKind::flying})};
    expect_value(run1("equal_action", {}, {s1, s2}), BinaryVal{true}, "equal_action set");
    expect_value(run1("equal_action", {}, {s1, s3}), BinaryVal{false}, "equal_action set");
    Value q1{ActionSeq{{ActionKind::flying, ActionKind::flying}}};
    Value q2{ActionSeq{{ActionKind::flying, ActionKind::flying}}};
    Value q3{ActionSeq{{ActionKind::flying, ActionKind::sliding}}};
    expect_value(run1("equal_action", {}, {q1, q2}), BinaryVal{true}, "equal_action seq");
    expect_value(run1("equal_action", {}, {q1, q3}), BinaryVal{false}, "equal_action seq");
  }

  void check_state_modules() {
    std::vector<int> ids;
    for (const auto& o : scene_.objects) ids.push_back(o.id);

    StateView st;
    st.has_last_turn = true;
    st.tracker_ids = ids;
    st.last_focal_ids = {ids.front()};
    st.last_interval = VideoInterval{0.0, scene_.duration, IntervalKind::compositional};
    st.last_anchor_interval = VideoInterval{0.0, 1.0, IntervalKind::atomic};

    auto run_st = [&](const StateView* view, const std::string& mod,
                      std::vector<SideValue> side) {
      return exec_module(scene_, view, mod, std::move(side), {});
    };

    expect_value(run_st(&st, "refer_object", {"it"}), ObjectList{{ids.front()}},
                 "refer_object[it]");
    expect_value(run_st(&st, "refer_object", {"its"}), ObjectList{{ids.front()}},
                 "refer_object[its]");
    expect_value(run_st(&st, "refer_object", {"them"}), ObjectList{{ids.front()}},
                 "refer_object[them]");
    expect_value(run_st(&st, "track_object", {}), ObjectList{ids}, "track_object");
    expect_value(run_st(&st, "track_interval", {}), *st.last_interval, "track_interval");
    expect_value(run_st(&st, "refer_interval", {}), *st.last_anchor_interval,
                 "refer_interval");

    StateView multi = st;
    multi.last_focal_ids = ids;
    expect_ill(run_st(&multi, "refer_object", {"it"}), "refer_object[it] over several");
    expect_value(run_st(&multi, "refer_object", {"them"}), ObjectList{ids},
                 "refer_object[them]");

    StateView bare;
    bare.has_last_turn = true;
    expect_ill(run_st(&bare, "refer_object", {"it"}), "refer_object without focals");
    expect_ill(run_st(&bare, "refer_interval", {}), "refer_interval without anchor");
    expect_ill(run_st(&bare, "track_interval", {}), "track_interval without interval");
    expect_value(run_st(&bare, "track_object", {}), ObjectList{}, "track_object empty");

    for (const char* mod : {"refer_object", "track_object", "refer_interval",
                            "track_interval"}) {
      std::vector<SideValue> side;
      if (mod == std::string("refer_object")) side.push_back(std::string("it"));
      expect_ill(run_st(nullptr, mod, std::move(side)),
                 std::string(mod) + " without a previous turn");
    }
  }
};

// convenience wrapper used by both the unit suite and the acceptance gate
inline int run_battery(const SceneGraph& scene, std::vector<std::string>* examples) {
  Battery b(scene);
  b.run_all();
  if (examples)
    examples->insert(examples->end(), b.examples().begin(), b.examples().end());
  return b.mismatches();
}

}  // namespace oracle
