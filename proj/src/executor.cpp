#include "vgdial/executor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

namespace vgdial {

namespace {

constexpr double kEps = 1e-9;

enum class Mod {
  count_object, count_action, exist, filter_color, filter_material, filter_shape,
  filter_size, filter_action, same_action_set, same_action_sequence, unique, scene,
  find_interval, union_interval, relate_spatial, relate_temporal, greater_than,
  less_than, equal_integer, refer_object, track_object, refer_interval, track_interval,
  query_action_set, query_action_sequence, action_by_frequency, action_by_order,
  equal_action, query_color, query_material, query_shape, query_size
};

const std::vector<std::pair<std::string, Mod>>& module_table() {
  static const std::vector<std::pair<std::string, Mod>> t = {
      {"count_object", Mod::count_object},
      {"count_action", Mod::count_action},
      {"exist", Mod::exist},
      {"filter_color", Mod::filter_color},
      {"filter_material", Mod::filter_material},
      {"filter_shape", Mod::filter_shape},
      {"filter_size", Mod::filter_size},
      {"filter_action", Mod::filter_action},
      {"same_action_set", Mod::same_action_set},
      {"same_action_sequence", Mod::same_action_sequence},
      {"unique", Mod::unique},
      {"scene", Mod::scene},
      {"find_interval", Mod::find_interval},
      {"union_interval", Mod::union_interval},
      {"relate_spatial", Mod::relate_spatial},
      {"relate_temporal", Mod::relate_temporal},
      {"greater_than", Mod::greater_than},
      {"less_than", Mod::less_than},
      {"equal_integer", Mod::equal_integer},
      {"refer_object", Mod::refer_object},
      {"track_object", Mod::track_object},
      {"refer_interval", Mod::refer_interval},
      {"track_interval", Mod::track_interval},
      {"query_action_set", Mod::query_action_set},
      {"query_action_sequence", Mod::query_action_sequence},
      {"action_by_frequency", Mod::action_by_frequency},
      {"action_by_order", Mod::action_by_order},
      {"equal_action", Mod::equal_action},
      {"query_color", Mod::query_color},
      {"query_material", Mod::query_material},
      {"query_shape", Mod::query_shape},
      {"query_size", Mod::query_size},
  };
  return t;
}

Mod module_id(const std::string& name) {
  static const std::unordered_map<std::string, Mod> index = [] {
    std::unordered_map<std::string, Mod> m;
    for (const auto& [n, id] : module_table()) m.emplace(n, id);
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) throw TypeMismatchError("unknown module: " + name);
  return it->second;
}

struct IllPosed {
  std::string reason;
};

// evaluation helpers -------------------------------------------------------

void need(bool cond, const std::string& msg) {
  if (!cond) throw TypeMismatchError(msg);
}

// side values may be ints (ordinals, counts) or strings; the text form of a
// program cannot tell "2" from 2, so both spellings must behave the same
std::string side_str(const ProgramNode& n, std::size_t i) {
  need(i < n.side.size(), n.module + ": missing side value");
  if (std::holds_alternative<int>(n.side[i]))
    return std::to_string(std::get<int>(n.side[i]));
  return std::get<std::string>(n.side[i]);
}

struct Eval {
  const ExecContext& ctx;
  std::vector<Value>& vals;

  const SceneGraph& scene() const { return *ctx.scene; }

  const Value& in(const ProgramNode& n, std::size_t i) const {
    need(i < n.inputs.size(), n.module + ": missing input");
    return vals[static_cast<std::size_t>(n.inputs[static_cast<std::size_t>(i)])];
  }

  template <typename T>
  const T& in_as(const ProgramNode& n, std::size_t i, Tag want) const {
    const Value& v = in(n, i);
    need(tag_of(v) == want, n.module + ": input " + std::to_string(i) + " must be " +
                                to_string(want) + ", got " + to_string(tag_of(v)));
    return std::get<T>(v);
  }

  // interval-consuming modules: explicit leading Interval input or the whole
  // current video when omitted
  VideoInterval interval_operand(const ProgramNode& n, std::size_t expected_rest) const {
    if (n.inputs.size() == expected_rest + 1)
      return in_as<VideoInterval>(n, 0, Tag::interval);
    need(n.inputs.size() == expected_rest, n.module + ": wrong arity");
    const double d = scene().duration;
    return {0.0, d, classify_interval(scene(), 0.0, d)};
  }

  std::size_t rest_base(const ProgramNode& n, std::size_t expected_rest) const {
    return n.inputs.size() == expected_rest + 1 ? 1 : 0;
  }

  const StateView& state_or_illposed() const {
    if (!ctx.state || !ctx.state->has_last_turn) throw IllPosed{"no previous dialogue turn"};
    return *ctx.state;
  }

  bool fully_contained(int id, const VideoInterval& iv) const {
    return contained_throughout(scene().at(id), iv.start, iv.end);
  }

  Value eval(const ProgramNode& n);
};

ObjectList filter_attr(const SceneGraph& scene, const ObjectList& objs,
                       const std::function<bool(const ObjectAttrs&)>& pred) {
  ObjectList out;
  for (int id : objs.ids)
    if (pred(scene.at(id).attrs)) out.ids.push_back(id);
  return out;
}

Value Eval::eval(const ProgramNode& n) {
  switch (module_id(n.module)) {
    case Mod::scene: {
      need(n.inputs.empty(), "scene takes no inputs");
      ObjectList all;
      for (const auto& o : scene().objects) all.ids.push_back(o.id);
      return all;
    }

    case Mod::filter_color: {
      Color want = color_from_string(side_str(n, 0));
      return filter_attr(scene(), in_as<ObjectList>(n, 0, Tag::objects),
                         [want](const ObjectAttrs& a) { return a.color == want; });
    }
    case Mod::filter_material: {
      Material want = material_from_string(side_str(n, 0));
      return filter_attr(scene(), in_as<ObjectList>(n, 0, Tag::objects),
                         [want](const ObjectAttrs& a) { return a.material == want; });
    }
    case Mod::filter_shape: {
      Shape want = shape_from_string(side_str(n, 0));
      return filter_attr(scene(), in_as<ObjectList>(n, 0, Tag::objects),
                         [want](const ObjectAttrs& a) { return a.shape == want; });
    }
    case Mod::filter_size: {
      Size want = size_from_string(side_str(n, 0));
      return filter_attr(scene(), in_as<ObjectList>(n, 0, Tag::objects),
                         [want](const ObjectAttrs& a) { return a.size == want; });
    }

    case Mod::filter_action: {
      const VideoInterval iv = interval_operand(n, 1);
      const auto& objs = in_as<ObjectList>(n, rest_base(n, 1), Tag::objects);
      const std::string& what = side_str(n, 0);
      ObjectList out;
      if (what == "contained") {
        for (int id : objs.ids)
          if (fully_contained(id, iv)) out.ids.push_back(id);
        return out;
      }
      ActionKind kind = action_from_string(what);
      for (int id : objs.ids) {
        if (fully_contained(id, iv)) continue;  // hidden objects are not observable
        ActionSummary s = summarize_actions(scene(), iv, id);
        if (kind == ActionKind::no_action) {
          if (s.frequency.empty()) out.ids.push_back(id);
        } else if (s.frequency.count(kind)) {
          out.ids.push_back(id);
        }
      }
      return out;
    }

    case Mod::same_action_set:
    case Mod::same_action_sequence: {
      const bool by_set = module_id(n.module) == Mod::same_action_set;
      const VideoInterval iv = interval_operand(n, 1);
      const int probe = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      const ActionSummary ps = summarize_actions(scene(), iv, probe);
      ObjectList out;
      for (const auto& o : scene().objects) {
        if (o.id == probe) continue;  // "other things"
        if (fully_contained(o.id, iv)) continue;
        ActionSummary s = summarize_actions(scene(), iv, o.id);
        const bool match = by_set ? s.action_set == ps.action_set
                                  : s.action_sequence == ps.action_sequence;
        if (match) out.ids.push_back(o.id);
      }
      return out;
    }

    case Mod::unique: {
      const auto& objs = in_as<ObjectList>(n, 0, Tag::objects);
      if (objs.ids.size() != 1)
        throw IllPosed{"unique: description matches " + std::to_string(objs.ids.size()) +
                       " objects"};
      return ObjectRef{objs.ids.front()};
    }

    case Mod::count_object:
      return IntegerVal{static_cast<int>(in_as<ObjectList>(n, 0, Tag::objects).ids.size())};

    case Mod::exist:
      return BinaryVal{!in_as<ObjectList>(n, 0, Tag::objects).ids.empty()};

    case Mod::count_action: {
      const VideoInterval iv = interval_operand(n, 1);
      const int id = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      ActionKind kind = action_from_string(side_str(n, 0));
      ActionSummary s = summarize_actions(scene(), iv, id);
      auto it = s.frequency.find(kind);
      return IntegerVal{it == s.frequency.end() ? 0 : it->second};
    }

    case Mod::query_action_set: {
      const VideoInterval iv = interval_operand(n, 1);
      const int id = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      return ActionSet{summarize_actions(scene(), iv, id).action_set};
    }
    case Mod::query_action_sequence: {
      const VideoInterval iv = interval_operand(n, 1);
      const int id = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      return ActionSeq{summarize_actions(scene(), iv, id).action_sequence};
    }

    case Mod::action_by_frequency: {
      const VideoInterval iv = interval_operand(n, 1);
      const int id = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      ActionSummary s = summarize_actions(scene(), iv, id);
      const std::string& f = side_str(n, 0);
      if (f == "least" || f == "most") {
        if (s.frequency.empty())
          throw IllPosed{"action_by_frequency: object performs no actions"};
        int best = 0;
        ActionKind best_kind = ActionKind::no_action;
        int ties = 0;
        for (const auto& [kind, cnt] : s.frequency) {
          const bool better = (best_kind == ActionKind::no_action) ||
                              (f == "most" ? cnt > best : cnt < best);
          if (better) {
            best = cnt;
            best_kind = kind;
            ties = 1;
          } else if (cnt == best) {
            ++ties;
          }
        }
        if (ties != 1) throw IllPosed{"action_by_frequency: no unique " + f + " action"};
        return make_action_set({best_kind});
      }
      // literal occurrence count
      int want = 0;
      try {
        want = std::stoi(f);
      } catch (...) {
        throw TypeMismatchError("action_by_frequency: bad frequency literal " + f);
      }
      if (want < 1) throw TypeMismatchError("action_by_frequency: count must be positive");
      std::vector<ActionKind> kinds;
      for (const auto& [kind, cnt] : s.frequency)
        if (cnt == want) kinds.push_back(kind);
      if (kinds.empty())
        throw IllPosed{"action_by_frequency: nothing performed exactly " + f + " times"};
      return make_action_set(std::move(kinds));
    }

    case Mod::action_by_order: {
      const VideoInterval iv = interval_operand(n, 1);
      const int id = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      const auto seq = summarize_actions(scene(), iv, id).action_sequence;
      const std::string& o = side_str(n, 0);
      int pos;
      if (o == "last") {
        pos = static_cast<int>(seq.size());
      } else {
        try {
          pos = std::stoi(o);
        } catch (...) {
          throw TypeMismatchError("action_by_order: bad order literal " + o);
        }
      }
      if (pos < 1 || pos > static_cast<int>(seq.size()))
        throw IllPosed{"action_by_order: no " + o + " action in interval"};
      return seq[static_cast<std::size_t>(pos - 1)];
    }

    case Mod::find_interval: {
      const int id = in_as<ObjectRef>(n, 0, Tag::object).id;
      ActionKind kind = action_from_string(side_str(n, 0));
      std::vector<const ActionEvent*> hits;
      for (const auto& e : scene().at(id).timeline)
        if (e.kind == kind && e.end - e.start > kEps) hits.push_back(&e);
      if (hits.empty()) throw IllPosed{"find_interval: object never performs the action"};
      const ActionEvent* pick = nullptr;
      if (n.side.size() < 2) {
        if (hits.size() != 1)
          throw IllPosed{"find_interval: ambiguous event reference"};
        pick = hits.front();
      } else {
        const std::string& ord = side_str(n, 1);
        if (ord == "last") {
          pick = hits.back();
        } else {
          int k = 0;
          try {
            k = std::stoi(ord);
          } catch (...) {
            throw TypeMismatchError("find_interval: bad ordinal " + ord);
          }
          if (k < 1 || k > static_cast<int>(hits.size()))
            throw IllPosed{"find_interval: fewer than " + ord + " occurrences"};
          pick = hits[static_cast<std::size_t>(k - 1)];
        }
      }
      return VideoInterval{pick->start, pick->end,
                           classify_interval(scene(), pick->start, pick->end)};
    }

    case Mod::union_interval: {
      const auto& a = in_as<VideoInterval>(n, 0, Tag::interval);
      const auto& b = in_as<VideoInterval>(n, 1, Tag::interval);
      const double s = std::max(a.start, b.start);
      const double e = std::min(a.end, b.end);
      if (e - s <= kEps) throw IllPosed{"union_interval: intervals do not overlap"};
      return VideoInterval{s, e, classify_interval(scene(), s, e)};
    }

    case Mod::relate_temporal: {
      const auto& base = in_as<VideoInterval>(n, 0, Tag::interval);
      TemporalRel rel = temporal_from_string(side_str(n, 0));
      double s = base.start, e = base.end;
      switch (rel) {
        case TemporalRel::during: break;
        case TemporalRel::before: s = 0.0; e = base.start; break;
        case TemporalRel::after: s = base.end; e = scene().duration; break;
      }
      if (e - s < ctx.min_duration - kEps)
        throw IllPosed{"relate_temporal: derived interval shorter than minimum duration"};
      return VideoInterval{s, e, classify_interval(scene(), s, e)};
    }

    case Mod::relate_spatial: {
      const VideoInterval iv = interval_operand(n, 1);
      const int anchor = in_as<ObjectRef>(n, rest_base(n, 1), Tag::object).id;
      SpatialRel rel = spatial_from_string(side_str(n, 0));
      ObjectList out;
      try {
        for (const auto& o : scene().objects) {
          if (o.id == anchor) continue;
          if (holds_spatial(scene(), iv, o.id, anchor, rel) == Tri::yes)
            out.ids.push_back(o.id);
        }
      } catch (const IntervalKindError& e) {
        throw IllPosed{e.what()};  // spatial reasoning needs an atomic span
      }
      return out;
    }

    case Mod::greater_than:
      return BinaryVal{in_as<IntegerVal>(n, 0, Tag::integer).value >
                       in_as<IntegerVal>(n, 1, Tag::integer).value};
    case Mod::less_than:
      return BinaryVal{in_as<IntegerVal>(n, 0, Tag::integer).value <
                       in_as<IntegerVal>(n, 1, Tag::integer).value};
    case Mod::equal_integer:
      return BinaryVal{in_as<IntegerVal>(n, 0, Tag::integer).value ==
                       in_as<IntegerVal>(n, 1, Tag::integer).value};

    case Mod::equal_action: {
      const Value& a = in(n, 0);
      const Value& b = in(n, 1);
      if (tag_of(a) == Tag::action_set && tag_of(b) == Tag::action_set)
        return BinaryVal{std::get<ActionSet>(a).kinds == std::get<ActionSet>(b).kinds};
      if (tag_of(a) == Tag::action_sequence && tag_of(b) == Tag::action_sequence)
        return BinaryVal{std::get<ActionSeq>(a).kinds == std::get<ActionSeq>(b).kinds};
      throw TypeMismatchError("equal_action: operands must both be sets or both sequences");
    }

    case Mod::query_color: return scene().at(in_as<ObjectRef>(n, 0, Tag::object).id).attrs.color;
    case Mod::query_material:
      return scene().at(in_as<ObjectRef>(n, 0, Tag::object).id).attrs.material;
    case Mod::query_shape: return scene().at(in_as<ObjectRef>(n, 0, Tag::object).id).attrs.shape;
    case Mod::query_size: return scene().at(in_as<ObjectRef>(n, 0, Tag::object).id).attrs.size;

    case Mod::refer_object: {
      const StateView& st = state_or_illposed();
      const std::string& word = side_str(n, 0);
      if (st.last_focal_ids.empty())
        throw IllPosed{"refer_object: last turn mentioned no objects"};
      if (word == "it" || word == "its") {
        if (st.last_focal_ids.size() != 1)
          throw IllPosed{"refer_object: pronoun is ambiguous"};
        return ObjectList{{st.last_focal_ids.front()}};
      }
      if (word == "them") return ObjectList{st.last_focal_ids};
      throw TypeMismatchError("refer_object: unknown reference word " + word);
    }

    case Mod::track_object: {
      const StateView& st = state_or_illposed();
      return ObjectList{st.tracker_ids};
    }

    case Mod::refer_interval: {
      const StateView& st = state_or_illposed();
      if (!st.last_anchor_interval)
        throw IllPosed{"refer_interval: last turn mentioned no event"};
      return *st.last_anchor_interval;
    }

    case Mod::track_interval: {
      const StateView& st = state_or_illposed();
      if (!st.last_interval) throw IllPosed{"track_interval: no previous interval"};
      return *st.last_interval;
    }
  }
  throw TypeMismatchError("unhandled module: " + n.module);
}

ExecResult run(const Program& p, const ExecContext& ctx,
               const std::map<int, Value>* overrides) {
  need(ctx.scene != nullptr, "execution context has no scene");
  std::string why;
  if (!program_well_formed(p, &why)) throw TypeMismatchError("malformed program: " + why);

  ExecResult res;
  Eval ev{ctx, res.node_values};
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    if (overrides) {
      auto it = overrides->find(static_cast<int>(i));
      if (it != overrides->end()) {
        res.node_values.push_back(it->second);
        continue;
      }
    }
    try {
      res.node_values.push_back(ev.eval(p.nodes[i]));
    } catch (const IllPosed& ip) {
      res.ill_posed = ip.reason;
      return res;
    }
  }
  res.value = res.node_values.back();
  return res;
}

}  // namespace

ExecResult execute(const Program& p, const ExecContext& ctx) { return run(p, ctx, nullptr); }

ExecResult execute_with_overrides(const Program& p, const ExecContext& ctx,
                                  const std::map<int, Value>& overrides) {
  return run(p, ctx, &overrides);
}

std::vector<int> object_outputs(const std::vector<Value>& trace) {
  std::vector<int> out;
  for (const auto& v : trace) {
    if (tag_of(v) != Tag::object) continue;
    int id = std::get<ObjectRef>(v).id;
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

std::optional<VideoInterval> anchor_interval_of(const Program& p,
                                                const std::vector<Value>& trace) {
  std::optional<VideoInterval> anchor;
  for (std::size_t i = 0; i < trace.size() && i < p.nodes.size(); ++i) {
    const std::string& m = p.nodes[i].module;
    if (m == "find_interval" || m == "refer_interval")
      anchor = std::get<VideoInterval>(trace[i]);
  }
  return anchor;
}

bool is_known_module(const std::string& name) {
  for (const auto& [n, id] : module_table())
    if (n == name) return true;
  return false;
}

const std::vector<std::string>& all_module_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [n, id] : module_table()) out.push_back(n);
    return out;
  }();
  return names;
}

}  // namespace vgdial
