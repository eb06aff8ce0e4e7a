#include "vgdial/templates.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>
#include "vgdial/executor.hpp"
#include "vgdial/util.hpp"
#include "vgdial/value.hpp"

namespace vgdial {

using nlohmann::json;

std::string to_string(IntervalClass c) {
  switch (c) {
    case IntervalClass::atomic_spatial: return "atomic_spatial";
    case IntervalClass::atomic_nonspatial: return "atomic_nonspatial";
    case IntervalClass::compositional: return "compositional";
    case IntervalClass::none: return "none";
  }
  return "none";
}

IntervalClass interval_class_from_string(const std::string& s) {
  if (s == "atomic_spatial") return IntervalClass::atomic_spatial;
  if (s == "atomic_nonspatial") return IntervalClass::atomic_nonspatial;
  if (s == "compositional") return IntervalClass::compositional;
  if (s == "none") return IntervalClass::none;
  throw DataError("unknown interval class: " + s);
}

std::string realize_pattern(const std::string& pattern,
                            const std::map<std::string, std::string>& bindings) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '<') {
      out += pattern[i++];
      continue;
    }
    std::size_t j = pattern.find('>', i);
    if (j == std::string::npos) throw DataError("unterminated slot in pattern: " + pattern);
    std::string slot = pattern.substr(i + 1, j - i - 1);
    auto it = bindings.find(slot);
    if (it == bindings.end()) throw UnboundSlotError(slot);
    out += it->second;
    i = j + 1;
  }
  return out;
}

std::string realize_text(const TemplateDef& t, int variant,
                         const std::map<std::string, std::string>& bindings) {
  if (variant < 0 || variant >= static_cast<int>(t.text.size()))
    throw DataError("template " + t.id + ": no text variant " + std::to_string(variant));
  return realize_pattern(t.text[static_cast<std::size_t>(variant)], bindings);
}

TemplateRegistry TemplateRegistry::load(const std::string& path) {
  TemplateRegistry reg;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("templates file " + path + ": " + e.what());
  }
  try {
    for (const auto& jt : j.at("templates")) {
      TemplateDef t;
      t.id = jt.at("id").get<std::string>();
      t.type = question_type_from_string(jt.at("question_type").get<std::string>());
      t.sub_type = jt.at("sub_type").get<std::string>();
      t.interval_class = interval_class_from_string(jt.at("interval").get<std::string>());
      t.answer_kind = jt.at("answer_kind").get<std::string>();
      for (const auto& p : jt.at("text")) t.text.push_back(p.get<std::string>());
      if (t.text.empty()) throw DataError("template " + t.id + " has no text patterns");
      if (reg.index_.count(t.id)) throw DataError("duplicate template id " + t.id);
      reg.index_[t.id] = static_cast<int>(reg.templates_.size());
      reg.templates_.push_back(std::move(t));
    }
    for (const auto& [key, val] : j.at("transfer_phrases").items()) {
      auto& dst = reg.transfer_[key];
      for (const auto& p : val) dst.push_back(p.get<std::string>());
    }
    for (const auto& [key, val] : j.at("lexicon").items()) {
      if (val.is_array()) {
        auto& dst = reg.plain_lex_[key];
        for (const auto& w : val) dst.push_back(w.get<std::string>());
      } else {
        auto& grp = reg.group_lex_[key];
        for (const auto& [k2, v2] : val.items())
          for (const auto& w : v2) grp[k2].push_back(w.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw DataError("templates file " + path + ": " + e.what());
  }
  if (reg.templates_.empty()) throw DataError("templates file " + path + " defines no templates");
  return reg;
}

const TemplateDef& TemplateRegistry::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("unknown template id: " + id);
  return templates_[static_cast<std::size_t>(it->second)];
}

bool TemplateRegistry::has(const std::string& id) const { return index_.count(id) > 0; }

const std::vector<std::string>& TemplateRegistry::transfer_phrases(const std::string& kind) const {
  auto it = transfer_.find(kind);
  if (it == transfer_.end()) throw DataError("no transfer phrases of kind " + kind);
  return it->second;
}

const std::vector<std::string>& TemplateRegistry::lex(const std::string& group,
                                                      const std::string& key) const {
  auto g = group_lex_.find(group);
  if (g == group_lex_.end()) throw DataError("no lexicon group " + group);
  auto it = g->second.find(key);
  if (it == g->second.end()) throw DataError("lexicon group " + group + " has no entry " + key);
  return it->second;
}

const std::vector<std::string>& TemplateRegistry::lex(const std::string& group) const {
  auto it = plain_lex_.find(group);
  if (it == plain_lex_.end()) throw DataError("no lexicon list " + group);
  return it->second;
}

std::vector<std::string> supported_answers(const TemplateDef& t) {
  if (t.answer_kind == "binary") return {"True", "False"};
  if (t.answer_kind == "integer") {
    // the balance contract only covers counts the generator can actually
    // steer toward; single-object action counts over one scope top out at 2,
    // containment counts at 1
    if (t.id == "ac_comp") return {"0", "1", "2"};
    if (t.id == "oc_atomic_contained") return {"0", "1"};
    return {"0", "1", "2", "3"};
  }
  if (t.answer_kind == "action") return {"flying", "rotating", "sliding"};
  if (t.answer_kind == "action_set") {
    if (t.id == "aq_freq") return {"flying", "rotating", "sliding"};
    // an atomic scope pins one action at a time, so multi-action sets only
    // arise over compositional scopes
    if (t.interval_class != IntervalClass::compositional)
      return {"no action", "flying", "rotating", "sliding"};
    return {"no action",      "flying",         "rotating",
            "sliding",        "flying,rotating", "flying,sliding",
            "rotating,sliding"};
  }
  if (t.answer_kind == "size") return {"small", "medium", "large"};
  if (t.answer_kind == "color")
    return {"gold", "gray", "green", "purple", "red", "cyan", "blue", "brown", "yellow"};
  if (t.answer_kind == "material") return {"metal", "rubber"};
  if (t.answer_kind == "shape") return {"cone", "cube", "sphere", "cylinder", "snitch"};
  throw DataError("template " + t.id + ": unknown answer kind " + t.answer_kind);
}

namespace {

// word sampling over the registry lexicon
struct WordPick {
  const TemplateRegistry& reg;
  Rng& rng;

  std::string from(const std::vector<std::string>& v) {
    return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(v.size()) - 1))];
  }
  std::string group(const std::string& g, const std::string& k) { return from(reg.lex(g, k)); }
  std::string plain(const std::string& g) { return from(reg.lex(g)); }
};

constexpr int kSize = 0, kColor = 1, kMaterial = 2, kShape = 3;

std::string attr_value(const ObjectAttrs& a, int kind) {
  switch (kind) {
    case kSize: return to_string(a.size);
    case kColor: return to_string(a.color);
    case kMaterial: return to_string(a.material);
    default: return to_string(a.shape);
  }
}

const char* filter_module(int kind) {
  switch (kind) {
    case kSize: return "filter_size";
    case kColor: return "filter_color";
    case kMaterial: return "filter_material";
    default: return "filter_shape";
  }
}

// does the object carry this attribute value (any kind)?
bool has_attr_value(const ObjectAttrs& a, const std::string& v) {
  for (int k = 0; k < 4; ++k)
    if (attr_value(a, k) == v) return true;
  return false;
}

bool has_all_attr_values(const ObjectAttrs& a, const std::vector<std::string>& vs) {
  for (const auto& v : vs)
    if (!has_attr_value(a, v)) return false;
  return true;
}

// A noun phrase that picks out one object, with the filter chain realizing it.
struct Desc {
  std::vector<std::pair<std::string, std::string>> filters;  // module, value
  std::string noun;                                          // without article
  std::vector<std::string> attrs;                            // canonical values
};

std::string surface_attr(WordPick& w, int kind, const std::string& value, bool plural) {
  switch (kind) {
    case kSize: return w.group("size", value);
    case kColor: return value;
    case kMaterial: return w.group("material", value);
    default: return w.group(plural ? "shape_plural" : "shape_noun", value);
  }
}

// Minimal-ish unique description of `target` within `pool`, optionally barred
// from using one attribute kind (a question about an attribute must not state
// it).  extra_prob occasionally pads the description with redundant values.
std::optional<Desc> describe_unique(const SceneGraph& scene, const std::vector<int>& pool,
                                    int target, WordPick& w, int exclude_kind,
                                    double extra_prob) {
  const SceneObject* t = scene.find(target);
  if (!t) return std::nullopt;
  std::vector<int> kinds;
  for (int k = 0; k < 4; ++k)
    if (k != exclude_kind) kinds.push_back(k);

  std::vector<std::vector<int>> subsets;
  for (int mask = 1; mask < (1 << kinds.size()); ++mask) {
    std::vector<int> s;
    for (std::size_t b = 0; b < kinds.size(); ++b)
      if (mask & (1 << b)) s.push_back(kinds[b]);
    subsets.push_back(std::move(s));
  }
  w.rng.shuffle(subsets);
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });

  auto unique_on = [&](const std::vector<int>& s) {
    for (int id : pool) {
      if (id == target) continue;
      const SceneObject* o = scene.find(id);
      if (!o) continue;
      bool same = true;
      for (int k : s)
        if (attr_value(o->attrs, k) != attr_value(t->attrs, k)) { same = false; break; }
      if (same) return false;
    }
    return true;
  };

  for (auto& s : subsets) {
    if (!unique_on(s)) continue;
    // pad with redundant attributes now and then; keeps questions varied
    double p = extra_prob;
    std::vector<int> spare;
    for (int k : kinds)
      if (std::find(s.begin(), s.end(), k) == s.end()) spare.push_back(k);
    w.rng.shuffle(spare);
    for (int k : spare) {
      if (!w.rng.bernoulli(p)) break;
      s.push_back(k);
      p *= 0.55;
    }
    std::sort(s.begin(), s.end());

    Desc d;
    std::vector<std::string> words;
    for (int k : s) {
      std::string v = attr_value(t->attrs, k);
      d.filters.emplace_back(filter_module(k), v);
      d.attrs.push_back(v);
      words.push_back(surface_attr(w, k, v, false));
    }
    const bool used_shape = std::find(s.begin(), s.end(), kShape) != s.end();
    if (!used_shape) words.push_back(w.plain("thing"));
    d.noun = join(words, " ");
    return d;
  }
  return std::nullopt;
}

// An attribute predicate for count/exist questions, possibly with an action
// participle, rendered in both grammatical numbers.
struct Pred {
  std::vector<std::pair<std::string, std::string>> filters;
  std::vector<std::string> attrs;
  std::optional<ActionKind> action;
  std::string sing, plur;
};

std::string random_attr_value(Rng& rng, int kind) {
  static const std::vector<std::string> sizes = {"small", "medium", "large"};
  static const std::vector<std::string> colors = {"gold", "gray",  "green", "purple", "red",
                                                  "cyan", "blue", "brown", "yellow"};
  static const std::vector<std::string> mats = {"metal", "rubber"};
  // no "snitch" here: predicates about snitches are trivially singleton
  static const std::vector<std::string> shapes = {"cone", "cube", "sphere", "cylinder"};
  switch (kind) {
    case kSize: return rng.pick(sizes);
    case kColor: return rng.pick(colors);
    case kMaterial: return rng.pick(mats);
    default: return rng.pick(shapes);
  }
}

enum class PredHint { any, want_match, want_empty };

Pred sample_pred(const SceneGraph& scene, const VideoInterval& iv, WordPick& w,
                 bool with_action, PredHint hint, int min_attrs = 1,
                 const ObjectAttrs* force_seed = nullptr) {
  Pred p;
  int n;
  if (min_attrs == 0)
    n = w.rng.weighted({0.5, 0.3, 0.2});
  else
    n = 1 + w.rng.weighted({0.45, 0.35, 0.20});
  std::vector<int> kinds = {kSize, kColor, kMaterial, kShape};
  w.rng.shuffle(kinds);
  kinds.resize(static_cast<std::size_t>(n));
  std::sort(kinds.begin(), kinds.end());

  if (with_action) {
    static const std::vector<ActionKind> motions = {ActionKind::flying, ActionKind::rotating,
                                                    ActionKind::sliding};
    p.action = w.rng.pick(motions);
  }

  // seed the values from a real object so non-empty answers stay reachable
  const ObjectAttrs* seed = force_seed;
  bool want_seed = !seed &&
                   (hint == PredHint::want_match || (hint == PredHint::any && w.rng.bernoulli(0.7)));
  if (want_seed && !scene.objects.empty()) {
    std::vector<const SceneObject*> cands;
    for (const auto& o : scene.objects) {
      if (o.attrs.shape == Shape::snitch &&
          std::find(kinds.begin(), kinds.end(), kShape) != kinds.end())
        continue;  // keep "snitch" out of predicates
      if (p.action) {
        ActionSummary s = summarize_actions(scene, iv, o.id);
        if (!s.frequency.count(*p.action)) continue;
        if (contained_throughout(o, iv.start, iv.end)) continue;
      }
      cands.push_back(&o);
    }
    if (!cands.empty())
      seed = &w.rng.pick(cands)->attrs;
    else if (hint == PredHint::any)
      seed = &scene.objects[static_cast<std::size_t>(w.rng.uniform_int(
                                0, static_cast<int>(scene.objects.size()) - 1))]
                  .attrs;
  }

  std::vector<std::string> sing_words, plur_words;
  if (p.action) {
    std::string part = w.group("participle", to_string(*p.action));
    sing_words.push_back(part);
    plur_words.push_back(part);
  }
  bool used_shape = false;
  for (int k : kinds) {
    std::string v = seed ? attr_value(*seed, k) : random_attr_value(w.rng, k);
    if (k == kShape && v == "snitch") v = random_attr_value(w.rng, kShape);
    p.filters.emplace_back(filter_module(k), v);
    p.attrs.push_back(v);
    if (k == kShape) {
      used_shape = true;
      sing_words.push_back(surface_attr(w, k, v, false));
      plur_words.push_back(surface_attr(w, k, v, true));
    } else {
      std::string sw = surface_attr(w, k, v, false);
      sing_words.push_back(sw);
      plur_words.push_back(sw);
    }
  }
  if (!used_shape) {
    sing_words.push_back(w.plain("thing"));
    plur_words.push_back(w.plain("things"));
  }
  p.sing = join(sing_words, " ");
  p.plur = join(plur_words, " ");
  return p;
}

// program under construction
struct PB {
  Program prog;
  int scene_idx = -1;

  int add(std::string m, std::vector<int> in, std::vector<SideValue> side = {}) {
    ProgramNode n;
    n.module = std::move(m);
    n.inputs = std::move(in);
    n.side = std::move(side);
    prog.nodes.push_back(std::move(n));
    return static_cast<int>(prog.nodes.size()) - 1;
  }
  int scene() {
    if (scene_idx < 0) scene_idx = add("scene", {});
    return scene_idx;
  }
  // prefix nodes are 0-based, so they must come first
  int absorb(const IntervalBinding& b) {
    if (!prog.nodes.empty()) throw DataError("interval prefix must be absorbed first");
    for (const auto& n : b.prefix) {
      if (n.module == "scene") scene_idx = static_cast<int>(prog.nodes.size());
      prog.nodes.push_back(n);
    }
    return b.interval_node;
  }
  int chain_filters(int src, const std::vector<std::pair<std::string, std::string>>& fs) {
    int cur = src;
    for (const auto& [m, v] : fs) cur = add(m, {cur}, {SideValue{v}});
    return cur;
  }
  std::vector<int> with_iv(int iv, std::initializer_list<int> rest) {
    std::vector<int> in;
    if (iv >= 0) in.push_back(iv);
    in.insert(in.end(), rest.begin(), rest.end());
    return in;
  }
};

struct BuildCtx {
  const TemplateRegistry& reg;
  const SceneGraph& scene;  // truncated at the turn cutoff
  const DialogueState& state;
  const IntervalBinding& bind;
  const ORPlan& orp;
  Rng& rng;
  double min_duration;

  WordPick words() { return WordPick{reg, rng}; }

  // interval the steering math should reason over
  VideoInterval steer_iv() const {
    if (bind.interval.kind == IntervalKind::none)
      return {0.0, scene.duration, classify_interval(scene, 0.0, scene.duration)};
    return bind.interval;
  }
  std::vector<int> all_ids() const {
    std::vector<int> ids;
    for (const auto& o : scene.objects) ids.push_back(o.id);
    return ids;
  }
};

struct Cand {
  Program prog;
  std::map<std::string, std::string> slots;
  int interval_node = -1;
  std::vector<std::pair<int, std::vector<std::string>>> mentions;
  std::vector<std::string> pred_attrs;
  bool pred_pure = false;
  std::vector<QAInstance::ORRef> or_refs;
};

struct SlotObj {
  int node = -1;
  int id = -1;
  std::string phrase;
  std::vector<std::string> attrs;
  std::vector<QAInstance::ORRef> or_refs;
  bool pronoun = false;
};

// Localize one object: a plain description, a pronoun, or a long-distance
// reference through the dialogue object tracker.
std::optional<SlotObj> bind_object(BuildCtx& c, PB& pb, int preferred_id, bool or_slot,
                                   int exclude_kind, double extra_prob) {
  WordPick w = c.words();
  if (or_slot && c.orp.kind == ORPlan::Kind::short_term) {
    if (!c.state.last || c.state.last->focal_ids.size() != 1) return std::nullopt;
    int id = c.state.last->focal_ids.front();
    int r = pb.add("refer_object", {}, {SideValue{std::string("it")}});
    int u = pb.add("unique", {r});
    SlotObj s;
    s.node = u;
    s.id = id;
    s.phrase = "it";
    s.or_refs.push_back({1, id});
    s.pronoun = true;
    return s;
  }
  if (or_slot && c.orp.kind == ORPlan::Kind::long_term) {
    int id = c.orp.referent_id;
    const TrackedObject* tr = c.state.tracked(id);
    if (!tr) return std::nullopt;
    std::vector<int> pool;
    for (const auto& t : c.state.tracker) pool.push_back(t.id);
    auto d = describe_unique(c.scene, pool, id, w, exclude_kind, 0.5);
    if (!d) return std::nullopt;
    int src = pb.add("track_object", {});
    int cur = pb.chain_filters(src, d->filters);
    int u = pb.add("unique", {cur});
    SlotObj s;
    s.node = u;
    s.id = id;
    s.phrase = w.plain("earlier_mention") + " " + d->noun;
    s.attrs = d->attrs;
    s.or_refs.push_back({c.state.turns_done + 1 - tr->last_mention, id});
    return s;
  }
  auto d = describe_unique(c.scene, c.all_ids(), preferred_id, w, exclude_kind, extra_prob);
  if (!d) return std::nullopt;
  int cur = pb.chain_filters(pb.scene(), d->filters);
  int u = pb.add("unique", {cur});
  SlotObj s;
  s.node = u;
  s.id = preferred_id;
  s.phrase = "the " + d->noun;
  s.attrs = d->attrs;
  return s;
}

void note_mention(Cand& cand, const SlotObj& s) {
  cand.mentions.emplace_back(s.id, s.attrs);
  for (const auto& r : s.or_refs) cand.or_refs.push_back(r);
}

int freq_of(const SceneGraph& sc, const VideoInterval& iv, int id, ActionKind k) {
  ActionSummary s = summarize_actions(sc, iv, id);
  auto it = s.frequency.find(k);
  return it == s.frequency.end() ? 0 : it->second;
}

const std::vector<ActionKind>& motion_kinds() {
  static const std::vector<ActionKind> k = {ActionKind::flying, ActionKind::rotating,
                                            ActionKind::sliding};
  return k;
}

// ---- per-family builders -------------------------------------------------

std::optional<Cand> build_caf(BuildCtx& c, const std::string& sub, const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  if (ids.size() < 2) return std::nullopt;
  c.rng.shuffle(ids);

  int id1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    id1 = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                : c.state.last->focal_ids.front();
  } else {
    id1 = ids.front();
  }

  // choose the comparison constructively when an answer is requested
  auto cmp_holds = [&](int a, int b) {
    if (sub == "more") return a > b;
    if (sub == "less") return a < b;
    return a == b;
  };
  std::optional<bool> want;
  if (target == "True") want = true;
  if (target == "False") want = false;

  struct Choice { int id2; ActionKind k1, k2; };
  std::optional<Choice> pick;
  std::vector<ActionKind> kinds1 = motion_kinds(), kinds2 = motion_kinds();
  c.rng.shuffle(kinds1);
  c.rng.shuffle(kinds2);
  for (ActionKind k1 : kinds1) {
    for (int id2 : ids) {
      if (id2 == id1) continue;
      for (ActionKind k2 : kinds2) {
        bool val = cmp_holds(freq_of(c.scene, siv, id1, k1), freq_of(c.scene, siv, id2, k2));
        if (!want || val == *want) {
          pick = Choice{id2, k1, k2};
          break;
        }
      }
      if (pick) break;
    }
    if (pick) break;
  }
  if (!pick) return std::nullopt;

  auto o1 = bind_object(c, pb, id1, true, -1, 0.55);
  if (!o1) return std::nullopt;
  auto o2 = bind_object(c, pb, pick->id2, false, -1, 0.55);
  if (!o2) return std::nullopt;

  int c1 = pb.add("count_action", pb.with_iv(iv, {o1->node}),
                  {SideValue{to_string(pick->k1)}});
  int c2 = pb.add("count_action", pb.with_iv(iv, {o2->node}),
                  {SideValue{to_string(pick->k2)}});
  const char* cmp = sub == "more" ? "greater_than" : sub == "less" ? "less_than" : "equal_integer";
  pb.add(cmp, {c1, c2});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj1"] = o1->phrase;
  out.slots["obj2"] = o2->phrase;
  out.slots["verb1"] = w.group("verb_base", to_string(pick->k1));
  out.slots["verb2s"] = w.group("verb_s", to_string(pick->k2));
  note_mention(out, *o1);
  note_mention(out, *o2);
  return out;
}

std::optional<Cand> build_ca_same(BuildCtx& c, bool by_set, const std::string& sub,
                                  const std::string& target) {
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);

  auto matches_of = [&](int probe) {
    ActionSummary ps = summarize_actions(c.scene, siv, probe);
    int m = 0;
    for (const auto& o : c.scene.objects) {
      if (o.id == probe) continue;
      if (contained_throughout(o, siv.start, siv.end)) continue;
      ActionSummary s = summarize_actions(c.scene, siv, o.id);
      bool match = by_set ? s.action_set == ps.action_set
                          : s.action_sequence == ps.action_sequence;
      if (match) ++m;
    }
    return m;
  };

  int probe = -1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    probe = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                  : c.state.last->focal_ids.front();
  } else {
    for (int id : ids) {
      int m = matches_of(id);
      bool ok;
      if (target.empty()) {
        ok = sub == "count" ? m <= 3 : true;
      } else if (sub == "count") {
        ok = m == std::stoi(target);
      } else {
        ok = (m > 0) == (target == "True");
      }
      if (ok) { probe = id; break; }
    }
    if (probe < 0) return std::nullopt;
  }

  auto po = bind_object(c, pb, probe, true, -1, 0.55);
  if (!po) return std::nullopt;
  int s = pb.add(by_set ? "same_action_set" : "same_action_sequence",
                 pb.with_iv(iv, {po->node}));
  pb.add(sub == "count" ? "count_object" : "exist", {s});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] = po->phrase;
  note_mention(out, *po);
  return out;
}

std::string set_answer(const std::vector<ActionKind>& kinds) {
  std::vector<std::string> parts;
  for (ActionKind k : kinds) parts.push_back(to_string(k));
  return join(parts, ",");
}

std::optional<Cand> build_aq_all(BuildCtx& c, const std::string& target) {
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);
  int id = -1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    id = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                               : c.state.last->focal_ids.front();
  } else {
    for (int cand_id : ids) {
      std::string ans = set_answer(summarize_actions(c.scene, siv, cand_id).action_set);
      if (target.empty() || ans == target) { id = cand_id; break; }
    }
    if (id < 0) return std::nullopt;
  }

  auto o = bind_object(c, pb, id, true, -1, 0.6);
  if (!o) return std::nullopt;
  pb.add("query_action_set", pb.with_iv(iv, {o->node}));

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] = o->phrase;
  note_mention(out, *o);
  return out;
}

std::optional<Cand> build_aq_order(BuildCtx& c, const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);

  struct Choice { int id; int pos; int len; };
  std::optional<Choice> pick;
  auto consider = [&](int cand_id) {
    auto seq = summarize_actions(c.scene, siv, cand_id).action_sequence;
    if (seq.empty()) return;
    std::vector<int> order(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) order[i] = static_cast<int>(i);
    c.rng.shuffle(order);
    for (int i : order) {
      if (i > 3) continue;  // no surface word past "fourth"
      if (target.empty() || to_string(seq[static_cast<std::size_t>(i)]) == target) {
        pick = Choice{cand_id, i + 1, static_cast<int>(seq.size())};
        return;
      }
    }
  };

  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    consider(c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                   : c.state.last->focal_ids.front());
  } else {
    for (int cand_id : ids) {
      consider(cand_id);
      if (pick) break;
    }
  }
  if (!pick) return std::nullopt;

  auto o = bind_object(c, pb, pick->id, true, -1, 0.6);
  if (!o) return std::nullopt;

  bool use_last = pick->pos == pick->len && (pick->len > 1 ? c.rng.bernoulli(0.6) : false);
  std::vector<SideValue> side;
  std::string ordword;
  if (use_last) {
    side.emplace_back(std::string("last"));
    ordword = w.group("ordinal", "last");
  } else {
    side.emplace_back(pick->pos);
    ordword = w.group("ordinal", std::to_string(pick->pos));
  }
  pb.add("action_by_order", pb.with_iv(iv, {o->node}), side);

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] = o->phrase;
  out.slots["ordword"] = ordword;
  note_mention(out, *o);
  return out;
}

std::optional<Cand> build_aq_freq(BuildCtx& c, const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);
  std::vector<std::string> sups = {"least", "most"};
  c.rng.shuffle(sups);

  // unique extremum of the frequency map, or "" when tied/absent
  auto extremum = [&](int id, const std::string& sup) -> std::string {
    ActionSummary s = summarize_actions(c.scene, siv, id);
    if (s.frequency.empty()) return "";
    int best = 0;
    ActionKind bk = ActionKind::no_action;
    int ties = 0;
    for (const auto& [k, cnt] : s.frequency) {
      bool better = bk == ActionKind::no_action || (sup == "most" ? cnt > best : cnt < best);
      if (better) {
        best = cnt;
        bk = k;
        ties = 1;
      } else if (cnt == best) {
        ++ties;
      }
    }
    return ties == 1 ? to_string(bk) : "";
  };

  struct Choice { int id; std::string sup; };
  std::optional<Choice> pick;
  auto consider = [&](int cand_id) {
    for (const auto& sup : sups) {
      std::string e = extremum(cand_id, sup);
      if (e.empty()) continue;
      if (target.empty() || e == target) {
        pick = Choice{cand_id, sup};
        return;
      }
    }
  };
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    consider(c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                   : c.state.last->focal_ids.front());
  } else {
    for (int cand_id : ids) {
      consider(cand_id);
      if (pick) break;
    }
  }
  if (!pick) return std::nullopt;

  auto o = bind_object(c, pb, pick->id, true, -1, 0.6);
  if (!o) return std::nullopt;
  pb.add("action_by_frequency", pb.with_iv(iv, {o->node}), {SideValue{pick->sup}});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] = o->phrase;
  out.slots["sup"] = w.group("superlative", pick->sup);
  note_mention(out, *o);
  return out;
}

std::optional<Cand> build_attq(BuildCtx& c, const std::string& sub, const std::string& target) {
  PB pb;
  Cand out;
  out.interval_node = -1;
  int kind = sub == "size" ? kSize : sub == "color" ? kColor : sub == "material" ? kMaterial
                                                                                 : kShape;
  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);

  int id = -1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    id = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                               : c.state.last->focal_ids.front();
  } else {
    for (int cand_id : ids) {
      const SceneObject& o = c.scene.at(cand_id);
      if (target.empty() || attr_value(o.attrs, kind) == target) { id = cand_id; break; }
    }
    if (id < 0) return std::nullopt;
  }

  auto o = bind_object(c, pb, id, true, kind, 0.6);
  if (!o) return std::nullopt;
  const char* q = kind == kSize ? "query_size" : kind == kColor ? "query_color"
                   : kind == kMaterial        ? "query_material"
                                              : "query_shape";
  pb.add(q, {o->node});

  out.prog = std::move(pb.prog);
  out.slots["obj"] = o->phrase;
  note_mention(out, *o);
  return out;
}

std::optional<Cand> build_ac(BuildCtx& c, const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);
  std::vector<ActionKind> kinds = motion_kinds();
  c.rng.shuffle(kinds);

  struct Choice { int id; ActionKind k; };
  std::optional<Choice> pick;
  auto consider = [&](int cand_id) {
    for (ActionKind k : kinds) {
      int f = freq_of(c.scene, siv, cand_id, k);
      if (f > 3) continue;
      if (target.empty() || f == std::stoi(target)) {
        pick = Choice{cand_id, k};
        return;
      }
    }
  };
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    consider(c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                   : c.state.last->focal_ids.front());
  } else {
    for (int cand_id : ids) {
      consider(cand_id);
      if (pick) break;
    }
  }
  if (!pick) return std::nullopt;

  auto o = bind_object(c, pb, pick->id, true, -1, 0.6);
  if (!o) return std::nullopt;
  pb.add("count_action", pb.with_iv(iv, {o->node}), {SideValue{to_string(pick->k)}});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] = o->phrase;
  out.slots["verb"] = w.group("verb_base", to_string(pick->k));
  note_mention(out, *o);
  return out;
}

// count/exist over an attribute predicate, optionally restricted by an action
// qualifier ("sliding", stationary, contained)
std::optional<Cand> build_pred_question(BuildCtx& c, const std::string& id,
                                        const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  const bool count = id.rfind("oc_", 0) == 0;
  std::string qualifier;  // filter_action side value, "" for none
  bool with_participle = false;
  if (id == "oc_comp" || id == "oe_comp")
    with_participle = true;
  else if (id == "oc_atomic_ns" || id == "oe_atomic_ns_stationary")
    qualifier = "no action";
  else if (id == "oc_atomic_contained" || id == "oe_atomic_ns_contained")
    qualifier = "contained";

  PredHint hint = PredHint::any;
  if (!target.empty()) {
    if (target == "0" || target == "False")
      hint = PredHint::want_empty;
    else
      hint = PredHint::want_match;
  }
  // a containment question can only come out non-empty when some object is
  // hidden for the whole scope, so steer the predicate onto one of those
  const ObjectAttrs* force_seed = nullptr;
  if (qualifier == "contained" && hint == PredHint::want_match) {
    std::vector<const SceneObject*> hidden;
    for (const auto& o : c.scene.objects)
      if (contained_throughout(o, siv.start, siv.end)) hidden.push_back(&o);
    if (hidden.empty()) return std::nullopt;
    force_seed = &c.rng.pick(hidden)->attrs;
  }
  Pred p = sample_pred(c.scene, siv, w, with_participle, hint, 1, force_seed);

  int cur = pb.chain_filters(pb.scene(), p.filters);
  if (with_participle)
    cur = pb.add("filter_action", pb.with_iv(iv, {cur}), {SideValue{to_string(*p.action)}});
  else if (!qualifier.empty())
    cur = pb.add("filter_action", pb.with_iv(iv, {cur}), {SideValue{qualifier}});
  pb.add(count ? "count_object" : "exist", {cur});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["pred"] = count ? p.plur : p.sing;
  out.pred_attrs = p.attrs;
  out.pred_pure = !with_participle && qualifier.empty();
  return out;
}

std::vector<int> related_ids(const SceneGraph& sc, const VideoInterval& iv, int anchor,
                             SpatialRel rel) {
  std::vector<int> out;
  try {
    for (const auto& o : sc.objects) {
      if (o.id == anchor) continue;
      if (holds_spatial(sc, iv, o.id, anchor, rel) == Tri::yes) out.push_back(o.id);
    }
  } catch (const IntervalKindError&) {
    return {};
  }
  return out;
}

std::optional<Cand> build_spatial_set(BuildCtx& c, const std::string& id,
                                      const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();
  const bool count = id == "oc_atomic_sp";

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);
  static const std::vector<SpatialRel> rels = {SpatialRel::left, SpatialRel::right,
                                               SpatialRel::front, SpatialRel::behind};

  int anchor_id = -1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    anchor_id = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                      : c.state.last->focal_ids.front();
  }

  struct Choice { int anchor; SpatialRel rel; Pred p; int value; };
  std::optional<Choice> pick;
  for (int tries = 0; tries < 14 && !pick; ++tries) {
    int a = anchor_id >= 0 ? anchor_id : ids[static_cast<std::size_t>(
                                             c.rng.uniform_int(0, static_cast<int>(ids.size()) - 1))];
    SpatialRel rel = c.rng.pick(rels);
    Pred p = sample_pred(c.scene, siv, w, false, PredHint::any, count ? 0 : 1);
    int m = 0;
    for (int rid : related_ids(c.scene, siv, a, rel))
      if (has_all_attr_values(c.scene.at(rid).attrs, p.attrs)) ++m;
    if (count && m > 3) continue;
    if (!target.empty()) {
      bool ok = count ? m == std::stoi(target) : (m > 0) == (target == "True");
      if (!ok) continue;
    }
    pick = Choice{a, rel, std::move(p), m};
  }
  if (!pick) return std::nullopt;

  auto an = bind_object(c, pb, pick->anchor, true, -1, 0.55);
  if (!an) return std::nullopt;
  int rs = pb.add("relate_spatial", pb.with_iv(iv, {an->node}),
                  {SideValue{to_string(pick->rel)}});
  int cur = pb.chain_filters(rs, pick->p.filters);
  pb.add(count ? "count_object" : "exist", {cur});

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["pred"] = count ? pick->p.plur : pick->p.sing;
  out.slots["rel"] = w.group("rel_phrase", to_string(pick->rel));
  out.slots["anchor"] = an->phrase;
  note_mention(out, *an);
  return out;
}

std::optional<Cand> build_aq_spatial(BuildCtx& c, const std::string& target) {
  WordPick w = c.words();
  PB pb;
  Cand out;
  int iv = pb.absorb(c.bind);
  out.interval_node = iv;
  const VideoInterval siv = c.steer_iv();

  std::vector<int> ids = c.all_ids();
  c.rng.shuffle(ids);
  static const std::vector<SpatialRel> rels = {SpatialRel::left, SpatialRel::right,
                                               SpatialRel::front, SpatialRel::behind};

  int anchor_forced = -1;
  if (c.orp.kind != ORPlan::Kind::none) {
    if (!c.state.last || c.state.last->focal_ids.empty()) return std::nullopt;
    anchor_forced = c.orp.kind == ORPlan::Kind::long_term ? c.orp.referent_id
                                                          : c.state.last->focal_ids.front();
  }

  struct Choice {
    int anchor;
    SpatialRel rel;
    int subject;
    std::optional<std::pair<int, std::string>> narrow;  // attr kind, value
  };
  std::optional<Choice> pick;
  for (int tries = 0; tries < 16 && !pick; ++tries) {
    int a = anchor_forced >= 0 ? anchor_forced
                               : ids[static_cast<std::size_t>(c.rng.uniform_int(
                                     0, static_cast<int>(ids.size()) - 1))];
    SpatialRel rel = c.rng.pick(rels);
    std::vector<int> rel_set = related_ids(c.scene, siv, a, rel);
    if (rel_set.empty()) continue;
    auto answer_ok = [&](int subj) {
      if (target.empty()) return true;
      return set_answer(summarize_actions(c.scene, siv, subj).action_set) == target;
    };
    if (rel_set.size() == 1) {
      if (answer_ok(rel_set.front())) pick = Choice{a, rel, rel_set.front(), std::nullopt};
      continue;
    }
    // need one narrowing attribute that isolates a single member
    std::vector<int> order = rel_set;
    c.rng.shuffle(order);
    for (int subj : order) {
      std::vector<int> kinds = {kSize, kColor, kMaterial, kShape};
      c.rng.shuffle(kinds);
      for (int k : kinds) {
        std::string v = attr_value(c.scene.at(subj).attrs, k);
        int m = 0;
        for (int rid : rel_set)
          if (attr_value(c.scene.at(rid).attrs, k) == v) ++m;
        if (m == 1 && answer_ok(subj)) {
          pick = Choice{a, rel, subj, std::make_pair(k, v)};
          break;
        }
      }
      if (pick) break;
    }
  }
  if (!pick) return std::nullopt;

  auto an = bind_object(c, pb, pick->anchor, true, -1, 0.5);
  if (!an) return std::nullopt;
  int rs = pb.add("relate_spatial", pb.with_iv(iv, {an->node}),
                  {SideValue{to_string(pick->rel)}});
  int cur = rs;
  std::string core;
  if (pick->narrow) {
    cur = pb.add(filter_module(pick->narrow->first), {cur}, {SideValue{pick->narrow->second}});
    if (pick->narrow->first == kShape)
      core = surface_attr(w, kShape, pick->narrow->second, false);
    else
      core = surface_attr(w, pick->narrow->first, pick->narrow->second, false) + " " +
             w.plain("thing");
  } else {
    core = w.plain("thing");
  }
  int u = pb.add("unique", {cur});
  pb.add("query_action_set", pb.with_iv(iv, {u}));

  out.prog = std::move(pb.prog);
  out.slots["temporal"] = c.bind.phrase;
  out.slots["obj"] =
      "the " + core + " that is " + w.group("rel_phrase", to_string(pick->rel)) + " " + an->phrase;
  note_mention(out, *an);
  std::vector<std::string> subj_attrs;
  if (pick->narrow) subj_attrs.push_back(pick->narrow->second);
  out.mentions.emplace_back(pick->subject, subj_attrs);
  return out;
}

std::optional<Cand> build_for(const TemplateDef& t, BuildCtx& c, const std::string& target) {
  const std::string& id = t.id;
  if (id == "caf_more" || id == "caf_equal" || id == "caf_less")
    return build_caf(c, t.sub_type, target);
  if (id == "caseq_count" || id == "caseq_exist")
    return build_ca_same(c, false, t.sub_type, target);
  if (id == "caset_count" || id == "caset_exist")
    return build_ca_same(c, true, t.sub_type, target);
  if (id == "aq_all_comp" || id == "aq_all_atomic_ns") return build_aq_all(c, target);
  if (id == "aq_all_atomic_sp") return build_aq_spatial(c, target);
  if (id == "aq_order") return build_aq_order(c, target);
  if (id == "aq_freq") return build_aq_freq(c, target);
  if (id.rfind("attq_", 0) == 0) return build_attq(c, t.sub_type, target);
  if (id == "ac_comp") return build_ac(c, target);
  if (id == "oc_atomic_sp" || id == "oe_atomic_sp") return build_spatial_set(c, id, target);
  if (id.rfind("oc_", 0) == 0 || id.rfind("oe_", 0) == 0)
    return build_pred_question(c, id, target);
  throw DataError("no builder for template " + id);
}

bool binding_compatible(IntervalClass cls, const VideoInterval& iv) {
  switch (cls) {
    case IntervalClass::none: return iv.kind == IntervalKind::none;
    case IntervalClass::compositional: return iv.kind == IntervalKind::compositional;
    case IntervalClass::atomic_spatial:
    case IntervalClass::atomic_nonspatial: return iv.kind == IntervalKind::atomic;
  }
  return false;
}

}  // namespace

std::optional<IntervalBinding> build_tr_binding(const SceneGraph& scene,
                                                const DialogueState& state,
                                                const TRPlan& plan, Rng& rng,
                                                const TemplateRegistry& reg,
                                                double min_duration) {
  if (!state.last) return std::nullopt;
  WordPick w{reg, rng};
  VideoInterval base{0.0, 0.0, IntervalKind::none};
  std::string phrase;
  if (plan.via_refer) {
    if (!state.last->anchor_interval || !state.last->anchor_kind) return std::nullopt;
    base = *state.last->anchor_interval;
    phrase = w.group("tr_event_phrase", to_string(plan.rel)) + " " +
             w.group("action_noun", to_string(*state.last->anchor_kind)) + " ,";
  } else {
    if (state.last->interval.kind == IntervalKind::none) return std::nullopt;
    base = state.last->interval;
    phrase = w.group("tr_phrase", to_string(plan.rel));
  }

  double s = base.start, e = base.end;
  switch (plan.rel) {
    case TemporalRel::during: break;
    case TemporalRel::before: s = 0.0; e = base.start; break;
    case TemporalRel::after: s = base.end; e = scene.duration; break;
  }
  if (e - s < min_duration - 1e-9) return std::nullopt;
  IntervalKind k = classify_interval(scene, s, e);

  IntervalBinding b;
  b.cls = k == IntervalKind::atomic ? IntervalClass::atomic_nonspatial
                                    : IntervalClass::compositional;
  b.interval = {s, e, k};
  b.phrase = phrase;
  b.tr = plan.rel;
  PB pb;
  int src = pb.add(plan.via_refer ? "refer_interval" : "track_interval", {});
  b.interval_node =
      pb.add("relate_temporal", {src}, {SideValue{to_string(plan.rel)}});
  b.prefix = std::move(pb.prog.nodes);
  if (plan.via_refer) b.anchor_kind = state.last->anchor_kind;
  return b;
}

std::optional<IntervalBinding> sample_interval_binding(const SceneGraph& scene,
                                                       IntervalClass need, Rng& rng,
                                                       const TemplateRegistry& reg,
                                                       double min_duration) {
  WordPick w{reg, rng};
  const double dur = scene.duration;

  if (need == IntervalClass::none) {
    IntervalBinding b;
    b.cls = IntervalClass::none;
    b.interval = {0.0, dur, IntervalKind::none};
    return b;
  }

  const IntervalKind want_kind = need == IntervalClass::compositional
                                     ? IntervalKind::compositional
                                     : IntervalKind::atomic;

  IntervalKind whole_kind = classify_interval(scene, 0.0, dur);
  const bool whole_ok = whole_kind == want_kind && dur >= min_duration;

  struct AnchorCand {
    int obj_id;
    ActionKind kind;
    int occ;        // 1-based position among same-kind events
    int occ_count;
    std::string form;
    double s, e;
  };
  static const std::vector<std::string> forms = {"during", "before", "after", "until_end",
                                                 "since_start"};
  std::vector<AnchorCand> cands;
  for (const auto& o : scene.objects) {
    std::map<ActionKind, std::vector<const ActionEvent*>> occ;
    for (const auto& ev : o.timeline)
      if (is_motion(ev.kind) && ev.end - ev.start > 1e-9) occ[ev.kind].push_back(&ev);
    for (const auto& [kind, evs] : occ) {
      if (evs.size() > 4) continue;  // no surface ordinal past "fourth"
      for (std::size_t i = 0; i < evs.size(); ++i) {
        const ActionEvent& ev = *evs[i];
        for (const auto& form : forms) {
          double s = 0.0, e = 0.0;
          if (form == "during") {
            s = ev.start; e = ev.end;
          } else if (form == "before") {
            s = 0.0; e = ev.start;
          } else if (form == "after") {
            s = ev.end; e = dur;
          } else if (form == "until_end") {
            // composed as before(after(event)), so the middle span must also
            // clear the minimum duration
            if (dur - ev.end < min_duration) continue;
            s = 0.0; e = ev.end;
          } else {  // since_start
            if (ev.start < min_duration) continue;
            s = ev.start; e = dur;
          }
          if (e - s < min_duration) continue;
          if (classify_interval(scene, s, e) != want_kind) continue;
          cands.push_back({o.id, kind, static_cast<int>(i) + 1,
                           static_cast<int>(evs.size()), form, s, e});
        }
      }
    }
  }

  auto whole_binding = [&]() {
    IntervalBinding b;
    b.cls = need;
    b.interval = {0.0, dur, whole_kind};
    b.phrase = w.plain("whole_video");
    return b;
  };

  if (whole_ok && (cands.empty() || rng.bernoulli(0.14))) return whole_binding();
  if (cands.empty()) return std::nullopt;

  rng.shuffle(cands);
  for (const auto& c : cands) {
    std::vector<int> pool;
    for (const auto& o : scene.objects) pool.push_back(o.id);
    auto d = describe_unique(scene, pool, c.obj_id, w, -1, 0.5);
    if (!d) continue;

    IntervalBinding b;
    b.cls = need;
    b.interval = {c.s, c.e, want_kind};
    b.anchor_object_ids.push_back(c.obj_id);
    b.anchor_kind = c.kind;
    b.mentions.emplace_back(c.obj_id, d->attrs);

    PB pb;
    int cur = pb.chain_filters(pb.scene(), d->filters);
    int u = pb.add("unique", {cur});
    std::vector<SideValue> side{SideValue{to_string(c.kind)}};
    std::string ordword;
    if (c.occ_count > 1) {
      if (c.occ == c.occ_count && rng.bernoulli(0.5)) {
        side.emplace_back(std::string("last"));
        ordword = w.group("ordinal", "last") + " ";
      } else {
        side.emplace_back(c.occ);
        ordword = w.group("ordinal", std::to_string(c.occ)) + " ";
      }
    }
    int f = pb.add("find_interval", {u}, side);
    int node = f;
    if (c.form == "during") {
      node = pb.add("relate_temporal", {f}, {SideValue{std::string("during")}});
    } else if (c.form == "before") {
      node = pb.add("relate_temporal", {f}, {SideValue{std::string("before")}});
    } else if (c.form == "after") {
      node = pb.add("relate_temporal", {f}, {SideValue{std::string("after")}});
    } else if (c.form == "until_end") {
      int a = pb.add("relate_temporal", {f}, {SideValue{std::string("after")}});
      node = pb.add("relate_temporal", {a}, {SideValue{std::string("before")}});
    } else {  // since_start
      int a = pb.add("relate_temporal", {f}, {SideValue{std::string("before")}});
      node = pb.add("relate_temporal", {a}, {SideValue{std::string("after")}});
    }
    b.prefix = std::move(pb.prog.nodes);
    b.interval_node = node;

    std::string noun = w.group("action_noun", to_string(c.kind));
    b.phrase = w.group("anchored", c.form) + " the " + d->noun + " 's " + ordword + noun + " ,";
    return b;
  }
  if (whole_ok) return whole_binding();
  return std::nullopt;
}

namespace {

InstantiateResult finish(const TemplateDef& t, const InstantiateRequest& req, Cand&& cand,
                         std::string answer, const ExecResult& res,
                         const SceneGraph& scene, Rng& rng) {
  InstantiateResult out;
  out.ok = true;
  QAInstance& qa = out.qa;
  qa.template_id = t.id;
  qa.type = t.type;
  qa.sub_type = t.sub_type;
  qa.answer = std::move(answer);
  qa.program = std::move(cand.prog);
  qa.interval = req.binding.interval;
  qa.interval_node = cand.interval_node;
  qa.cutoff = scene.duration;
  qa.tr = req.binding.tr;
  qa.or_refs = std::move(cand.or_refs);

  int variant = rng.uniform_int(0, static_cast<int>(t.text.size()) - 1);
  qa.question = realize_text(t, variant, cand.slots);

  qa.focal_ids = object_outputs(res.node_values);
  qa.anchor_interval = anchor_interval_of(qa.program, res.node_values);
  qa.anchor_kind = req.binding.anchor_kind;
  qa.mentions = req.binding.mentions;
  for (auto& m : cand.mentions) qa.mentions.push_back(std::move(m));
  // every singled-out object in the trace counts as bound, so the tracker can
  // be recomputed from programs alone
  for (const auto& v : res.node_values)
    if (const auto* r = std::get_if<ObjectRef>(&v))
      qa.mentions.emplace_back(r->id, std::vector<std::string>{});
  qa.predicate_attrs = std::move(cand.pred_attrs);
  qa.predicate_pure = cand.pred_pure;

  std::set<int> seen;
  for (const auto& [id, attrs] : qa.mentions) {
    (void)attrs;
    if (!seen.insert(id).second) continue;
    const SceneObject* o = scene.find(id);
    if (o && contained_overlaps(*o, qa.interval.start, qa.interval.end)) ++qa.contained_count;
  }
  return out;
}

}  // namespace

InstantiateResult instantiate(const TemplateRegistry& reg, const InstantiateRequest& req,
                              const SceneGraph& truncated, const DialogueState& state,
                              Rng& rng, double min_duration) {
  if (!req.tmpl) throw DataError("instantiate: no template");
  const TemplateDef& t = *req.tmpl;
  if (!binding_compatible(t.interval_class, req.binding.interval))
    return {false, {}, "interval binding does not fit template " + t.id};

  StateView view = state.exec_view();
  ExecContext ctx{&truncated, &view, min_duration};

  std::vector<std::string> targets = req.targets;
  targets.emplace_back();  // catch-all pass accepting any valid answer

  std::optional<Cand> fallback;
  std::string fb_answer;
  ExecResult fb_res;
  std::string last_reason = "no viable binding";

  const std::vector<std::string> sup = supported_answers(t);
  for (const std::string& target : targets) {
    for (int k = 0; k < req.tries_per_target; ++k) {
      BuildCtx bc{reg, truncated, state, req.binding, req.or_plan, rng, min_duration};
      std::optional<Cand> cand = build_for(t, bc, target);
      if (!cand) {
        last_reason = "binder found no candidate for template " + t.id;
        continue;
      }
      ExecResult res = execute(cand->prog, ctx);
      if (!res.ok()) {
        last_reason = res.ill_posed;
        continue;
      }
      std::string ans;
      try {
        ans = answer_string(*res.value);
      } catch (const DataError& e) {
        last_reason = e.what();
        continue;
      }
      if (std::find(sup.begin(), sup.end(), ans) == sup.end()) {
        last_reason = "answer outside supported set: " + ans;
        continue;
      }
      if (!target.empty() && ans != target) {
        if (!fallback) {
          fallback = std::move(cand);
          fb_answer = ans;
          fb_res = res;
        }
        continue;
      }
      return finish(t, req, std::move(*cand), std::move(ans), res, truncated, rng);
    }
  }
  if (fallback)
    return finish(t, req, std::move(*fallback), std::move(fb_answer), fb_res, truncated, rng);
  return {false, {}, last_reason};
}

}  // namespace vgdial
