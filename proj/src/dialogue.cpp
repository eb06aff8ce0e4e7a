#include "vgdial/dialogue.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vgdial/executor.hpp"
#include "vgdial/util.hpp"
#include "vgdial/value.hpp"

namespace vgdial {

std::string balance_key(const TemplateDef& t) { return t.id; }

std::vector<std::string> AnswerBalancer::preferences(const TemplateDef& t, Rng& rng,
                                                     int k) const {
  struct Entry {
    std::string a;
    int c;
    double tie;
  };
  std::vector<Entry> es;
  auto it = counts_.find(balance_key(t));
  for (const auto& a : supported_answers(t)) {
    int c = 0;
    if (it != counts_.end()) {
      auto f = it->second.find(a);
      if (f != it->second.end()) c = f->second;
    }
    es.push_back({a, c, rng.uniform()});
  }
  std::stable_sort(es.begin(), es.end(), [](const Entry& x, const Entry& y) {
    if (x.c != y.c) return x.c < y.c;
    return x.tie < y.tie;
  });
  std::vector<std::string> out;
  for (const auto& e : es) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(e.a);
  }
  return out;
}

bool AnswerBalancer::admit(const TemplateDef& t, const std::string& answer) const {
  auto it = counts_.find(balance_key(t));
  int cnt = 0;
  int minc = -1;
  bool in_domain = false;
  for (const auto& a : supported_answers(t)) {
    int c = 0;
    if (it != counts_.end()) {
      auto f = it->second.find(a);
      if (f != it->second.end()) c = f->second;
    }
    if (minc < 0 || c < minc) minc = c;
    if (a == answer) {
      cnt = c;
      in_domain = true;
    }
  }
  // answers outside the balance contract never commit, else one stray value
  // would wreck the max/min audit
  if (!in_domain) return false;
  if (minc < 0) minc = 0;
  return cnt + 1 <= ratio_ * (minc + slack_);
}

void AnswerBalancer::commit(const TemplateDef& t, const std::string& answer) {
  counts_[balance_key(t)][answer]++;
}

void AnswerBalancer::uncommit(const TemplateDef& t, const std::string& answer) {
  counts_[balance_key(t)][answer]--;
}

namespace {

const std::map<std::string, double>& default_weights() {
  static const std::map<std::string, double> w = {
      {"caf_more", 0.036},       {"caf_equal", 0.036},
      {"caf_less", 0.036},       {"caseq_count", 0.035},
      {"caseq_exist", 0.035},    {"caset_count", 0.035},
      {"caset_exist", 0.035},    {"aq_all_comp", 0.060},
      {"aq_all_atomic_ns", 0.038}, {"aq_all_atomic_sp", 0.028},
      {"aq_order", 0.050},       {"aq_freq", 0.035},
      {"attq_size", 0.028},      {"attq_color", 0.032},
      {"attq_material", 0.028},  {"attq_shape", 0.028},
      {"ac_comp", 0.120},        {"oc_comp", 0.055},
      {"oc_atomic_sp", 0.030},   {"oc_atomic_ns", 0.024},
      {"oc_none", 0.024},        {"oc_atomic_contained", 0.080},
      {"oe_comp", 0.050},        {"oe_atomic_sp", 0.030},
      {"oe_atomic_ns_contained", 0.080}, {"oe_atomic_ns_stationary", 0.024},
  };
  return w;
}

bool or_capable(const std::string& id) {
  static const std::set<std::string> yes = {
      "caf_more",    "caf_equal",        "caf_less",     "caseq_count", "caseq_exist",
      "caset_count", "caset_exist",      "aq_all_comp",  "aq_all_atomic_ns",
      "aq_all_atomic_sp", "aq_order",   "aq_freq",      "attq_size",   "attq_color",
      "attq_material", "attq_shape",    "ac_comp",      "oc_atomic_sp", "oe_atomic_sp",
  };
  return yes.count(id) > 0;
}

std::string kind_of_value(const std::string& v) {
  static const std::set<std::string> sizes = {"small", "medium", "large"};
  static const std::set<std::string> colors = {"gold", "gray",  "green", "purple", "red",
                                               "cyan", "blue", "brown", "yellow"};
  static const std::set<std::string> mats = {"metal", "rubber"};
  static const std::set<std::string> shapes = {"cone", "cube", "sphere", "cylinder", "snitch"};
  if (sizes.count(v)) return "size";
  if (colors.count(v)) return "color";
  if (mats.count(v)) return "material";
  if (shapes.count(v)) return "shape";
  return "";
}

const std::vector<std::string>& domain_of_kind(const std::string& kind) {
  static const std::vector<std::string> sizes = {"small", "medium", "large"};
  static const std::vector<std::string> colors = {"gold", "gray",  "green", "purple", "red",
                                                  "cyan", "blue", "brown", "yellow"};
  static const std::vector<std::string> mats = {"metal", "rubber"};
  static const std::vector<std::string> shapes = {"cone", "cube", "sphere", "cylinder"};
  static const std::vector<std::string> none;
  if (kind == "size") return sizes;
  if (kind == "color") return colors;
  if (kind == "material") return mats;
  if (kind == "shape") return shapes;
  return none;
}

std::string pick_word(const TemplateRegistry& reg, Rng& rng, const std::string& group,
                      const std::string& key) {
  const auto& v = reg.lex(group, key);
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(v.size()) - 1))];
}

std::string pick_phrase(const TemplateRegistry& reg, Rng& rng, const std::string& kind) {
  const auto& v = reg.transfer_phrases(kind);
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(v.size()) - 1))];
}

std::string value_surface(const TemplateRegistry& reg, Rng& rng, const std::string& kind,
                          const std::string& v, bool plural) {
  if (kind == "size") return pick_word(reg, rng, "size", v);
  if (kind == "material") return pick_word(reg, rng, "material", v);
  if (kind == "shape") return pick_word(reg, rng, plural ? "shape_plural" : "shape_noun", v);
  return v;  // color names have a single surface form
}

bool class_matches(IntervalClass cls, IntervalKind kind) {
  switch (cls) {
    case IntervalClass::none: return kind == IntervalKind::none;
    case IntervalClass::compositional: return kind == IntervalKind::compositional;
    case IntervalClass::atomic_spatial:
    case IntervalClass::atomic_nonspatial: return kind == IntervalKind::atomic;
  }
  return false;
}

struct Builder {
  const SceneGraph& full;
  const TemplateRegistry& reg;
  const GenParams& P;
  AnswerBalancer& bal;
  Rng rng;

  DialogueState st;
  Dialogue out;
  SceneGraph trunc;
  std::vector<double> bounds;
  int updates_planned = 0;
  int updates_done = 0;
  bool cutoff_due = false;
  std::set<std::string> texts;
  std::vector<std::pair<std::string, std::string>> commits;  // template id, answer
  std::vector<bool> tt_commits;

  Builder(const SceneGraph& f, const TemplateRegistry& r, const GenParams& p,
          AnswerBalancer& b, Rng g)
      : full(f), reg(r), P(p), bal(b), rng(g) {}

  void rollback() {
    for (const auto& [tid, ans] : commits) bal.uncommit(reg.by_id(tid), ans);
    for (bool s : tt_commits) bal.tt_uncommit(s);
    commits.clear();
    tt_commits.clear();
  }

  int contained_mentions(const SceneGraph& sc, const QAInstance& qa) const {
    std::set<int> seen;
    int n = 0;
    for (const auto& [id, attrs] : qa.mentions) {
      (void)attrs;
      if (!seen.insert(id).second) continue;
      const SceneObject* o = sc.find(id);
      if (o && contained_overlaps(*o, qa.interval.start, qa.interval.end)) ++n;
    }
    return n;
  }

  bool build() {
    bounds = scene_timestamps(full);
    const int m = static_cast<int>(bounds.size());
    if (m < 4) return false;  // a dialogue needs motion structure to step over

    int desired = 1 + rng.weighted({0.30, 0.45, 0.25});
    int plan = desired;
    int start_i = -1;
    while (plan >= 1 && start_i < 0) {
      std::vector<int> cand;
      for (int i = 1; i < m; ++i) {
        if (m - 1 - i < plan) continue;
        if (bounds[static_cast<std::size_t>(i)] < 0.35 * full.duration) continue;
        cand.push_back(i);
      }
      if (!cand.empty())
        start_i = cand[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(cand.size()) - 1))];
      else
        --plan;
    }
    if (start_i < 0) return false;
    updates_planned = plan;
    st.cutoff = bounds[static_cast<std::size_t>(start_i)];
    trunc = truncate_scene(full, st.cutoff);

    for (int t = 1; t <= P.turns; ++t)
      if (!do_turn(t)) return false;
    return updates_done >= 1;
  }

  bool do_turn(int t) {
    if (t >= 2 && updates_done < updates_planned) {
      bool force = P.turns - t + 1 <= updates_planned - updates_done;
      if (cutoff_due || force || rng.bernoulli(P.p_cutoff_step)) {
        if (try_temporal_tt(t)) {
          cutoff_due = false;
          return true;
        }
        cutoff_due = true;  // deferred, not dropped
      }
    }
    if (t >= 2 && rng.bernoulli(P.p_tt_swap) && try_swap_tt(t)) return true;
    for (int a = 0; a < P.max_turn_attempts; ++a) {
      bool relax = a >= (P.max_turn_attempts * 3) / 5;
      if (regular_turn(t, relax)) return true;
    }
    // regular turns exhausted; a transfer turn still keeps the dialogue alive
    // (the previous turn may expose no focal object or usable interval)
    if (t >= 2) {
      if (updates_done < updates_planned && try_temporal_tt(t)) {
        cutoff_due = false;
        return true;
      }
      if (try_swap_tt(t)) return true;
    }
    return false;
  }

  // ---- topic transfer: advance the video cutoff and re-ask ----------------

  bool try_temporal_tt(int t) {
    if (!st.last) return false;
    const TemplateDef& et = reg.by_id(st.last->template_id);
    std::vector<double> cs;
    for (double b : bounds)
      if (b > st.cutoff + 1e-9) cs.push_back(b);
    if (cs.empty()) {
      updates_planned = updates_done;  // plan is no longer feasible
      return false;
    }
    int still_needed = updates_planned - updates_done - 1;
    bool prefer_same = bal.tt_prefer_same();

    struct TC {
      double c;
      std::string ans;
      bool same;
      std::vector<Value> trace;
      SceneGraph sc;
    };
    std::optional<TC> best;
    const std::vector<std::string> sup = supported_answers(et);
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
      int after = static_cast<int>(cs.size()) - 1 - static_cast<int>(ci);
      if (after < still_needed) break;  // advancing further starves the plan
      double c = cs[ci];
      SceneGraph sc = truncate_scene(full, c);
      StateView view = st.exec_view();
      ExecContext ctx{&sc, &view, P.min_duration};
      ExecResult res = execute(st.last->program, ctx);
      if (!res.ok()) continue;
      std::string ans;
      try {
        ans = answer_string(*res.value);
      } catch (const DataError&) {
        continue;
      }
      if (std::find(sup.begin(), sup.end(), ans) == sup.end()) continue;
      if (!bal.admit(et, ans)) continue;
      bool same = ans == st.last->answer;
      TC tc{c, std::move(ans), same, std::move(res.node_values), std::move(sc)};
      if (same == prefer_same) {
        best = std::move(tc);
        break;
      }
      if (!best) best = std::move(tc);
    }
    if (!best) return false;

    std::string q;
    bool restate = rng.bernoulli(P.p_restate);
    if (!restate) {
      std::vector<std::string> opts = reg.transfer_phrases("temporal");
      rng.shuffle(opts);
      for (const auto& ph : opts)
        if (!texts.count(ph)) {
          q = ph;
          break;
        }
      if (q.empty()) restate = true;
    }
    if (restate) q = st.last->question;

    QAInstance qa;
    qa.template_id = st.last->template_id;
    qa.type = st.last->type;
    qa.sub_type = st.last->sub_type;
    qa.question = q;
    qa.answer = best->ans;
    qa.program = st.last->program;
    qa.cutoff = best->c;
    qa.interval_node = st.last->interval_node;
    if (st.last->interval.kind == IntervalKind::none)
      qa.interval = {0.0, best->c, IntervalKind::none};
    else if (qa.interval_node >= 0)
      qa.interval = std::get<VideoInterval>(best->trace[static_cast<std::size_t>(qa.interval_node)]);
    else
      qa.interval = {0.0, best->c, classify_interval(best->sc, 0.0, best->c)};
    qa.tt = std::string("temporal");
    qa.focal_ids = object_outputs(best->trace);
    qa.anchor_interval = anchor_interval_of(qa.program, best->trace);
    qa.anchor_kind = st.last->anchor_kind;
    for (int id : qa.focal_ids) qa.mentions.emplace_back(id, std::vector<std::string>{});
    for (const auto& v : best->trace)
      if (const auto* r = std::get_if<ObjectRef>(&v))
        qa.mentions.emplace_back(r->id, std::vector<std::string>{});
    qa.contained_count = contained_mentions(best->sc, qa);

    st.cutoff = best->c;
    trunc = std::move(best->sc);
    accept_turn(et, std::move(qa), t, !restate, best->same);
    ++updates_done;
    return true;
  }

  // ---- topic transfer: swap one attribute value or spatial relation -------

  bool try_swap_tt(int t) {
    if (!st.last) return false;
    const Program& base = st.last->program;
    const int iv_node = st.last->interval_node;

    struct Spec {
      int node;
      std::string mode;  // spatial | value | query
      std::string value;
      std::string kind;  // attribute kind for value swaps
    };
    std::vector<Spec> specs;
    for (int i = 0; i < static_cast<int>(base.nodes.size()); ++i) {
      if (i <= iv_node) continue;  // the temporal scope is not the topic here
      const auto& n = base.nodes[i];
      if (n.module == "relate_spatial") {
        const std::string cur = std::get<std::string>(n.side.at(0));
        for (const char* r : {"left", "right", "front", "behind"})
          if (cur != r) specs.push_back({i, "spatial", r, ""});
      } else if (n.module.rfind("filter_", 0) == 0 && n.module != "filter_action") {
        std::string kind = n.module.substr(7);
        const std::string cur = std::get<std::string>(n.side.at(0));
        for (const auto& v : domain_of_kind(kind))
          if (v != cur) specs.push_back({i, "value", v, kind});
      }
    }
    if (st.last->template_id.rfind("attq_", 0) == 0 && st.last->focal_ids.size() == 1) {
      std::set<std::string> used = {st.last->sub_type};
      for (const auto& n : base.nodes)
        if (n.module.rfind("filter_", 0) == 0 && n.module != "filter_action")
          used.insert(n.module.substr(7));
      const TrackedObject* tr = st.tracked(st.last->focal_ids.front());
      for (const char* kind : {"size", "color", "material", "shape"}) {
        if (used.count(kind)) continue;
        bool revealed = false;
        if (tr)
          for (const auto& v : tr->revealed_attrs)
            if (kind_of_value(v) == kind) revealed = true;
        if (revealed) continue;
        specs.push_back({static_cast<int>(base.nodes.size()) - 1, "query", kind, ""});
      }
    }
    if (specs.empty()) return false;
    rng.shuffle(specs);
    bool prefer_same = bal.tt_prefer_same();

    struct SC {
      QAInstance qa;
      std::string tid;
      bool same;
    };
    std::optional<SC> best;
    int evals = 0;
    for (const auto& sp : specs) {
      if (++evals > 16) break;
      Program p = base;
      std::string tid = st.last->template_id;
      std::string sub = st.last->sub_type;
      if (sp.mode == "spatial" || sp.mode == "value") {
        p.nodes[static_cast<std::size_t>(sp.node)].side[0] = sp.value;
      } else {
        tid = "attq_" + sp.value;
        sub = sp.value;
        p.nodes[static_cast<std::size_t>(sp.node)].module = "query_" + sp.value;
      }
      const TemplateDef& et = reg.by_id(tid);
      StateView view = st.exec_view();
      ExecContext ctx{&trunc, &view, P.min_duration};
      ExecResult res = execute(p, ctx);
      if (!res.ok()) continue;
      std::string ans;
      try {
        ans = answer_string(*res.value);
      } catch (const DataError&) {
        continue;
      }
      const std::vector<std::string> sup = supported_answers(et);
      if (std::find(sup.begin(), sup.end(), ans) == sup.end()) continue;
      if (!bal.admit(et, ans)) continue;

      std::string q;
      if (sp.mode == "spatial") {
        q = realize_pattern(pick_phrase(reg, rng, "spatial"),
                            {{"relnoun", pick_word(reg, rng, "rel_noun", sp.value)}});
      } else if (sp.mode == "query") {
        q = realize_pattern(pick_phrase(reg, rng, "attribute_query_swap"),
                            {{"attr", sp.value}});
      } else {
        const bool plural = tid.rfind("oc_", 0) == 0 || tid.rfind("oe_", 0) == 0;
        std::string list = sp.kind == "shape"
                               ? (plural ? "attribute_value_swap_shape_plural"
                                         : "attribute_value_swap_shape")
                               : (plural ? "attribute_value_swap_plural"
                                         : "attribute_value_swap");
        q = realize_pattern(pick_phrase(reg, rng, list),
                            {{"value", value_surface(reg, rng, sp.kind, sp.value, plural)}});
      }
      if (texts.count(q)) continue;

      QAInstance qa;
      qa.template_id = tid;
      qa.type = et.type;
      qa.sub_type = sub;
      qa.question = std::move(q);
      qa.answer = ans;
      qa.program = std::move(p);
      qa.cutoff = st.cutoff;
      qa.interval_node = iv_node;
      qa.interval = st.last->interval;
      qa.tt = std::string(sp.mode == "spatial" ? "spatial" : "attribute");
      qa.focal_ids = object_outputs(res.node_values);
      qa.anchor_interval = anchor_interval_of(qa.program, res.node_values);
      qa.anchor_kind = st.last->anchor_kind;
      for (int id : qa.focal_ids) qa.mentions.emplace_back(id, std::vector<std::string>{});
      for (const auto& v : res.node_values)
        if (const auto* r = std::get_if<ObjectRef>(&v))
          qa.mentions.emplace_back(r->id, std::vector<std::string>{});
      qa.contained_count = contained_mentions(trunc, qa);

      bool same = ans == st.last->answer;
      SC sc{std::move(qa), tid, same};
      if (same == prefer_same) {
        best = std::move(sc);
        break;
      }
      if (!best) best = std::move(sc);
    }
    if (!best) return false;
    accept_turn(reg.by_id(best->tid), std::move(best->qa), t, true, best->same);
    return true;
  }

  // ---- ordinary turns -----------------------------------------------------

  void plan_or(ORPlan& orp, int t) {
    bool can_short = st.last && st.last->focal_ids.size() == 1;
    struct LR {
      int id;
      double w;
    };
    std::vector<LR> longs;
    for (const auto& tr : st.tracker) {
      int d = t - tr.last_mention;
      if (d >= 2) longs.push_back({tr.id, std::pow(0.45, d - 2)});
    }
    if (can_short && (longs.empty() || rng.bernoulli(P.p_or_short))) {
      orp.kind = ORPlan::Kind::short_term;
      return;
    }
    if (!longs.empty()) {
      std::vector<double> ws;
      for (const auto& l : longs) ws.push_back(l.w);
      orp.kind = ORPlan::Kind::long_term;
      orp.referent_id = longs[static_cast<std::size_t>(rng.weighted(ws))].id;
    }
  }

  bool entailed(const QAInstance& qa) const {
    if (qa.type == QuestionType::attribute_query && qa.focal_ids.size() == 1) {
      const TrackedObject* tr = st.tracked(qa.focal_ids.front());
      if (tr)
        for (const auto& v : tr->revealed_attrs)
          if (kind_of_value(v) == qa.sub_type) return true;
    }
    if (qa.predicate_pure && !qa.predicate_attrs.empty()) {
      std::vector<std::string> key = qa.predicate_attrs;
      std::sort(key.begin(), key.end());
      for (const auto& f : st.facts) {
        if (f.attrs == key) return true;
        if (f.count == 0 &&
            std::includes(key.begin(), key.end(), f.attrs.begin(), f.attrs.end()))
          return true;
      }
    }
    return false;
  }

  bool regular_turn(int t, bool relax) {
    const bool need_related = t >= 2;
    TRPlan tr;
    ORPlan orp;
    IntervalBinding binding;
    bool have_binding = false;

    if (need_related && rng.bernoulli(P.p_tr)) {
      tr.use = true;
      int w = rng.weighted({0.40, 0.25, 0.35});
      tr.rel = w == 0 ? TemporalRel::during : w == 1 ? TemporalRel::before : TemporalRel::after;
      tr.via_refer =
          st.last && st.last->anchor_interval.has_value() && rng.bernoulli(P.p_tr_refer);
      auto b = build_tr_binding(trunc, st, tr, rng, reg, P.min_duration);
      if (b) {
        binding = std::move(*b);
        have_binding = true;
      } else {
        tr.use = false;
      }
    }
    if (need_related && rng.bernoulli(P.p_or)) plan_or(orp, t);
    if (need_related && !tr.use && orp.kind == ORPlan::Kind::none) {
      plan_or(orp, t);
      if (orp.kind == ORPlan::Kind::none) {
        tr.use = true;
        tr.rel = TemporalRel::during;
        tr.via_refer = false;
        auto b = build_tr_binding(trunc, st, tr, rng, reg, P.min_duration);
        if (!b) return false;
        binding = std::move(*b);
        have_binding = true;
      }
    }

    std::vector<const TemplateDef*> pool;
    std::vector<double> ws;
    for (const auto& td : reg.all()) {
      if (orp.kind != ORPlan::Kind::none && !or_capable(td.id)) continue;
      if (have_binding && !class_matches(td.interval_class, binding.interval.kind)) continue;
      pool.push_back(&td);
      ws.push_back(template_weight(P, td.id));
    }
    if (pool.empty()) return false;
    const TemplateDef& tmpl = *pool[static_cast<std::size_t>(rng.weighted(ws))];

    InstantiateRequest req;
    req.tmpl = &tmpl;
    if (have_binding) {
      req.binding = binding;
    } else {
      auto b = sample_interval_binding(trunc, tmpl.interval_class, rng, reg, P.min_duration);
      if (!b) return false;
      req.binding = std::move(*b);
    }
    req.or_plan = orp;
    req.targets = bal.preferences(tmpl, rng, P.targets_per_turn);
    req.tries_per_target = P.tries_per_target;

    InstantiateResult r = instantiate(reg, req, trunc, st, rng, P.min_duration);
    if (!r.ok) return false;
    QAInstance qa = std::move(r.qa);
    if (need_related && !qa.tr.has_value() && qa.or_refs.empty()) return false;
    if (texts.count(qa.question)) return false;
    if (entailed(qa)) return false;
    if (relax) {
      // the balance gate is lifted, the answer-domain contract is not
      const auto dom = supported_answers(tmpl);
      if (std::find(dom.begin(), dom.end(), qa.answer) == dom.end()) return false;
    } else if (!bal.admit(tmpl, qa.answer)) {
      return false;
    }
    accept_turn(tmpl, std::move(qa), t, true, std::nullopt);
    return true;
  }

  void accept_turn(const TemplateDef& et, QAInstance&& qa, int turn_no, bool add_text,
                   std::optional<bool> tt_same) {
    bal.commit(et, qa.answer);
    commits.emplace_back(et.id, qa.answer);
    if (tt_same) {
      bal.tt_commit(*tt_same);
      tt_commits.push_back(*tt_same);
    }
    if (add_text) texts.insert(qa.question);

    for (const auto& [id, attrs] : qa.mentions) {
      TrackedObject& tr = st.track(id, turn_no);
      tr.last_mention = turn_no;
      for (const auto& v : attrs) tr.reveal(v);
    }
    for (int id : qa.focal_ids) st.track(id, turn_no).last_mention = turn_no;
    if (qa.type == QuestionType::attribute_query && qa.focal_ids.size() == 1)
      st.track(qa.focal_ids.front(), turn_no).reveal(qa.answer);
    if (qa.predicate_pure && !qa.predicate_attrs.empty() &&
        qa.type == QuestionType::object_count) {
      CountFact f;
      f.attrs = qa.predicate_attrs;
      std::sort(f.attrs.begin(), f.attrs.end());
      f.count = std::stoi(qa.answer);
      bool dup = false;
      for (const auto& g : st.facts)
        if (g.attrs == f.attrs) dup = true;
      if (!dup) st.facts.push_back(std::move(f));
    }

    LastTurn lt;
    lt.template_id = qa.template_id;
    lt.type = qa.type;
    lt.sub_type = qa.sub_type;
    lt.question = qa.question;
    lt.answer = qa.answer;
    lt.program = qa.program;
    lt.focal_ids = qa.focal_ids;
    lt.interval = qa.interval;
    lt.interval_node = qa.interval_node;
    lt.anchor_interval = qa.anchor_interval;
    lt.anchor_kind = qa.anchor_kind;
    st.last = std::move(lt);
    st.turns_done = turn_no;

    std::vector<int> snap;
    for (const auto& tr : st.tracker) snap.push_back(tr.id);
    out.tracked_after.push_back(std::move(snap));
    out.turns.push_back(std::move(qa));
  }
};

}  // namespace

double template_weight(const GenParams& params, const std::string& id) {
  auto it = params.template_weights.find(id);
  if (it != params.template_weights.end()) return it->second;
  auto dt = default_weights().find(id);
  return dt != default_weights().end() ? dt->second : 0.02;
}

Dialogue generate_dialogue(const SceneGraph& scene, const TemplateRegistry& reg,
                           const GenParams& params, AnswerBalancer& balancer,
                           std::uint64_t seed, const std::string& dialogue_id) {
  for (int r = 0; r <= params.max_restarts; ++r) {
    Builder b(scene, reg, params, balancer,
              Rng(derive_seed(seed, 0xd1a1ull, static_cast<std::uint64_t>(r))));
    b.out.dialogue_id = dialogue_id;
    b.out.video_id = scene.video_id;
    if (b.build()) return std::move(b.out);
    b.rollback();
  }
  throw GenerationError("dialogue generation exhausted restarts for scene " + scene.video_id);
}

}  // namespace vgdial
