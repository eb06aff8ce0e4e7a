#include "vgdial/eval.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "vgdial/vocab.hpp"

namespace vgdial {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct TurnRef {
  const Dialogue* d = nullptr;
  const QAInstance* qa = nullptr;
  int turn = 0;  // 1-based
};

std::vector<TurnRef> all_turns(const Split& s) {
  std::vector<TurnRef> out;
  for (const auto& d : s.dialogues)
    for (std::size_t t = 0; t < d.turns.size(); ++t)
      out.push_back({&d, &d.turns[t], static_cast<int>(t) + 1});
  return out;
}

std::string qtype_key(const QAInstance& qa) { return to_string(qa.type) + "|" + qa.sub_type; }

std::string most_common(const std::map<std::string, long long>& counts) {
  std::string best;
  long long best_n = -1;
  for (const auto& [a, n] : counts)
    if (n > best_n) {  // map order breaks ties toward the smaller string
      best = a;
      best_n = n;
    }
  return best;
}

// ---- tf-idf retrieval ----------------------------------------------------

struct TfidfIndex {
  std::map<std::string, int> tok_ids;
  std::vector<double> idf;
  // one entry per distinct train question, ordered by first occurrence
  std::vector<std::vector<std::pair<int, double>>> docs;  // unit-norm sparse vectors
  std::vector<std::string> answers;

  std::vector<std::pair<int, double>> vectorize(const std::string& q) const {
    std::map<int, int> tf;
    for (const auto& tok : tokenize(q)) {
      auto it = tok_ids.find(tok);
      if (it != tok_ids.end()) tf[it->second]++;
    }
    std::vector<std::pair<int, double>> v;
    double norm = 0.0;
    for (const auto& [id, n] : tf) {
      double w = n * idf[static_cast<std::size_t>(id)];
      v.emplace_back(id, w);
      norm += w * w;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (auto& [id, w] : v) w /= norm;
    return v;
  }
};

double sparse_dot(const std::vector<std::pair<int, double>>& a,
                  const std::vector<std::pair<int, double>>& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first)
      ++i;
    else if (a[i].first > b[j].first)
      ++j;
    else
      s += a[i++].second * b[j++].second;
  }
  return s;
}

TfidfIndex build_tfidf(const std::vector<TurnRef>& train) {
  TfidfIndex ix;
  // document frequencies count every train instance, not distinct strings
  std::map<std::string, long long> df;
  for (const auto& t : train) {
    std::set<std::string> seen;
    for (const auto& tok : tokenize(t.qa->question))
      if (seen.insert(tok).second) df[tok]++;
  }
  for (const auto& [tok, n] : df) {
    int id = static_cast<int>(ix.tok_ids.size());
    ix.tok_ids[tok] = id;
    (void)n;
  }
  double n_docs = static_cast<double>(train.size());
  ix.idf.resize(ix.tok_ids.size());
  for (const auto& [tok, n] : df)
    ix.idf[static_cast<std::size_t>(ix.tok_ids[tok])] =
        std::log((1.0 + n_docs) / (1.0 + static_cast<double>(n))) + 1.0;

  std::set<std::string> dedup;
  for (const auto& t : train)
    if (dedup.insert(t.qa->question).second) {
      ix.docs.push_back(ix.vectorize(t.qa->question));
      ix.answers.push_back(t.qa->answer);
    }
  return ix;
}

}  // namespace

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::answer_prior: return "answer_prior";
    case BaselineKind::qtype_random: return "qtype_random";
    case BaselineKind::qtype_freq: return "qtype_freq";
    case BaselineKind::q_retrieval_tfidf: return "q_retrieval_tfidf";
  }
  return "?";
}

BaselineKind baseline_from_string(const std::string& name) {
  for (BaselineKind k : {BaselineKind::answer_prior, BaselineKind::qtype_random,
                         BaselineKind::qtype_freq, BaselineKind::q_retrieval_tfidf})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown baseline: " + name);
}

std::vector<Prediction> run_baseline(BaselineKind kind, const Split& train,
                                     const Split& eval_split, std::uint64_t seed) {
  std::vector<TurnRef> tr = all_turns(train);
  if (tr.empty()) throw EmptyTrain();
  std::vector<TurnRef> ev = all_turns(eval_split);
  std::vector<Prediction> out(ev.size());

  std::map<std::string, long long> prior_counts;
  for (const auto& t : tr) prior_counts[t.qa->answer]++;
  const std::string prior = most_common(prior_counts);

  switch (kind) {
    case BaselineKind::answer_prior: {
      for (std::size_t i = 0; i < ev.size(); ++i)
        out[i] = {ev[i].d->dialogue_id, ev[i].turn, prior, {}, {}, {}};
      break;
    }
    case BaselineKind::qtype_random: {
      for (std::size_t i = 0; i < ev.size(); ++i) {
        const auto& t = ev[i];
        std::vector<std::string> space = answer_space(t.qa->type, t.qa->sub_type);
        Rng rng(derive_seed(seed, fnv1a(t.d->dialogue_id), static_cast<std::uint64_t>(t.turn)));
        out[i] = {t.d->dialogue_id, t.turn, rng.pick(space), {}, {}, {}};
      }
      break;
    }
    case BaselineKind::qtype_freq: {
      std::map<std::string, std::map<std::string, long long>> per_key;
      for (const auto& t : tr) per_key[qtype_key(*t.qa)][t.qa->answer]++;
      for (std::size_t i = 0; i < ev.size(); ++i) {
        const auto& t = ev[i];
        auto it = per_key.find(qtype_key(*t.qa));
        std::string a = it != per_key.end() ? most_common(it->second) : prior;
        out[i] = {t.d->dialogue_id, t.turn, std::move(a), {}, {}, {}};
      }
      break;
    }
    case BaselineKind::q_retrieval_tfidf: {
      TfidfIndex ix = build_tfidf(tr);
      // score each distinct question once; duplicates are common by design
      std::map<std::string, std::string> memo;
      std::vector<const std::string*> uniq;
      for (const auto& t : ev)
        if (memo.emplace(t.qa->question, std::string()).second)
          uniq.push_back(&memo.find(t.qa->question)->first);
      std::vector<std::string> answers(uniq.size());
      parallel_for(static_cast<int>(uniq.size()), worker_count(), [&](int u) {
        auto qv = ix.vectorize(*uniq[static_cast<std::size_t>(u)]);
        double best = -1.0;
        std::size_t best_i = 0;
        for (std::size_t dix = 0; dix < ix.docs.size(); ++dix) {
          double s = sparse_dot(qv, ix.docs[dix]);
          if (s > best) {  // docs are in first-occurrence order, ties keep the earliest
            best = s;
            best_i = dix;
          }
        }
        answers[static_cast<std::size_t>(u)] = ix.answers[best_i];
      });
      for (std::size_t u = 0; u < uniq.size(); ++u) memo[*uniq[u]] = answers[u];
      for (std::size_t i = 0; i < ev.size(); ++i)
        out[i] = {ev[i].d->dialogue_id, ev[i].turn, memo[ev[i].qa->question], {}, {}, {}};
      break;
    }
  }
  return out;
}

// ---- prediction files ----------------------------------------------------

namespace {

ObjectAttrs attrs_from(const json& o) {
  ObjectAttrs a;
  try {
    a.size = size_from_string(o.at("size").get<std::string>());
    a.color = color_from_string(o.at("color").get<std::string>());
    a.material = material_from_string(o.at("material").get<std::string>());
    a.shape = shape_from_string(o.at("shape").get<std::string>());
  } catch (const DataError& e) {
    throw SchemaError(e.what());
  }
  return a;
}

}  // namespace

std::vector<Prediction> parse_predictions(const std::string& text) {
  std::vector<Prediction> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      Prediction p;
      p.dialogue_id = j.at("dialogue_id").get<std::string>();
      p.turn = j.at("turn").get<int>();
      p.answer = j.at("answer").get<std::string>();
      if (!in_answer_vocabulary(p.answer))
        throw SchemaError("line " + std::to_string(line_no) + ": answer '" + p.answer +
                          "' is outside the 40-entry vocabulary");
      if (j.contains("state")) {
        std::vector<std::pair<int, ObjectAttrs>> st;
        for (const json& o : j.at("state").at("objects"))
          st.emplace_back(o.at("id").get<int>(), attrs_from(o));
        p.state = std::move(st);
      }
      if (j.contains("interval")) {
        VideoInterval iv;
        iv.start = j.at("interval").at("start").get<double>();
        iv.end = j.at("interval").at("end").get<double>();
        p.interval = iv;
      }
      if (j.contains("ranking"))
        for (const json& r : j.at("ranking"))
          p.ranking.emplace_back(r.at(0).get<double>(), r.at(1).get<double>());
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw SchemaError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::string& path) {
  return parse_predictions(read_file(path));
}

// ---- scoring -------------------------------------------------------------

std::string interval_category(const QAInstance& qa, const TemplateRegistry& reg) {
  switch (qa.interval.kind) {
    case IntervalKind::none: return "none";
    case IntervalKind::compositional: return "compositional";
    case IntervalKind::atomic: break;
  }
  if (reg.has(qa.template_id) &&
      reg.by_id(qa.template_id).interval_class == IntervalClass::atomic_spatial)
    return "atomic_spatial";
  return "atomic_nonspatial";
}

namespace {

// Whether pinning the focal interval to the whole (truncated) video leaves
// the answer unchanged; such turns do not test temporal localization.
bool answerable_without_localizing(const Dialogue& d, int tindex, const QAInstance& qa,
                                   const SceneGraph& full, double min_duration) {
  if (qa.interval_node < 0) return true;
  SceneGraph trunc = truncate_scene(full, qa.cutoff);
  StateView view = view_before_turn(d, tindex);
  ExecContext ctx{&trunc, &view, min_duration};
  VideoInterval whole{0.0, qa.cutoff, classify_interval(trunc, 0.0, qa.cutoff)};
  ExecResult res =
      execute_with_overrides(qa.program, ctx, {{qa.interval_node, Value(whole)}});
  return res.ok() && answer_string(*res.value) == qa.answer;
}

// Whether swapping the dialogue-context reference for a plain scene scan
// still resolves to the same answer; such turns do not need the history.
bool answerable_from_video_alone(const Dialogue& d, int tindex, const QAInstance& qa,
                                 const SceneGraph& full, double min_duration) {
  Program p = qa.program;
  bool touched = false;
  for (auto& n : p.nodes)
    if (n.module == "refer_object" || n.module == "track_object") {
      n.module = "scene";
      n.inputs.clear();
      n.side.clear();
      touched = true;
    }
  if (!touched) return false;
  SceneGraph trunc = truncate_scene(full, qa.cutoff);
  StateView view = view_before_turn(d, tindex);
  ExecContext ctx{&trunc, &view, min_duration};
  ExecResult res = execute(p, ctx);
  return res.ok() && answer_string(*res.value) == qa.answer;
}

double iou(const VideoInterval& a, double bs, double be) {
  double inter = std::max(0.0, std::min(a.end, be) - std::max(a.start, bs));
  double uni = (a.end - a.start) + (be - bs) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool span_matches(const VideoInterval& a, double bs, double be) {
  return std::abs(a.start - bs) < 1e-6 && std::abs(a.end - be) < 1e-6;
}

struct Acc {
  long long n = 0;
  long long hit = 0;
  void add(bool ok) {
    ++n;
    hit += ok ? 1 : 0;
  }
  SliceStat stat() const { return {n, n ? static_cast<double>(hit) / n : 0.0}; }
};

}  // namespace

MetricReport evaluate(const std::vector<Prediction>& preds, const Corpus& corpus,
                      const std::string& split_name, const TemplateRegistry& reg) {
  const Split* split = corpus.split(split_name);
  if (!split) throw DataError("no such split: " + split_name);

  std::map<std::pair<std::string, int>, const Prediction*> index;
  for (const auto& p : preds)
    if (!index.emplace(std::make_pair(p.dialogue_id, p.turn), &p).second)
      throw DataError("duplicate prediction for " + p.dialogue_id + " turn " +
                      std::to_string(p.turn));

  std::map<std::string, const SceneGraph*> scenes;
  for (const auto& sc : split->scenes) scenes[sc.video_id] = &sc;

  struct Row {
    bool ok = false;
    std::string qtype, icat;
    int contained = 0, turn = 0;
    std::optional<double> length;
    std::optional<std::string> tr_key;
    std::vector<int> or_dists;
    bool tt = false, prev_ok = false;
  };
  std::vector<Row> rows;
  Acc overall;
  double dot_joint_sum = 0.0, dot_slot_sum = 0.0;
  long long dot_n = 0;
  long long rank_n = 0, rank1_hit = 0, rank2_hit = 0;
  double miou_sum = 0.0;
  long long miou_n = 0;

  for (const auto& d : split->dialogues) {
    auto sit = scenes.find(d.video_id);
    if (sit == scenes.end()) throw DataError("dialogue " + d.dialogue_id + ": unknown video");
    const SceneGraph& scene = *sit->second;
    bool prev_ok = false;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const QAInstance& qa = d.turns[t];
      auto pit = index.find(std::make_pair(d.dialogue_id, static_cast<int>(t) + 1));
      if (pit == index.end())
        throw MissingPrediction("no prediction for " + d.dialogue_id + " turn " +
                                std::to_string(t + 1));
      const Prediction& p = *pit->second;

      Row r;
      r.ok = p.answer == qa.answer;
      r.qtype = to_string(qa.type);
      r.icat = interval_category(qa, reg);
      r.contained = qa.contained_count;
      r.turn = static_cast<int>(t) + 1;
      if (qa.interval.kind != IntervalKind::none) r.length = qa.interval.length();
      if (qa.tr && !answerable_without_localizing(d, static_cast<int>(t), qa, scene,
                                                  corpus.config.min_duration))
        r.tr_key = to_string(*qa.tr);
      if (!qa.or_refs.empty() && !answerable_from_video_alone(d, static_cast<int>(t), qa, scene,
                                                              corpus.config.min_duration))
        for (const auto& orf : qa.or_refs) r.or_dists.push_back(orf.distance);
      r.tt = qa.tt.has_value();
      r.prev_ok = prev_ok;
      rows.push_back(r);
      overall.add(r.ok);
      prev_ok = r.ok;

      if (p.state) {
        std::vector<std::pair<int, ObjectAttrs>> truth;
        for (int id : d.tracked_after[t]) truth.emplace_back(id, scene.at(id).attrs);
        auto pred_state = *p.state;
        auto by_id = [](const auto& a, const auto& b) { return a.first < b.first; };
        std::sort(pred_state.begin(), pred_state.end(), by_id);
        std::sort(truth.begin(), truth.end(), by_id);
        dot_joint_sum += pred_state == truth ? 1.0 : 0.0;
        long long slots = 0, slot_hits = 0;
        for (const auto& [id, attrs] : truth) {
          const ObjectAttrs* got = nullptr;
          for (const auto& [pid, pattrs] : pred_state)
            if (pid == id) got = &pattrs;
          slots += 4;
          if (got) {
            slot_hits += (got->size == attrs.size) + (got->color == attrs.color) +
                         (got->material == attrs.material) + (got->shape == attrs.shape);
          }
        }
        dot_slot_sum += slots ? static_cast<double>(slot_hits) / slots : 1.0;
        ++dot_n;
      }
      if (qa.interval.kind != IntervalKind::none) {
        if (p.interval || !p.ranking.empty()) {
          double bs = p.interval ? p.interval->start : p.ranking.front().first;
          double be = p.interval ? p.interval->end : p.ranking.front().second;
          miou_sum += iou(qa.interval, bs, be);
          ++miou_n;
        }
        if (!p.ranking.empty()) {
          ++rank_n;
          bool r1 = span_matches(qa.interval, p.ranking[0].first, p.ranking[0].second);
          bool r2 = r1 || (p.ranking.size() > 1 &&
                           span_matches(qa.interval, p.ranking[1].first, p.ranking[1].second));
          rank1_hit += r1 ? 1 : 0;
          rank2_hit += r2 ? 1 : 0;
        }
      }
    }
  }

  // decile boundaries over the realized interval lengths of this split
  std::vector<double> lengths;
  for (const auto& r : rows)
    if (r.length) lengths.push_back(*r.length);
  std::sort(lengths.begin(), lengths.end());
  auto decile_of = [&](double len) {
    if (lengths.empty()) return 0;
    std::size_t rank = static_cast<std::size_t>(
        std::lower_bound(lengths.begin(), lengths.end(), len) - lengths.begin());
    return static_cast<int>(std::min<std::size_t>(9, rank * 10 / lengths.size()));
  };

  std::map<std::string, Acc> q_acc, i_acc, tr_acc;
  std::map<int, Acc> c_acc, pos_acc, or_acc, dec_acc;
  Acc transfer;
  for (const auto& r : rows) {
    q_acc[r.qtype].add(r.ok);
    i_acc[r.icat].add(r.ok);
    c_acc[r.contained].add(r.ok);
    pos_acc[r.turn].add(r.ok);
    if (r.length) dec_acc[decile_of(*r.length)].add(r.ok);
    if (r.tr_key) tr_acc[*r.tr_key].add(r.ok);
    for (int dist : r.or_dists) or_acc[dist].add(r.ok);
    if (r.tt && r.prev_ok) transfer.add(r.ok);
  }

  MetricReport rep;
  rep.turns = overall.n;
  rep.overall_accuracy = overall.stat().accuracy;
  for (const auto& [k, a] : q_acc) rep.by_question_type[k] = a.stat();
  for (const auto& [k, a] : i_acc) rep.by_interval_type[k] = a.stat();
  for (const auto& [k, a] : c_acc) rep.by_contained_count[k] = a.stat();
  for (const auto& [k, a] : dec_acc) rep.by_interval_length_decile[k] = a.stat();
  for (const auto& [k, a] : tr_acc) rep.by_tr_type[k] = a.stat();
  for (const auto& [k, a] : pos_acc) rep.by_turn_position[k] = a.stat();
  for (const auto& [k, a] : or_acc) rep.by_or_distance[k] = a.stat();
  rep.transfer_pairs = transfer.n;
  if (transfer.n) rep.transferability = transfer.stat().accuracy;
  if (dot_n) {
    rep.dot_joint = dot_joint_sum / static_cast<double>(dot_n);
    rep.dot_slot = dot_slot_sum / static_cast<double>(dot_n);
  }
  if (rank_n) {
    rep.vit_rank1 = static_cast<double>(rank1_hit) / static_cast<double>(rank_n);
    rep.vit_rank2 = static_cast<double>(rank2_hit) / static_cast<double>(rank_n);
  }
  if (miou_n) rep.vit_miou = miou_sum / static_cast<double>(miou_n);
  return rep;
}

namespace {

template <typename K>
json slice_json(const std::map<K, SliceStat>& m) {
  json out = json::object();
  for (const auto& [k, s] : m) {
    std::string key;
    if constexpr (std::is_same_v<K, std::string>)
      key = k;
    else
      key = std::to_string(k);
    out[key] = {{"n", s.n}, {"accuracy", s.accuracy}};
  }
  return out;
}

}  // namespace

std::string metric_report_json(const MetricReport& r) {
  json j;
  j["turns"] = r.turns;
  j["overall_accuracy"] = r.overall_accuracy;
  j["by_question_type"] = slice_json(r.by_question_type);
  j["by_interval_type"] = slice_json(r.by_interval_type);
  j["by_contained_count"] = slice_json(r.by_contained_count);
  j["by_interval_length_decile"] = slice_json(r.by_interval_length_decile);
  j["by_tr_type"] = slice_json(r.by_tr_type);
  j["by_turn_position"] = slice_json(r.by_turn_position);
  j["by_or_distance"] = slice_json(r.by_or_distance);
  j["transferability"] = r.transferability ? json(*r.transferability) : json(nullptr);
  j["transfer_pairs"] = r.transfer_pairs;
  j["dot"] = {{"joint", r.dot_joint ? json(*r.dot_joint) : json(nullptr)},
              {"slot", r.dot_slot ? json(*r.dot_slot) : json(nullptr)}};
  j["vit"] = {{"rank1", r.vit_rank1 ? json(*r.vit_rank1) : json(nullptr)},
              {"rank2", r.vit_rank2 ? json(*r.vit_rank2) : json(nullptr)},
              {"miou", r.vit_miou ? json(*r.vit_miou) : json(nullptr)}};
  return j.dump(2) + "\n";
}

}  // namespace vgdial
