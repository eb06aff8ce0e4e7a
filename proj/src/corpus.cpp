#include "vgdial/corpus.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <thread>

namespace vgdial {

using nlohmann::json;

const Split* Corpus::split(const std::string& name) const {
  for (const auto& s : splits)
    if (s.name == name) return &s;
  return nullptr;
}

const SceneGraph* Corpus::scene(const std::string& video_id) const {
  for (const auto& s : splits)
    for (const auto& sc : s.scenes)
      if (sc.video_id == video_id) return &sc;
  return nullptr;
}

long long Corpus::total_turns() const {
  long long n = 0;
  for (const auto& s : splits)
    for (const auto& d : s.dialogues) n += static_cast<long long>(d.turns.size());
  return n;
}

int worker_count() {
  if (const char* env = std::getenv("VGDIAL_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 16);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return std::clamp(static_cast<int>(hc), 1, 16);
}

namespace {

// A dialogue needs enough motion structure for its cutoff plan: some interior
// boundary past a third of the video with at least one boundary after it.
bool scene_suitable(const SceneGraph& sg) {
  std::vector<double> ts = scene_timestamps(sg);
  int m = static_cast<int>(ts.size());
  if (m < 4) return false;
  for (int i = 1; i + 1 < m; ++i)
    if (ts[static_cast<std::size_t>(i)] >= 0.35 * sg.duration) return true;
  return false;
}

SceneGraph make_scene(const RunConfig& cfg, std::uint64_t stream, int index,
                      const std::string& split_name) {
  SceneConfig sc;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::uint64_t seed =
        derive_seed(cfg.seed, stream, static_cast<std::uint64_t>(index) * 64 + attempt);
    SceneGraph sg = simulate_scene(sc, seed);
    if (!validate_scene(sg).empty()) continue;
    if (!scene_suitable(sg)) continue;
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%05d", index);
    sg.video_id = split_name + buf;
    return sg;
  }
  throw DataError("no usable scene after 64 attempts for " + split_name +
                  " index " + std::to_string(index));
}

struct SplitSpec {
  const char* name;
  int n;
  std::uint64_t stream;
};

}  // namespace

Corpus generate_corpus(const RunConfig& cfg, const TemplateRegistry& reg) {
  validate_config(cfg);
  Corpus c;
  c.config = cfg;
  GenParams gp = gen_params(cfg);
  AnswerBalancer bal(gp.balance_ratio, gp.balance_slack);

  const SplitSpec specs[] = {{"train", cfg.train_scenes, 0x741aull},
                             {"val", cfg.val_scenes, 0x7a1bull},
                             {"test", cfg.test_scenes, 0x7e5cull}};
  for (const SplitSpec& spec : specs) {
    Split s;
    s.name = spec.name;
    s.scenes.resize(static_cast<std::size_t>(spec.n));
    parallel_for(spec.n, worker_count(), [&](int i) {
      s.scenes[static_cast<std::size_t>(i)] = make_scene(cfg, spec.stream, i, spec.name);
    });

    for (int i = 0; i < spec.n; ++i) {
      const SceneGraph& scene = s.scenes[static_cast<std::size_t>(i)];
      std::uint64_t sbase = derive_seed(cfg.seed, spec.stream ^ 0xd1a0ull,
                                        static_cast<std::uint64_t>(i));
      for (int d = 0; d < cfg.dialogues_per_scene; ++d) {
        std::string id = scene.video_id + "_d" + std::to_string(d);
        std::string err;
        bool done = false;
        for (int retry = 0; retry < 5 && !done; ++retry) {
          try {
            s.dialogues.push_back(generate_dialogue(
                scene, reg, gp, bal,
                derive_seed(sbase, 0xd100ull + static_cast<std::uint64_t>(d),
                            static_cast<std::uint64_t>(retry)),
                id));
            done = true;
          } catch (const GenerationError& e) {
            err = e.what();
          }
        }
        if (!done) throw DataError("generation failed for " + id + ": " + err);
      }
    }
    c.splits.push_back(std::move(s));
  }
  return c;
}

namespace {

json interval_json(const VideoInterval& iv) {
  return {{"start", iv.start}, {"end", iv.end}, {"kind", to_string(iv.kind)}};
}

VideoInterval interval_from(const json& j) {
  VideoInterval iv;
  iv.start = j.at("start").get<double>();
  iv.end = j.at("end").get<double>();
  iv.kind = interval_kind_from_string(j.at("kind").get<std::string>());
  return iv;
}

json turn_json(const QAInstance& qa, int turn_no, const SceneGraph& scene,
               const std::vector<int>& tracked) {
  json rel;
  rel["tr"] = qa.tr ? json(to_string(*qa.tr)) : json(nullptr);
  json ors = json::array();
  for (const auto& r : qa.or_refs) ors.push_back({{"distance", r.distance}, {"object", r.object_id}});
  rel["or"] = std::move(ors);
  rel["tt"] = qa.tt ? json(*qa.tt) : json(nullptr);

  json objs = json::array();
  for (int id : tracked) {
    const ObjectAttrs& a = scene.at(id).attrs;
    objs.push_back({{"id", id},
                    {"size", to_string(a.size)},
                    {"color", to_string(a.color)},
                    {"material", to_string(a.material)},
                    {"shape", to_string(a.shape)}});
  }

  json t;
  t["turn"] = turn_no;
  t["question"] = qa.question;
  t["answer"] = qa.answer;
  t["question_type"] = to_string(qa.type);
  t["sub_type"] = qa.sub_type;
  t["template_id"] = qa.template_id;
  t["program"] = print_program(qa.program);
  t["interval"] = interval_json(qa.interval);
  t["interval_node"] = qa.interval_node;
  t["cutoff"] = qa.cutoff;
  t["relations"] = std::move(rel);
  t["focal_objects"] = qa.focal_ids;
  t["anchor_interval"] = qa.anchor_interval
                             ? json{{"start", qa.anchor_interval->start},
                                    {"end", qa.anchor_interval->end}}
                             : json(nullptr);
  t["contained_object_count"] = qa.contained_count;
  t["state"] = {{"objects", std::move(objs)}};
  return t;
}

json dialogue_json(const Dialogue& d, const SceneGraph& scene) {
  json turns = json::array();
  for (std::size_t t = 0; t < d.turns.size(); ++t)
    turns.push_back(turn_json(d.turns[t], static_cast<int>(t) + 1, scene, d.tracked_after[t]));
  return {{"dialogue_id", d.dialogue_id}, {"video_id", d.video_id}, {"turns", std::move(turns)}};
}

QAInstance turn_from(const json& j) {
  QAInstance qa;
  qa.question = j.at("question").get<std::string>();
  qa.answer = j.at("answer").get<std::string>();
  qa.type = question_type_from_string(j.at("question_type").get<std::string>());
  qa.sub_type = j.at("sub_type").get<std::string>();
  qa.template_id = j.at("template_id").get<std::string>();
  qa.program = parse_program(j.at("program").get<std::string>());
  qa.interval = interval_from(j.at("interval"));
  qa.interval_node = j.at("interval_node").get<int>();
  qa.cutoff = j.at("cutoff").get<double>();
  const json& rel = j.at("relations");
  if (!rel.at("tr").is_null())
    qa.tr = temporal_from_string(rel.at("tr").get<std::string>());
  for (const json& r : rel.at("or"))
    qa.or_refs.push_back({r.at("distance").get<int>(), r.at("object").get<int>()});
  if (!rel.at("tt").is_null()) qa.tt = rel.at("tt").get<std::string>();
  qa.focal_ids = j.at("focal_objects").get<std::vector<int>>();
  if (!j.at("anchor_interval").is_null()) {
    VideoInterval a;
    a.start = j.at("anchor_interval").at("start").get<double>();
    a.end = j.at("anchor_interval").at("end").get<double>();
    a.kind = IntervalKind::atomic;
    qa.anchor_interval = a;
  }
  qa.contained_count = j.at("contained_object_count").get<int>();
  return qa;
}

Dialogue dialogue_from(const json& j) {
  Dialogue d;
  d.dialogue_id = j.at("dialogue_id").get<std::string>();
  d.video_id = j.at("video_id").get<std::string>();
  int expect = 1;
  for (const json& t : j.at("turns")) {
    if (t.at("turn").get<int>() != expect)
      throw DataError("dialogue " + d.dialogue_id + ": turns out of order");
    ++expect;
    d.turns.push_back(turn_from(t));
    std::vector<int> tracked;
    for (const json& o : t.at("state").at("objects")) tracked.push_back(o.at("id").get<int>());
    d.tracked_after.push_back(std::move(tracked));
  }
  return d;
}

std::string split_scenes_text(const Split& s) {
  std::string out = "{\"scenes\":[";
  for (std::size_t i = 0; i < s.scenes.size(); ++i) {
    if (i) out += ',';
    out += scene_to_json(s.scenes[i]);
  }
  out += "]}\n";
  return out;
}

std::string split_dialogues_text(const Split& s,
                                 const std::map<std::string, const SceneGraph*>& by_id) {
  std::string out = "{\"dialogues\":[";
  for (std::size_t i = 0; i < s.dialogues.size(); ++i) {
    if (i) out += ',';
    out += dialogue_json(s.dialogues[i], *by_id.at(s.dialogues[i].video_id)).dump();
  }
  out += "]}\n";
  return out;
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  json files = json::object();
  json counts = json::object();
  fs::create_directories(dir);
  for (const auto& s : corpus.splits) {
    fs::create_directories(fs::path(dir) / s.name);
    std::map<std::string, const SceneGraph*> by_id;
    for (const auto& sc : s.scenes) by_id[sc.video_id] = &sc;

    std::string scenes_text = split_scenes_text(s);
    std::string dialogues_text = split_dialogues_text(s, by_id);
    std::string scenes_rel = s.name + "/scenes.json";
    std::string dialogues_rel = s.name + "/dialogues.json";
    write_file((fs::path(dir) / scenes_rel).string(), scenes_text);
    write_file((fs::path(dir) / dialogues_rel).string(), dialogues_text);
    files[scenes_rel] = sha256_hex(scenes_text);
    files[dialogues_rel] = sha256_hex(dialogues_text);

    long long turns = 0;
    for (const auto& d : s.dialogues) turns += static_cast<long long>(d.turns.size());
    counts[s.name] = {{"scenes", s.scenes.size()},
                      {"dialogues", s.dialogues.size()},
                      {"turns", turns}};
  }
  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["tool_version"] = kToolVersion;
  manifest["seed"] = corpus.config.seed;
  manifest["config_hash"] = config_hash(corpus.config);
  manifest["config"] = json::parse(config_canonical(corpus.config));
  manifest["counts"] = std::move(counts);
  manifest["files"] = std::move(files);
  write_file((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

Corpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  json manifest;
  try {
    manifest = json::parse(read_file((fs::path(dir) / "manifest.json").string()));
  } catch (const json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  try {
    if (manifest.at("schema_version").get<int>() != kSchemaVersion)
      throw DataError("unsupported corpus schema version");

    Corpus c;
    const json& cj = manifest.at("config");
    c.config.seed = cj.at("seed").get<std::uint64_t>();
    c.config.train_scenes = cj.at("scenes").at("train").get<int>();
    c.config.val_scenes = cj.at("scenes").at("val").get<int>();
    c.config.test_scenes = cj.at("scenes").at("test").get<int>();
    c.config.dialogues_per_scene = cj.at("dialogues_per_scene").get<int>();
    c.config.min_duration = cj.at("min_duration").get<double>();
    c.config.balance_bound = cj.at("balance_bound").get<double>();
    const json& pj = cj.at("relation_probs");
    c.config.p_tr = pj.at("tr").get<double>();
    c.config.p_or = pj.at("or").get<double>();
    c.config.p_tt_swap = pj.at("tt_swap").get<double>();
    c.config.p_cutoff_step = pj.at("cutoff_step").get<double>();

    for (const char* name : {"train", "val", "test"}) {
      Split s;
      s.name = name;
      json sj = json::parse(read_file((fs::path(dir) / name / "scenes.json").string()));
      for (const json& one : sj.at("scenes")) s.scenes.push_back(scene_from_json(one.dump()));
      json dj = json::parse(read_file((fs::path(dir) / name / "dialogues.json").string()));
      for (const json& one : dj.at("dialogues")) s.dialogues.push_back(dialogue_from(one));
      for (const auto& d : s.dialogues)
        if (d.turns.size() != d.tracked_after.size())
          throw DataError("dialogue " + d.dialogue_id + ": malformed state snapshots");
      c.splits.push_back(std::move(s));
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError("corpus " + dir + ": " + std::string(e.what()));
  }
}

StateView view_before_turn(const Dialogue& d, int index) {
  StateView v;
  if (index <= 0 || d.turns.empty()) return v;
  const QAInstance& prev = d.turns[static_cast<std::size_t>(index - 1)];
  v.has_last_turn = true;
  v.tracker_ids = d.tracked_after[static_cast<std::size_t>(index - 1)];
  v.last_focal_ids = prev.focal_ids;
  v.last_interval = prev.interval;
  v.last_anchor_interval = prev.anchor_interval;
  return v;
}

ReplayReport replay_corpus(const Corpus& corpus) {
  ReplayReport rep;
  for (const auto& s : corpus.splits) {
    std::map<std::string, const SceneGraph*> by_id;
    for (const auto& sc : s.scenes) by_id[sc.video_id] = &sc;
    for (const auto& d : s.dialogues) {
      auto it = by_id.find(d.video_id);
      if (it == by_id.end()) throw DataError("dialogue " + d.dialogue_id + ": unknown video");
      for (std::size_t t = 0; t < d.turns.size(); ++t) {
        const QAInstance& qa = d.turns[t];
        ++rep.turns;
        StateView view = view_before_turn(d, static_cast<int>(t));
        SceneGraph sc = truncate_scene(*it->second, qa.cutoff);
        ExecContext ctx{&sc, &view, corpus.config.min_duration};
        ExecResult res = execute(qa.program, ctx);
        std::string got = res.ok() ? answer_string(*res.value) : "<ill-posed: " + res.ill_posed + ">";
        if (got != qa.answer) {
          ++rep.mismatches;
          if (rep.examples.size() < 10)
            rep.examples.push_back(d.dialogue_id + " turn " + std::to_string(t + 1) + ": stored '" +
                                   qa.answer + "' replay '" + got + "'");
        }
      }
    }
  }
  return rep;
}

}  // namespace vgdial
