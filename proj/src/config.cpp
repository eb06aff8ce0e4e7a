#include "vgdial/config.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "vgdial/vocab.hpp"

namespace vgdial {

using nlohmann::json;

namespace {

double get_prob(const json& j, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  double v = j.at(key).get<double>();
  if (v < 0.0 || v > 1.0) throw ConfigError(std::string(key) + " must lie in [0, 1]");
  return v;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  static const std::set<std::string> known = {
      "seed",          "scenes",        "dialogues_per_scene", "min_duration",
      "balance_bound", "relation_probs", "vocab_path",         "templates_path",
      "output_dir"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "'");
  }

  RunConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scenes")) {
      const json& s = j.at("scenes");
      for (const auto& [k, v] : s.items()) {
        (void)v;
        if (k != "train" && k != "val" && k != "test")
          throw ConfigError("config: unknown split '" + k + "'");
      }
      if (s.contains("train")) cfg.train_scenes = s.at("train").get<int>();
      if (s.contains("val")) cfg.val_scenes = s.at("val").get<int>();
      if (s.contains("test")) cfg.test_scenes = s.at("test").get<int>();
    }
    if (j.contains("dialogues_per_scene"))
      cfg.dialogues_per_scene = j.at("dialogues_per_scene").get<int>();
    if (j.contains("min_duration")) cfg.min_duration = j.at("min_duration").get<double>();
    if (j.contains("balance_bound")) cfg.balance_bound = j.at("balance_bound").get<double>();
    if (j.contains("relation_probs")) {
      const json& p = j.at("relation_probs");
      static const std::set<std::string> pk = {"tr", "or", "tt_swap", "cutoff_step"};
      for (const auto& [k, v] : p.items()) {
        (void)v;
        if (!pk.count(k)) throw ConfigError("config: unknown relation prob '" + k + "'");
      }
      cfg.p_tr = get_prob(p, "tr", cfg.p_tr);
      cfg.p_or = get_prob(p, "or", cfg.p_or);
      cfg.p_tt_swap = get_prob(p, "tt_swap", cfg.p_tt_swap);
      cfg.p_cutoff_step = get_prob(p, "cutoff_step", cfg.p_cutoff_step);
    }
    if (j.contains("vocab_path")) cfg.vocab_path = j.at("vocab_path").get<std::string>();
    if (j.contains("templates_path"))
      cfg.templates_path = j.at("templates_path").get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.train_scenes < 0 || cfg.val_scenes < 0 || cfg.test_scenes < 0)
    throw ConfigError("scene counts must be non-negative");
  if (cfg.train_scenes + cfg.val_scenes + cfg.test_scenes == 0)
    throw ConfigError("at least one split must have scenes");
  if (cfg.dialogues_per_scene < 1) throw ConfigError("dialogues_per_scene must be >= 1");
  if (cfg.min_duration <= 0.0) throw ConfigError("min_duration must be positive");
  if (cfg.balance_bound < 1.0) throw ConfigError("balance_bound must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string config_canonical(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["scenes"] = {{"train", cfg.train_scenes}, {"val", cfg.val_scenes}, {"test", cfg.test_scenes}};
  j["dialogues_per_scene"] = cfg.dialogues_per_scene;
  j["min_duration"] = cfg.min_duration;
  j["balance_bound"] = cfg.balance_bound;
  j["relation_probs"] = {{"tr", cfg.p_tr},
                         {"or", cfg.p_or},
                         {"tt_swap", cfg.p_tt_swap},
                         {"cutoff_step", cfg.p_cutoff_step}};
  // identity tracks what the files say, not where they live
  j["vocab_sha256"] = sha256_file_hex(resolved_vocab_path(cfg));
  j["templates_sha256"] = sha256_file_hex(resolved_templates_path(cfg));
  return j.dump();  // object keys serialize sorted, so this is canonical
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(config_canonical(cfg)); }

GenParams gen_params(const RunConfig& cfg) {
  GenParams p;
  p.min_duration = cfg.min_duration;
  p.p_tr = cfg.p_tr;
  p.p_or = cfg.p_or;
  p.p_tt_swap = cfg.p_tt_swap;
  p.p_cutoff_step = cfg.p_cutoff_step;
  // keep the streaming gate under the audited bound (see RunConfig comment)
  p.balance_ratio = std::max(1.05, cfg.balance_bound - 0.2);
  return p;
}

std::string resolved_vocab_path(const RunConfig& cfg) {
  return cfg.vocab_path.empty() ? default_vocab_path() : cfg.vocab_path;
}

std::string resolved_templates_path(const RunConfig& cfg) {
  return cfg.templates_path.empty() ? default_templates_path() : cfg.templates_path;
}

}  // namespace vgdial
