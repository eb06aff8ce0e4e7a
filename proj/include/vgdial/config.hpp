#pragma once

#include <cstdint>
#include <string>

#include "vgdial/dialogue.hpp"

namespace vgdial {

// One knob set for a full corpus build. Split scene counts default to the
// published train:val:test proportions at one twentieth scale; everything the
// output depends on is either in here or in the data files, so hashing the
// resolved config (minus the output directory) pins the corpus bytes.
struct RunConfig {
  std::uint64_t seed = 7;

  int train_scenes = 308;
  int val_scenes = 77;
  int test_scenes = 165;
  int dialogues_per_scene = 10;

  double min_duration = 0.5;
  // audited max/min answer-frequency ratio per template; the streaming gate
  // inside generation runs tighter than this to leave slack
  double balance_bound = 1.5;

  double p_tr = 0.34;
  double p_or = 0.48;
  double p_tt_swap = 0.18;
  double p_cutoff_step = 0.30;

  std::string vocab_path;      // empty picks the installed data file
  std::string templates_path;  // likewise
  std::string output_dir = "corpus_out";
};

// Strict parse: unknown keys are an error so typos cannot silently fall back
// to defaults. Throws ConfigError.
RunConfig load_run_config(const std::string& path);

void validate_config(const RunConfig& cfg);  // throws ConfigError

// canonical JSON text of the config; excludes output_dir so relocating a
// corpus does not change its identity
std::string config_canonical(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

GenParams gen_params(const RunConfig& cfg);

std::string resolved_vocab_path(const RunConfig& cfg);
std::string resolved_templates_path(const RunConfig& cfg);

}  // namespace vgdial
