#pragma once

#include <string>
#include <vector>

#include "vgdial/config.hpp"
#include "vgdial/executor.hpp"

namespace vgdial {

constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct Split {
  std::string name;  // train, val or test
  std::vector<SceneGraph> scenes;
  std::vector<Dialogue> dialogues;  // scene-major, dialogue-minor order
};

struct Corpus {
  RunConfig config;
  std::vector<Split> splits;

  const Split* split(const std::string& name) const;
  // scene lookup across splits; null when unknown
  const SceneGraph* scene(const std::string& video_id) const;
  long long total_turns() const;
};

// Builds all splits. Scene simulation fans out over worker threads; dialogue
// generation runs in one deterministic order because the answer balancer is
// a running tally that every admission decision reads.
Corpus generate_corpus(const RunConfig& cfg, const TemplateRegistry& reg);

// Writes <dir>/<split>/scenes.json, <dir>/<split>/dialogues.json and
// <dir>/manifest.json. Output bytes are a pure function of config + data
// files; the manifest carries no timestamps or machine paths.
void save_corpus(const Corpus& corpus, const std::string& dir);

// Throws DataError on missing files or schema violations.
Corpus load_corpus(const std::string& dir);

// Executor context for turn `index` (0-based) rebuilt from the stored turns
// before it, exactly as a model would see the dialogue history.
StateView view_before_turn(const Dialogue& d, int index);

struct ReplayReport {
  long long turns = 0;
  long long mismatches = 0;
  std::vector<std::string> examples;  // first few mismatch descriptions
};

// Re-executes every stored program against its reconstructed context and
// compares with the stored answer.
ReplayReport replay_corpus(const Corpus& corpus);

// VGDIAL_WORKERS override, else hardware concurrency, clamped to [1, 16]
int worker_count();

}  // namespace vgdial
