#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vgdial/templates.hpp"

namespace vgdial {

// Generation knobs. The defaults hit the corpus-level distribution targets;
// they are exposed mainly so tests can probe edge behaviour.
struct GenParams {
  int turns = 10;
  double min_duration = 0.5;
  int max_turn_attempts = 200;
  int max_restarts = 20;

  double p_tr = 0.34;           // reuse the previous interval
  double p_tr_refer = 0.5;      // ...via the event anchor instead of the span
  double p_or = 0.48;           // reference an earlier object
  double p_or_short = 0.30;     // ...with a pronoun rather than a description
  double p_tt_swap = 0.18;      // attribute/spatial topic transfer
  double p_cutoff_step = 0.30;  // advance the video cutoff this turn
  double p_restate = 0.5;       // temporal transfer repeats the full question

  double balance_ratio = 1.3;
  int balance_slack = 5;
  int targets_per_turn = 3;  // balance targets handed to the binder
  int tries_per_target = 6;

  std::map<std::string, double> template_weights;  // empty uses defaults
};

// Streaming per-template answer accounting. Generation asks it for
// underrepresented answers to steer toward, and for permission to keep an
// already-built candidate.
class AnswerBalancer {
public:
  AnswerBalancer(double ratio = 1.3, int slack = 5) : ratio_(ratio), slack_(slack) {}

  // supported answers ordered most-needed first (ascending observed count)
  std::vector<std::string> preferences(const TemplateDef& t, Rng& rng, int k) const;
  bool admit(const TemplateDef& t, const std::string& answer) const;
  void commit(const TemplateDef& t, const std::string& answer);
  void uncommit(const TemplateDef& t, const std::string& answer);

  // same/changed steering for recycled (topic transfer) questions
  bool tt_prefer_same() const { return tt_same_ <= tt_changed_; }
  void tt_commit(bool same) { (same ? tt_same_ : tt_changed_)++; }
  void tt_uncommit(bool same) { (same ? tt_same_ : tt_changed_)--; }
  int tt_same() const { return tt_same_; }
  int tt_changed() const { return tt_changed_; }

  const std::map<std::string, std::map<std::string, int>>& counts() const { return counts_; }

private:
  double ratio_;
  int slack_;
  std::map<std::string, std::map<std::string, int>> counts_;
  int tt_same_ = 0;
  int tt_changed_ = 0;
};

std::string balance_key(const TemplateDef& t);

struct Dialogue {
  std::string dialogue_id;
  std::string video_id;
  std::vector<QAInstance> turns;
  // object tracker snapshot after each turn, in first-mention order
  std::vector<std::vector<int>> tracked_after;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generates one dialogue over the full scene. Throws GenerationError when no
// valid dialogue can be assembled within the retry budget.
Dialogue generate_dialogue(const SceneGraph& scene, const TemplateRegistry& reg,
                           const GenParams& params, AnswerBalancer& balancer,
                           std::uint64_t seed, const std::string& dialogue_id);

// Default selection weight of a template (exposed for the statistics tool).
double template_weight(const GenParams& params, const std::string& id);

}  // namespace vgdial
