#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/rng.hpp"
#include "vgdial/scene.hpp"
#include "vgdial/state.hpp"

namespace vgdial {

// Interval requirement class of a question template. Spatial questions are
// only well defined over atomic intervals, so the atomic class is split by
// whether the template contains a spatial predicate.
enum class IntervalClass {
  atomic_spatial,
  atomic_nonspatial,
  compositional,
  none,
};

std::string to_string(IntervalClass c);
IntervalClass interval_class_from_string(const std::string& s);

struct TemplateDef {
  std::string id;
  QuestionType type = QuestionType::object_exist;
  std::string sub_type;
  IntervalClass interval_class = IntervalClass::none;
  std::string answer_kind;  // binary, integer, action, action_set, size, ...
  std::vector<std::string> text;  // surface patterns with <slot> markers
};

// Thrown by realize_text when a pattern slot has no binding.
struct UnboundSlotError : std::runtime_error {
  explicit UnboundSlotError(const std::string& slot)
    : std::runtime_error("unbound template slot <" + slot + ">") {}
};

// Fills <slot> markers of pattern variant `variant` from `bindings`.
std::string realize_text(const TemplateDef& t, int variant,
                         const std::map<std::string, std::string>& bindings);
std::string realize_pattern(const std::string& pattern,
                            const std::map<std::string, std::string>& bindings);

class TemplateRegistry {
public:
  static TemplateRegistry load(const std::string& path);

  const std::vector<TemplateDef>& all() const { return templates_; }
  const TemplateDef& by_id(const std::string& id) const;
  bool has(const std::string& id) const;

  // Elliptical follow-up patterns for topic transfer turns, keyed by kind
  // (attribute_query_swap, attribute_value_swap, spatial, temporal).
  const std::vector<std::string>& transfer_phrases(const std::string& kind) const;

  // Lexicon lookups. Grouped entries map a canonical token (attribute value,
  // action name, relation name, ...) to its surface synonyms.
  const std::vector<std::string>& lex(const std::string& group,
                                      const std::string& key) const;
  const std::vector<std::string>& lex(const std::string& group) const;

private:
  std::vector<TemplateDef> templates_;
  std::map<std::string, int> index_;
  std::map<std::string, std::vector<std::string>> plain_lex_;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> group_lex_;
  std::map<std::string, std::vector<std::string>> transfer_;
};

// The answers a template is allowed to produce. Answer steering and balance
// accounting both run over this set.
std::vector<std::string> supported_answers(const TemplateDef& t);

// How the temporal scope of a turn is established.
struct TRPlan {
  bool use = false;             // reuse the previous turn's interval
  TemporalRel rel = TemporalRel::during;
  bool via_refer = false;       // refer_interval (event anchor) vs track_interval
};

// How the main object slot of a turn is referenced.
struct ORPlan {
  enum class Kind { none, short_term, long_term };
  Kind kind = Kind::none;
  int referent_id = -1;  // required for long_term
};

// A resolved temporal scope: prefix program nodes that compute the focal
// interval, the evaluated interval itself, and the surface phrase.
struct IntervalBinding {
  IntervalClass cls = IntervalClass::none;
  VideoInterval interval{0.0, 0.0, IntervalKind::none};
  std::vector<ProgramNode> prefix;   // empty for whole-video and none scopes
  int interval_node = -1;            // index into prefix, -1 if implicit
  std::string phrase;                // leading temporal phrase, "" for none
  std::vector<int> anchor_object_ids;
  std::optional<ActionKind> anchor_kind;
  std::optional<TemporalRel> tr;     // set when built from the previous turn
  // attribute values used to describe each anchor object in the phrase
  std::vector<std::pair<int, std::vector<std::string>>> mentions;
};

// Builds the temporal scope for a turn that reuses the previous interval.
// Returns nullopt when the previous turn cannot support the plan or the
// derived span is shorter than min_duration.
std::optional<IntervalBinding> build_tr_binding(const SceneGraph& scene,
                                                const DialogueState& state,
                                                const TRPlan& plan, Rng& rng,
                                                const TemplateRegistry& reg,
                                                double min_duration);

// Samples a fresh event-anchored or whole-video scope of the requested class.
std::optional<IntervalBinding> sample_interval_binding(const SceneGraph& scene,
                                                       IntervalClass need,
                                                       Rng& rng,
                                                       const TemplateRegistry& reg,
                                                       double min_duration);

// A fully instantiated question turn.
struct QAInstance {
  std::string template_id;
  QuestionType type = QuestionType::object_exist;
  std::string sub_type;
  std::string question;
  std::string answer;
  Program program;
  VideoInterval interval{0.0, 0.0, IntervalKind::none};
  int interval_node = -1;  // program node holding the focal interval
  double cutoff = 0.0;
  std::optional<TemporalRel> tr;
  struct ORRef {
    int distance = 0;
    int object_id = -1;
  };
  std::vector<ORRef> or_refs;
  std::optional<std::string> tt;  // attribute, spatial or temporal

  // Object outputs and the event-anchor span feed the next turn's context
  // and are stored with the turn; the rest is generation-side bookkeeping.
  std::vector<int> focal_ids;
  std::vector<std::pair<int, std::vector<std::string>>> mentions;
  std::vector<std::string> predicate_attrs;  // attrs of a pure count/exist
  bool predicate_pure = false;  // no action or spatial component in predicate
  std::optional<VideoInterval> anchor_interval;
  std::optional<ActionKind> anchor_kind;
  int contained_count = 0;
};

struct InstantiateRequest {
  const TemplateDef* tmpl = nullptr;
  IntervalBinding binding;
  ORPlan or_plan;
  // Answers to try for, most preferred first. The binder falls back to any
  // valid answer when none of these can be hit within budget.
  std::vector<std::string> targets;
  int tries_per_target = 6;
};

struct InstantiateResult {
  bool ok = false;
  QAInstance qa;
  std::string reject_reason;
};

// Binds all free slots of the template, assembles the functional program,
// executes it over the truncated scene, and renders the surface question.
InstantiateResult instantiate(const TemplateRegistry& reg,
                              const InstantiateRequest& req,
                              const SceneGraph& truncated,
                              const DialogueState& state, Rng& rng,
                              double min_duration = 0.5);

}  // namespace vgdial
