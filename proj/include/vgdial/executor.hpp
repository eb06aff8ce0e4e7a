#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/program.hpp"
#include "vgdial/value.hpp"

namespace vgdial {

// Dialogue-state slice the executor can see.  Everything here is
// reconstructible from the stored turns of a dialogue, which is what makes
// full-corpus replay possible without serializing generator internals.
struct StateView {
  bool has_last_turn = false;
  std::vector<int> tracker_ids;                       // mention order, no dups
  std::vector<int> last_focal_ids;                    // Object outputs of the last program
  std::optional<VideoInterval> last_interval;         // last turn's focal interval
  std::optional<VideoInterval> last_anchor_interval;  // last event-anchor interval
};

struct ExecContext {
  const SceneGraph* scene = nullptr;  // pre-truncated at the turn's cutoff
  const StateView* state = nullptr;   // null on the opening turn
  double min_duration = 0.5;
};

// wrong value tags / malformed side literals: a generator bug, not a data
// condition, hence an exception rather than an outcome
class TypeMismatchError : public std::logic_error {
public:
  explicit TypeMismatchError(const std::string& what) : std::logic_error(what) {}
};

// IllPosed is an ordinary outcome: rejection sampling consumes it
struct ExecResult {
  std::optional<Value> value;
  std::string ill_posed;           // non-empty iff execution was cut short
  std::vector<Value> node_values;  // valid prefix of per-node outputs

  bool ok() const { return value.has_value(); }
};

ExecResult execute(const Program& p, const ExecContext& ctx);

// Same, but selected node outputs are pinned instead of evaluated (used to
// test whether a question is solvable without localizing its interval).
ExecResult execute_with_overrides(const Program& p, const ExecContext& ctx,
                                  const std::map<int, Value>& overrides);

// distinct ids of Object-valued node outputs, in node order
std::vector<int> object_outputs(const std::vector<Value>& trace);

// output of the last find_interval / refer_interval node, if any completed
std::optional<VideoInterval> anchor_interval_of(const Program& p,
                                                const std::vector<Value>& trace);

bool is_known_module(const std::string& name);
const std::vector<std::string>& all_module_names();  // the 32-module inventory

}  // namespace vgdial
