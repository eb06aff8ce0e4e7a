#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vgdial/corpus.hpp"

namespace vgdial {

class EmptyTrain : public DataError {
public:
  EmptyTrain() : DataError("training split holds no turns") {}
};

class MissingPrediction : public DataError {
public:
  explicit MissingPrediction(const std::string& what) : DataError(what) {}
};

class SchemaError : public DataError {
public:
  explicit SchemaError(const std::string& what) : DataError(what) {}
};

// One predicted turn. Answer is required; the state / interval payloads are
// only read by the dialogue-state and interval-identification metrics.
struct Prediction {
  std::string dialogue_id;
  int turn = 0;  // 1-based
  std::string answer;
  std::optional<std::vector<std::pair<int, ObjectAttrs>>> state;
  std::optional<VideoInterval> interval;              // raw span
  std::vector<std::pair<double, double>> ranking;     // ranked candidate spans
};

// JSON-lines: {"dialogue_id": ..., "turn": n, "answer": ...} with optional
// "state", "interval", "ranking" fields. Throws SchemaError.
std::vector<Prediction> parse_predictions(const std::string& text);
std::vector<Prediction> load_predictions(const std::string& path);

enum class BaselineKind { answer_prior, qtype_random, qtype_freq, q_retrieval_tfidf };

BaselineKind baseline_from_string(const std::string& name);  // throws ConfigError
std::string to_string(BaselineKind k);

// Fits on the train split, predicts every turn of the eval split. The random
// mode derives one rng stream per turn from (seed, dialogue, turn), so a
// prediction depends on nothing but the turn identity.
std::vector<Prediction> run_baseline(BaselineKind kind, const Split& train,
                                     const Split& eval_split, std::uint64_t seed = 0);

struct SliceStat {
  long long n = 0;
  double accuracy = 0.0;
};

struct MetricReport {
  long long turns = 0;
  double overall_accuracy = 0.0;
  std::map<std::string, SliceStat> by_question_type;
  // none / atomic_spatial / atomic_nonspatial / compositional
  std::map<std::string, SliceStat> by_interval_type;
  std::map<int, SliceStat> by_contained_count;
  // deciles of interval length among defined (non-"none") intervals
  std::map<int, SliceStat> by_interval_length_decile;
  // temporal-relation turns, minus those answerable without localizing
  std::map<std::string, SliceStat> by_tr_type;
  std::map<int, SliceStat> by_turn_position;
  // object-reference turns, minus those the video alone resolves
  std::map<int, SliceStat> by_or_distance;
  // accuracy on transferred questions whose source turn was answered right
  std::optional<double> transferability;
  long long transfer_pairs = 0;
  std::optional<double> dot_joint, dot_slot;
  std::optional<double> vit_rank1, vit_rank2, vit_miou;
};

// Scores predictions over one split; needs the corpus for scenes (the TR/OR
// slice filters re-execute programs) and the registry for template metadata.
MetricReport evaluate(const std::vector<Prediction>& preds, const Corpus& corpus,
                      const std::string& split_name, const TemplateRegistry& reg);

std::string metric_report_json(const MetricReport& r);

// Interval category of a turn: "none", "compositional", or the atomic pair
// split by whether the template carries a spatial predicate.
std::string interval_category(const QAInstance& qa, const TemplateRegistry& reg);

}  // namespace vgdial
