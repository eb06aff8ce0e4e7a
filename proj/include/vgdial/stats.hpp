#pragma once

#include <array>
#include <map>
#include <string>

#include "vgdial/corpus.hpp"
#include "vgdial/templates.hpp"

namespace vgdial {

// Corpus-level distribution summary; the CSV writer mirrors these fields so
// every histogram can be plotted without re-parsing the corpus.
struct StatsReport {
  long long scenes = 0;
  long long dialogues = 0;
  long long turns = 0;

  std::map<std::string, long long> question_types;
  std::map<std::string, long long> templates;
  std::map<std::string, long long> interval_types;
  double compositional_share = 0.0;

  std::map<std::string, std::map<std::string, long long>> answers_by_template;
  // worst observed max/min answer frequency ratio across templates; a
  // supported answer that never occurs reports as infinity
  double max_balance_ratio = 0.0;
  std::string worst_balance_template;

  double mean_tokens = 0.0;
  std::map<int, long long> token_hist;
  double mean_program_size = 0.0;
  std::map<int, long long> program_hist;

  double mean_tt_per_dialogue = 0.0;
  std::map<std::string, long long> tt_kinds;
  std::map<int, long long> tt_per_dialogue_hist;
  double mean_tr_per_dialogue = 0.0;
  std::map<std::string, long long> tr_kinds;
  std::map<int, long long> tr_per_dialogue_hist;
  double mean_or_per_dialogue = 0.0;
  std::map<int, long long> or_distances;
  int or_distance_mode = 0;
  std::map<int, long long> or_per_dialogue_hist;

  double mean_cutoff_updates = 0.0;
  std::map<int, long long> cutoff_updates_per_dialogue;
  std::map<int, long long> cutoff_update_turns;  // which turn positions advance

  double mean_active_objects = 0.0;              // tracked objects at dialogue end
  std::map<int, double> active_objects_by_turn;  // mean tracked after each turn

  double unique_question_share = 0.0;
  long long relation_annotated_turns = 0;  // turns carrying TR, OR or TT

  // mean share of each turn position's focal span falling into each tenth of
  // the full video; rows are turn positions
  std::array<std::array<double, 10>, 10> segment_matrix{};
};

StatsReport corpus_statistics(const Corpus& corpus, const TemplateRegistry& reg);

std::string stats_report_json(const StatsReport& r);

// writes stats.json plus one CSV per distribution into dir
void write_stats_files(const StatsReport& r, const std::string& dir);

}  // namespace vgdial
