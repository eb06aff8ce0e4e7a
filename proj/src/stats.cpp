#include "vgdial/stats.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "vgdial/eval.hpp"

namespace vgdial {

using nlohmann::json;

StatsReport corpus_statistics(const Corpus& corpus, const TemplateRegistry& reg) {
  StatsReport r;
  std::set<std::string> unique_questions;
  long long token_sum = 0, program_sum = 0;
  long long tt_total = 0, tr_total = 0, or_total = 0, update_total = 0;
  long long active_sum = 0;
  std::array<long long, 10> row_turns{};

  for (const auto& s : corpus.splits) {
    r.scenes += static_cast<long long>(s.scenes.size());
    std::map<std::string, const SceneGraph*> scenes;
    for (const auto& sc : s.scenes) scenes[sc.video_id] = &sc;

    for (const auto& d : s.dialogues) {
      ++r.dialogues;
      const SceneGraph* scene = scenes.count(d.video_id) ? scenes.at(d.video_id) : nullptr;
      int tt_n = 0, tr_n = 0, or_n = 0, upd_n = 0;
      for (std::size_t t = 0; t < d.turns.size(); ++t) {
        const QAInstance& qa = d.turns[t];
        ++r.turns;
        r.question_types[to_string(qa.type)]++;
        r.templates[qa.template_id]++;
        r.interval_types[interval_category(qa, reg)]++;
        r.answers_by_template[qa.template_id][qa.answer]++;

        int tokens = static_cast<int>(tokenize(qa.question).size());
        token_sum += tokens;
        r.token_hist[tokens]++;
        program_sum += qa.program.size();
        r.program_hist[qa.program.size()]++;

        bool related = false;
        if (qa.tt) {
          ++tt_n;
          r.tt_kinds[*qa.tt]++;
          related = true;
          if (*qa.tt == "temporal") {
            ++upd_n;
            r.cutoff_update_turns[static_cast<int>(t) + 1]++;
          }
        }
        if (qa.tr) {
          ++tr_n;
          r.tr_kinds[to_string(*qa.tr)]++;
          related = true;
        }
        for (const auto& orf : qa.or_refs) {
          ++or_n;
          r.or_distances[orf.distance]++;
          related = true;
        }
        if (related) ++r.relation_annotated_turns;

        unique_questions.insert(qa.question);

        if (scene && t < 10) {
          double D = scene->duration;
          double a = qa.interval.kind == IntervalKind::none ? 0.0 : qa.interval.start;
          double b = qa.interval.kind == IntervalKind::none ? qa.cutoff : qa.interval.end;
          double len = b - a;
          if (len > 0.0 && D > 0.0) {
            for (int dec = 0; dec < 10; ++dec) {
              double lo = D * dec / 10.0, hi = D * (dec + 1) / 10.0;
              double ov = std::max(0.0, std::min(b, hi) - std::max(a, lo));
              r.segment_matrix[t][static_cast<std::size_t>(dec)] += ov / len;
            }
            row_turns[t]++;
          }
        }
        if (t < d.tracked_after.size()) {
          auto& cell = r.active_objects_by_turn[static_cast<int>(t) + 1];
          cell += static_cast<double>(d.tracked_after[t].size());
        }
      }
      tt_total += tt_n;
      tr_total += tr_n;
      or_total += or_n;
      update_total += upd_n;
      r.tt_per_dialogue_hist[tt_n]++;
      r.tr_per_dialogue_hist[tr_n]++;
      r.or_per_dialogue_hist[or_n]++;
      r.cutoff_updates_per_dialogue[upd_n]++;
      if (!d.tracked_after.empty())
        active_sum += static_cast<long long>(d.tracked_after.back().size());
    }
  }

  if (r.turns) {
    r.mean_tokens = static_cast<double>(token_sum) / static_cast<double>(r.turns);
    r.mean_program_size = static_cast<double>(program_sum) / static_cast<double>(r.turns);
    r.unique_question_share =
        static_cast<double>(unique_questions.size()) / static_cast<double>(r.turns);
    long long comp = r.interval_types.count("compositional") ? r.interval_types.at("compositional") : 0;
    r.compositional_share = static_cast<double>(comp) / static_cast<double>(r.turns);
  }
  if (r.dialogues) {
    r.mean_tt_per_dialogue = static_cast<double>(tt_total) / static_cast<double>(r.dialogues);
    r.mean_tr_per_dialogue = static_cast<double>(tr_total) / static_cast<double>(r.dialogues);
    r.mean_or_per_dialogue = static_cast<double>(or_total) / static_cast<double>(r.dialogues);
    r.mean_cutoff_updates = static_cast<double>(update_total) / static_cast<double>(r.dialogues);
    r.mean_active_objects = static_cast<double>(active_sum) / static_cast<double>(r.dialogues);
  }
  {
    long long best = -1;
    for (const auto& [dist, n] : r.or_distances)
      if (n > best) {
        best = n;
        r.or_distance_mode = dist;
      }
  }
  if (r.dialogues)
    for (auto& [pos, v] : r.active_objects_by_turn) v /= static_cast<double>(r.dialogues);
  for (std::size_t row = 0; row < 10; ++row)
    if (row_turns[row])
      for (auto& cell : r.segment_matrix[row]) cell /= static_cast<double>(row_turns[row]);

  for (const auto& [tid, answers] : r.answers_by_template) {
    if (!reg.has(tid)) continue;
    long long mx = 0;
    long long mn = std::numeric_limits<long long>::max();
    for (const auto& a : supported_answers(reg.by_id(tid))) {
      long long c = answers.count(a) ? answers.at(a) : 0;
      mx = std::max(mx, c);
      mn = std::min(mn, c);
    }
    double ratio = mn > 0 ? static_cast<double>(mx) / static_cast<double>(mn)
                          : std::numeric_limits<double>::infinity();
    if (ratio > r.max_balance_ratio) {
      r.max_balance_ratio = ratio;
      r.worst_balance_template = tid;
    }
  }
  return r;
}

namespace {

template <typename K, typename V>
json map_json(const std::map<K, V>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<K, std::string>)
      out[k] = v;
    else
      out[std::to_string(k)] = v;
  }
  return out;
}

template <typename K, typename V>
std::string map_csv(const std::string& header, const std::map<K, V>& m) {
  std::string out = header + "\n";
  for (const auto& [k, v] : m) {
    if constexpr (std::is_same_v<K, std::string>)
      out += k;
    else
      out += std::to_string(k);
    if constexpr (std::is_same_v<V, double>)
      out += "," + format_double(v, 8) + "\n";
    else
      out += "," + std::to_string(v) + "\n";
  }
  return out;
}

}  // namespace

std::string stats_report_json(const StatsReport& r) {
  json j;
  j["scenes"] = r.scenes;
  j["dialogues"] = r.dialogues;
  j["turns"] = r.turns;
  j["question_types"] = map_json(r.question_types);
  j["templates"] = map_json(r.templates);
  j["interval_types"] = map_json(r.interval_types);
  j["compositional_share"] = r.compositional_share;
  json bal = json::object();
  for (const auto& [tid, answers] : r.answers_by_template) bal[tid] = map_json(answers);
  j["answers_by_template"] = std::move(bal);
  j["max_balance_ratio"] = std::isinf(r.max_balance_ratio) ? json("inf") : json(r.max_balance_ratio);
  j["worst_balance_template"] = r.worst_balance_template;
  j["mean_tokens"] = r.mean_tokens;
  j["token_hist"] = map_json(r.token_hist);
  j["mean_program_size"] = r.mean_program_size;
  j["program_hist"] = map_json(r.program_hist);
  j["mean_tt_per_dialogue"] = r.mean_tt_per_dialogue;
  j["tt_kinds"] = map_json(r.tt_kinds);
  j["tt_per_dialogue_hist"] = map_json(r.tt_per_dialogue_hist);
  j["mean_tr_per_dialogue"] = r.mean_tr_per_dialogue;
  j["tr_kinds"] = map_json(r.tr_kinds);
  j["tr_per_dialogue_hist"] = map_json(r.tr_per_dialogue_hist);
  j["mean_or_per_dialogue"] = r.mean_or_per_dialogue;
  j["or_distances"] = map_json(r.or_distances);
  j["or_distance_mode"] = r.or_distance_mode;
  j["or_per_dialogue_hist"] = map_json(r.or_per_dialogue_hist);
  j["mean_cutoff_updates"] = r.mean_cutoff_updates;
  j["cutoff_updates_per_dialogue"] = map_json(r.cutoff_updates_per_dialogue);
  j["cutoff_update_turns"] = map_json(r.cutoff_update_turns);
  j["mean_active_objects"] = r.mean_active_objects;
  j["active_objects_by_turn"] = map_json(r.active_objects_by_turn);
  j["unique_question_share"] = r.unique_question_share;
  j["relation_annotated_turns"] = r.relation_annotated_turns;
  json rows = json::array();
  for (const auto& row : r.segment_matrix) {
    json cells = json::array();
    for (double c : row) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  j["segment_matrix"] = std::move(rows);
  return j.dump(2) + "\n";
}

void write_stats_files(const StatsReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    write_file((fs::path(dir) / name).string(), text);
  };
  put("stats.json", stats_report_json(r));
  put("question_types.csv", map_csv("question_type,count", r.question_types));
  put("templates.csv", map_csv("template,count", r.templates));
  put("interval_types.csv", map_csv("interval_type,count", r.interval_types));
  put("token_hist.csv", map_csv("tokens,count", r.token_hist));
  put("program_hist.csv", map_csv("nodes,count", r.program_hist));
  put("or_distances.csv", map_csv("distance,count", r.or_distances));
  put("tr_kinds.csv", map_csv("relation,count", r.tr_kinds));
  put("tt_kinds.csv", map_csv("kind,count", r.tt_kinds));
  put("cutoff_update_turns.csv", map_csv("turn,count", r.cutoff_update_turns));
  put("active_objects_by_turn.csv", map_csv("turn,mean_tracked", r.active_objects_by_turn));
  {
    std::string m = "turn";
    for (int d = 0; d < 10; ++d) m += ",decile" + std::to_string(d);
    m += "\n";
    for (std::size_t row = 0; row < 10; ++row) {
      m += std::to_string(row + 1);
      for (double c : r.segment_matrix[row]) m += "," + format_double(c, 8);
      m += "\n";
    }
    put("segment_matrix.csv", m);
  }
  {
    std::string b = "template,answer,count\n";
    for (const auto& [tid, answers] : r.answers_by_template)
      for (const auto& [a, n] : answers) b += tid + ",\"" + a + "\"," + std::to_string(n) + "\n";
    put("answer_balance.csv", b);
  }
}

}  // namespace vgdial
