// command line front end: generate corpora, dump statistics, score
// predictions or baselines, and pretty-print single dialogues.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "vgdial/config.hpp"
#include "vgdial/corpus.hpp"
#include "vgdial/eval.hpp"
#include "vgdial/program.hpp"
#include "vgdial/stats.hpp"
#include "vgdial/util.hpp"
#include "vgdial/vocab.hpp"

namespace {

using namespace vgdial;

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (seed) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  validate_config(cfg);

  load_answer_vocabulary(resolved_vocab_path(cfg));  // fail fast on a bad file
  auto reg = TemplateRegistry::load(resolved_templates_path(cfg));

  Corpus corpus = generate_corpus(cfg, reg);
  save_corpus(corpus, cfg.output_dir);

  long long scenes = 0, dialogues = 0;
  for (const auto& s : corpus.splits) {
    scenes += static_cast<long long>(s.scenes.size());
    dialogues += static_cast<long long>(s.dialogues.size());
  }
  std::printf("wrote %lld scenes, %lld dialogues, %lld turns to %s\n", scenes, dialogues,
              corpus.total_turns(), cfg.output_dir.c_str());
  std::printf("config hash %s\n", config_hash(cfg).c_str());
  return 0;
}

int cmd_stats(const std::string& corpus_dir, const std::string& out_dir) {
  StatsReport report;
  if (std::filesystem::exists(std::filesystem::path(corpus_dir) / "manifest.json")) {
    Corpus corpus = load_corpus(corpus_dir);
    auto reg = TemplateRegistry::load(resolved_templates_path(corpus.config));
    report = corpus_statistics(corpus, reg);
  }
  // else: nothing there counts as an empty corpus and yields an all-zero report
  write_stats_files(report, out_dir);
  std::printf("stats for %lld dialogues (%lld turns) written to %s\n", report.dialogues,
              report.turns, out_dir.c_str());
  return 0;
}

int cmd_eval(const std::string& corpus_dir, const std::string& baseline,
             const std::string& predictions_path, std::uint64_t seed,
             const std::string& out_path) {
  Corpus corpus = load_corpus(corpus_dir);
  auto reg = TemplateRegistry::load(resolved_templates_path(corpus.config));

  const Split* test = corpus.split("test");
  if (!test) throw DataError("corpus has no test split");

  std::vector<Prediction> preds;
  if (!baseline.empty()) {
    const Split* train = corpus.split("train");
    if (!train) throw DataError("corpus has no train split");
    preds = run_baseline(baseline_from_string(baseline), *train, *test, seed);
  } else {
    preds = load_predictions(predictions_path);
  }

  MetricReport report = evaluate(preds, corpus, "test", reg);
  write_file(out_path, metric_report_json(report));
  std::printf("%lld turns scored, overall accuracy %.4f, report written to %s\n", report.turns,
              report.overall_accuracy, out_path.c_str());
  return 0;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string interval_line(const QAInstance& qa) {
  if (qa.interval.kind == IntervalKind::none)
    return "whole prefix [0.00, " + fixed2(qa.cutoff) + "]";
  std::string kind = qa.interval.kind == IntervalKind::atomic ? "atomic" : "compositional";
  return "[" + fixed2(qa.interval.start) + ", " + fixed2(qa.interval.end) + "] " + kind;
}

int cmd_inspect(const std::string& corpus_dir, const std::string& dialogue_id) {
  Corpus corpus = load_corpus(corpus_dir);

  const Dialogue* dlg = nullptr;
  for (const auto& s : corpus.splits)
    for (const auto& d : s.dialogues)
      if (d.dialogue_id == dialogue_id) dlg = &d;
  if (!dlg) throw DataError("unknown dialogue id: " + dialogue_id);

  const SceneGraph* scene = corpus.scene(dlg->video_id);
  std::printf("dialogue %s (video %s)\n", dlg->dialogue_id.c_str(), dlg->video_id.c_str());
  if (scene) {
    std::printf("scene: %zu objects, %.1fs\n", scene->objects.size(), scene->duration);
    for (const auto& o : scene->objects)
      std::printf("  object %d: %s %s %s %s\n", o.id, to_string(o.attrs.size).c_str(),
                  to_string(o.attrs.color).c_str(), to_string(o.attrs.material).c_str(),
                  to_string(o.attrs.shape).c_str());
  }

  for (std::size_t i = 0; i < dlg->turns.size(); ++i) {
    const QAInstance& qa = dlg->turns[i];
    std::printf("\nturn %zu  %s (%s / %s)\n", i + 1, qa.template_id.c_str(),
                to_string(qa.type).c_str(), qa.sub_type.c_str());
    std::printf("  Q: %s\n", qa.question.c_str());
    std::printf("  A: %s\n", qa.answer.c_str());
    std::printf("  cutoff %.2f, scope %s\n", qa.cutoff, interval_line(qa).c_str());

    std::string rel;
    if (qa.tr) rel += " tr=" + to_string(*qa.tr);
    for (const auto& r : qa.or_refs)
      rel += " or=(distance " + std::to_string(r.distance) + ", object " +
             std::to_string(r.object_id) + ")";
    if (qa.tt) rel += " tt=" + *qa.tt;
    std::printf("  relations:%s\n", rel.empty() ? " none" : rel.c_str());

    std::printf("  program:\n");
    std::string prog = print_program(qa.program);
    std::size_t pos = 0;
    while (pos < prog.size()) {
      std::size_t nl = prog.find('\n', pos);
      if (nl == std::string::npos) nl = prog.size();
      if (nl > pos) std::printf("    %s\n", prog.substr(pos, nl - pos).c_str());
      pos = nl + 1;
    }

    if (i < dlg->tracked_after.size()) {
      std::string ids;
      for (int id : dlg->tracked_after[i]) ids += (ids.empty() ? "" : " ") + std::to_string(id);
      std::printf("  tracked after: [%s]\n", ids.c_str());
    }
  }
  std::printf("\n%zu turns rendered\n", dlg->turns.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic video-grounded dialogue benchmark toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, corpus_dir, out_path, dialogue_id;
  std::string baseline, predictions_path;
  std::optional<std::uint64_t> seed_override;
  std::uint64_t eval_seed = 0;

  auto* gen = app.add_subcommand("generate", "generate a corpus");
  gen->add_option("--config", config_path, "run config json; defaults apply when omitted");
  gen->add_option("--seed", seed_override, "override the config seed");
  gen->add_option("--out", out_dir, "override the output directory");

  auto* stats = app.add_subcommand("stats", "summarize a corpus");
  stats->add_option("--corpus", corpus_dir, "corpus directory")->required();
  stats->add_option("--out", out_dir, "report directory")->required();

  auto* eval = app.add_subcommand("eval", "score a baseline or prediction file");
  eval->add_option("--corpus", corpus_dir, "corpus directory")->required();
  auto* opt_baseline = eval->add_option("--baseline", baseline,
                                        "answer_prior, qtype_random, qtype_freq or "
                                        "q_retrieval_tfidf");
  auto* opt_preds = eval->add_option("--predictions", predictions_path, "prediction jsonl");
  opt_baseline->excludes(opt_preds);
  opt_preds->excludes(opt_baseline);
  eval->add_option("--seed", eval_seed, "rng seed for the random baseline");
  eval->add_option("--out", out_path, "metric report file")->required();

  auto* inspect = app.add_subcommand("inspect", "pretty-print one dialogue");
  inspect->add_option("--corpus", corpus_dir, "corpus directory")->required();
  inspect->add_option("--dialogue", dialogue_id, "dialogue id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(config_path, seed_override, out_dir);
    if (stats->parsed()) return cmd_stats(corpus_dir, out_dir);
    if (eval->parsed()) {
      if (baseline.empty() && predictions_path.empty())
        throw ConfigError("eval needs --baseline or --predictions");
      return cmd_eval(corpus_dir, baseline, predictions_path, eval_seed, out_path);
    }
    if (inspect->parsed()) return cmd_inspect(corpus_dir, dialogue_id);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
