#include "dstgat/app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dstgat/data/text.hpp"
#include "dstgat/data/tokenizer.hpp"
#include "dstgat/eval/report.hpp"
#include "dstgat/model/checkpoint.hpp"

namespace dstgat::app {

namespace fs = std::filesystem;

SupervisionStats supervision_stats(const data::Corpus& corpus) {
  SupervisionStats s;
  s.dialogues = corpus.size();
  s.turns = data::total_turns(corpus);
  s.last_turn_samples = data::last_turn_filter(corpus).size();
  s.ratio = s.turns ? static_cast<double>(s.last_turn_samples) / static_cast<double>(s.turns) : 0.0;
  return s;
}

std::string format_supervision(const SupervisionStats& stats) {
  char ratio[32];
  std::snprintf(ratio, sizeof ratio, "%.4f", stats.ratio);
  return "dialogues " + std::to_string(stats.dialogues) + ", turns " + std::to_string(stats.turns) +
         ", last-turn samples " + std::to_string(stats.last_turn_samples) + " (ratio " + ratio + ")";
}

std::vector<eval::TurnPrediction> evaluate_corpus(const data::Corpus& corpus,
                                                  const Predictor& predictor) {
  std::vector<eval::TurnPrediction> out;
  for (const data::Dialogue& d : corpus) {
    for (std::size_t t = 1; t <= d.turn_count(); ++t) {
      out.push_back({d.id, t, d.turn_count(), predictor(d, t), d.turns[t - 1].state});
    }
  }
  return out;
}

namespace {

fs::path prepare_dir(const std::string& dir) {
  const fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw data::DataError("cannot create directory " + p.string() + ": " + ec.message());
  return p;
}

void write_table(const fs::path& path, const eval::Table& table) {
  data::write_file(path.string(), eval::format_csv(table));
}

std::string checkpoint_path(const RunConfig& config, const fs::path& out) {
  return config.paths.checkpoint.empty() ? (out / "model.ckpt").string() : config.paths.checkpoint;
}

data::Corpus load_optional_corpus(const std::string& path, const data::Ontology& ontology) {
  if (path.empty()) return {};
  return data::load_corpus(path, ontology);
}

}  // namespace

void cmd_synth(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const fs::path out = prepare_dir(out_dir);
  const data::SynthCorpus syn = data::generate_synthetic_corpus(config.synth);
  const std::size_t n = syn.corpus.size();
  const auto n_val = static_cast<std::size_t>(std::llround(config.split.validation_fraction * n));
  const auto n_test = static_cast<std::size_t>(std::llround(config.split.test_fraction * n));
  if (n_val + n_test >= n) throw data::DataError("split leaves no training dialogues");
  const auto first = syn.corpus.begin();
  const data::Corpus train(first, first + static_cast<std::ptrdiff_t>(n - n_val - n_test));
  const data::Corpus validation(first + static_cast<std::ptrdiff_t>(train.size()),
                                first + static_cast<std::ptrdiff_t>(n - n_test));
  const data::Corpus test(first + static_cast<std::ptrdiff_t>(n - n_test), syn.corpus.end());

  data::save_ontology(syn.ontology, out / "ontology.json");
  data::save_corpus(train, syn.ontology, out / "train.jsonl");
  data::save_corpus(validation, syn.ontology, out / "validation.jsonl");
  data::save_corpus(test, syn.ontology, out / "test.jsonl");

  log << "ontology: " << syn.ontology.domain_count() << " domains, "
      << syn.ontology.slot_count() << " slots, " << syn.ontology.value_count() << " values\n";
  for (const auto& [a, b] : syn.pairs) {
    log << "paired: " << syn.ontology.slot(a).key() << " ~ " << syn.ontology.slot(b).key()
        << " (rho " << config.synth.rho << ")\n";
  }
  log << "all: " << format_supervision(supervision_stats(syn.corpus)) << "\n";
  log << "train: " << format_supervision(supervision_stats(train)) << "\n";
  log << "validation: " << format_supervision(supervision_stats(validation)) << "\n";
  log << "test: " << format_supervision(supervision_stats(test)) << "\n";
  log << "wrote " << out.string() << "\n";
}

void cmd_train(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  const fs::path out = prepare_dir(out_dir);
  const data::Ontology ontology = data::load_ontology(config.paths.ontology);
  const data::Corpus train = data::load_corpus(config.paths.train, ontology);
  if (train.empty()) throw data::DataError("training corpus " + config.paths.train + " is empty");
  const data::Corpus validation = load_optional_corpus(config.paths.validation, ontology);

  model::Tracker tracker(config.lm, config.gat, ontology, data::build_vocab(train, ontology));
  std::size_t gat_params = 0;
  for (const Parameter* p : tracker.gat().parameters()) gat_params += p->value.size();
  std::size_t all_params = 0;
  for (const Parameter* p : tracker.parameters()) all_params += p->value.size();
  log << config.name() << "-" << model::to_string(config.train.regime) << ": " << all_params
      << " parameters (" << gat_params << " in the graph), vocabulary "
      << tracker.tokenizer().size() << "\n";
  log << "train: " << format_supervision(supervision_stats(train)) << "\n";

  eval::Table table{{"epoch", "train_loss", "validation_loss", "samples", "skipped"}, {}};
  const model::TrainLog result =
      model::train(tracker, train, validation, config.train, [&](const model::EpochLog& e) {
        log << "epoch " << e.epoch << " train " << eval::format_number(e.train_loss)
            << " validation " << eval::format_number(e.validation_loss) << " (" << e.samples
            << " samples)\n";
        table.rows.push_back({std::to_string(e.epoch), eval::format_number(e.train_loss),
                              eval::format_number(e.validation_loss), std::to_string(e.samples),
                              std::to_string(e.skipped)});
      });
  for (const std::string& w : result.warnings) log << "warning: " << w << "\n";

  const std::string ckpt = checkpoint_path(config, out);
  model::save_checkpoint(tracker, ckpt);
  write_table(out / "train_log.csv", table);
  data::write_file((out / "config.json").string(), dump_run_config(config));
  log << "initial loss " << eval::format_number(result.initial_train_loss) << ", best epoch "
      << result.best_epoch << " validation " << eval::format_number(result.best_validation_loss)
      << "\nwrote " << ckpt << "\n";
}

eval::MetricsReport cmd_eval(const RunConfig& config, const std::string& out_dir,
                             std::ostream& log) {
  const fs::path out = prepare_dir(out_dir);
  const std::string ckpt = checkpoint_path(config, out);
  std::unique_ptr<model::Tracker> tracker = model::load_checkpoint(ckpt);
  const data::Ontology& ontology = tracker->ontology();
  if (!config.paths.ontology.empty()) {
    const data::Ontology expected = data::load_ontology(config.paths.ontology);
    if (expected.slot_keys() != ontology.slot_keys()) {
      throw data::DataError("checkpoint " + ckpt + " was trained with a different slot order than " +
                            config.paths.ontology);
    }
  }
  const data::Corpus test = data::load_corpus(config.paths.test, ontology);
  if (test.empty()) throw data::DataError("test corpus " + config.paths.test + " is empty");

  model::DecodeOptions options;
  options.max_value_tokens = config.eval.max_value_tokens;
  std::size_t warned = 0;
  const auto predictions =
      evaluate_corpus(test, [&](const data::Dialogue& d, std::size_t t) {
        model::Prediction p = model::predict_state(*tracker, d, t, options);
        warned += !p.warnings.empty();
        return p.state;
      });
  const eval::MetricsReport report = eval::compute_metrics(predictions, config.eval.progress_buckets);

  std::vector<double> baseline;
  if (!config.eval.baseline_per_slot.empty()) {
    const eval::Table t = eval::parse_csv(data::read_file(config.eval.baseline_per_slot));
    if (t.header.size() < 2 || t.rows.size() != ontology.slot_count()) {
      throw data::DataError(config.eval.baseline_per_slot + " does not match the ontology");
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      if (t.rows[i][0] != ontology.slot(i).key()) {
        throw data::DataError(config.eval.baseline_per_slot + ": slot order differs");
      }
      baseline.push_back(eval::parse_number(t.rows[i][1]));
    }
  }

  eval::save_predictions(predictions, ontology, out / "predictions.jsonl");
  write_table(out / "summary.csv", eval::summary_table(report));
  write_table(out / "per_slot.csv", eval::per_slot_table(report, ontology, baseline));
  write_table(out / "progress.csv", eval::progress_table(report));
  log << "turns " << report.turns << ", joint accuracy " << eval::format_number(report.joint_accuracy)
      << ", slot accuracy " << eval::format_number(report.slot_accuracy) << "\n";
  if (warned) log << "warning: " << warned << " generated states needed repair while parsing\n";
  log << "wrote " << out.string() << "\n";
  return report;
}

void cmd_analyze(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
  if (config.analyze.model_predictions.empty() || config.analyze.baseline_predictions.empty()) {
    throw data::DataError("analyze needs analyze.model_predictions and analyze.baseline_predictions");
  }
  const fs::path out = prepare_dir(out_dir);
  const data::Ontology ontology = data::load_ontology(config.paths.ontology);
  const data::Corpus gold = data::load_corpus(config.paths.test, ontology);
  const auto model_dump = eval::load_predictions(config.analyze.model_predictions, ontology);
  const auto baseline_dump = eval::load_predictions(config.analyze.baseline_predictions, ontology);

  const std::vector<data::BeliefState> samples = eval::gold_states(gold);
  const auto entries = eval::jaccard_scores(samples, ontology, config.analyze.jaccard_mode);
  const auto points = eval::pair_deltas(entries, model_dump, baseline_dump);

  write_table(out / "jaccard.csv", eval::jaccard_table(entries, ontology));
  eval::Table deltas{{"jaccard", "delta"}, {}};
  for (const auto& p : points) {
    deltas.rows.push_back({eval::format_number(p.jaccard), eval::format_number(p.delta)});
  }
  write_table(out / "pair_deltas.csv", deltas);
  log << "value pairs scored " << entries.size() << " (" << eval::to_string(config.analyze.jaccard_mode)
      << "), supported in both dumps " << points.size() << "\n";
  if (points.empty()) {
    write_table(out / "window.csv", eval::window_table({}));
    log << "no supported pairs; window table is empty\nwrote " << out.string() << "\n";
    return;
  }
  const auto curve = eval::windowed_pair_delta(points, config.analyze.window);
  write_table(out / "window.csv", eval::window_table(curve));
  const auto high = eval::mean_window_delta(std::span<const eval::WindowPoint>(curve),
                                            [](double j) { return j >= 0.8; });
  const auto low = eval::mean_window_delta(std::span<const eval::WindowPoint>(curve),
                                           [](double j) { return j <= 0.2; });
  auto show = [](const std::optional<double>& v) { return v ? eval::format_number(*v) : "n/a"; };
  log << "mean windowed pair-accuracy delta: J >= 0.8 " << show(high) << ", J <= 0.2 " << show(low)
      << "\nwrote " << out.string() << "\n";
}

}  // namespace dstgat::app
