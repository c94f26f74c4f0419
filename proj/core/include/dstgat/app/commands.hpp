#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dstgat/app/config.hpp"
#include "dstgat/eval/metrics.hpp"

namespace dstgat::app {

enum ExitCode : int { kSuccess = 0, kDataError = 1, kInternalError = 2 };

struct SupervisionStats {
  std::size_t dialogues = 0;
  std::size_t turns = 0;
  std::size_t last_turn_samples = 0;
  /// last_turn_samples / turns.
  double ratio = 0.0;
};

SupervisionStats supervision_stats(const data::Corpus& corpus);
/// "dialogues D, turns T, last-turn samples S (ratio 0.2000)".
std::string format_supervision(const SupervisionStats& stats);

/// Predicted state for a turn (1-based).
using Predictor = std::function<data::BeliefState(const data::Dialogue&, std::size_t)>;

/// One TurnPrediction per turn of every dialogue, in corpus order.
std::vector<eval::TurnPrediction> evaluate_corpus(const data::Corpus& corpus,
                                                  const Predictor& predictor);

/// Each command writes into `out_dir` (created when missing) and reports on
/// `log`. They throw data::DataError for bad inputs.
void cmd_synth(const RunConfig& config, const std::string& out_dir, std::ostream& log);
void cmd_train(const RunConfig& config, const std::string& out_dir, std::ostream& log);
eval::MetricsReport cmd_eval(const RunConfig& config, const std::string& out_dir,
                             std::ostream& log);
void cmd_analyze(const RunConfig& config, const std::string& out_dir, std::ostream& log);

struct SelftestOptions {
  /// Negate attention logits for the duration of the run.
  bool attention_sign_fault = false;
  std::uint64_t seed = 0;
};

/// Gradient check, oracle equivalence, round-trip and metric-oracle suites.
/// Prints one line per suite and returns true when all pass.
bool run_selftest(const SelftestOptions& options, std::ostream& log);

}  // namespace dstgat::app
