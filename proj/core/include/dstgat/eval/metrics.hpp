#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dstgat/data/dialogue.hpp"

namespace dstgat::eval {

struct TurnPrediction {
  std::string dialogue_id;
  /// 1-based.
  std::size_t turn = 0;
  std::size_t total_turns = 0;
  data::BeliefState predicted;
  data::BeliefState gold;
};

/// Fraction of turns whose predicted state equals gold on every slot.
/// Throws data::DataError on an empty list or mismatched state sizes.
double joint_accuracy(std::span<const TurnPrediction> predictions);

/// Correct (slot, turn) pairs over slot_count x turns; 'none' slots count.
double slot_accuracy(std::span<const TurnPrediction> predictions);

/// Per-slot accuracy in ontology (serialization) order.
std::vector<double> per_slot_accuracy(std::span<const TurnPrediction> predictions);

/// Element-wise model - baseline.
std::vector<double> per_slot_delta(std::span<const double> model, std::span<const double> baseline);

/// (t-1)/(T-1); a single-turn dialogue is at 1.0.
double dialogue_progress(std::size_t turn, std::size_t total_turns);

struct ProgressBucket {
  double lower = 0.0;
  double upper = 0.0;
  /// Joint accuracy of the turns in the bucket; 0 when the bucket is empty.
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Equal-width buckets over [0, 1]; progress 1.0 lands in the last bucket.
/// Every bucket is reported, populated or not.
std::vector<ProgressBucket> progress_curve(std::span<const TurnPrediction> predictions,
                                           std::size_t buckets);

struct MetricsReport {
  double joint_accuracy = 0.0;
  double slot_accuracy = 0.0;
  std::vector<double> per_slot;
  std::vector<ProgressBucket> progress;
  std::size_t turns = 0;
  std::size_t slots = 0;
};

MetricsReport compute_metrics(std::span<const TurnPrediction> predictions,
                              std::size_t progress_buckets = 10);

/// Prediction dumps: one JSON record per line with dialogue, turn,
/// total_turns and sparse predicted / gold states.
std::string dump_predictions(std::span<const TurnPrediction> predictions,
                             const data::Ontology& ontology);
std::vector<TurnPrediction> parse_predictions(std::string_view text,
                                              const data::Ontology& ontology);
void save_predictions(std::span<const TurnPrediction> predictions, const data::Ontology& ontology,
                      const std::filesystem::path& path);
std::vector<TurnPrediction> load_predictions(const std::filesystem::path& path,
                                             const data::Ontology& ontology);

}  // namespace dstgat::eval
