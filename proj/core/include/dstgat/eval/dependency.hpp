#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dstgat/data/dialogue.hpp"
#include "dstgat/eval/metrics.hpp"

namespace dstgat::eval {

/// How C1 and C2 (0/1 occurrence flags over the supported samples) are scored.
enum class JaccardMode {
  /// Samples where the flags agree (both 1 or both 0) over the support. A
  /// value pair that is absent together counts as dependent, so the score
  /// reflects joint occurrence and joint absence.
  kAgreement,
  /// |C1 and C2| / |C1 or C2|.
  kSetOverlap,
};

std::string_view to_string(JaccardMode mode);
JaccardMode parse_jaccard_mode(std::string_view name);

struct JaccardEntry {
  std::size_t slot1 = 0;
  std::string value1;
  std::size_t slot2 = 0;
  std::string value2;
  double score = 0.0;
  /// Samples where both slots are not 'none'.
  std::size_t support = 0;
};

/// Score of one value pair over the samples where both slots are filled.
/// nullopt when neither value occurs there (the union is empty).
std::optional<JaccardEntry> jaccard_score(std::span<const data::BeliefState> samples,
                                          std::size_t slot1, const std::string& value1,
                                          std::size_t slot2, const std::string& value2,
                                          JaccardMode mode = JaccardMode::kAgreement);

/// Every candidate value pair of every slot pair s1 < s2, ordered by slot then
/// value index. Undefined pairs are omitted.
std::vector<JaccardEntry> jaccard_scores(std::span<const data::BeliefState> samples,
                                         const data::Ontology& ontology,
                                         JaccardMode mode = JaccardMode::kAgreement);

/// Cumulative gold state of every turn of every dialogue.
std::vector<data::BeliefState> gold_states(const data::Corpus& corpus);

struct PairAccuracy {
  double accuracy = 0.0;
  /// Turns whose gold assigns both values.
  std::size_t count = 0;
};

/// Over turns whose gold has slot1 = value1 and slot2 = value2, the fraction
/// predicting both. nullopt without such turns.
std::optional<PairAccuracy> pair_accuracy(std::span<const TurnPrediction> predictions,
                                          std::size_t slot1, const std::string& value1,
                                          std::size_t slot2, const std::string& value2);

struct DependencyPoint {
  double jaccard = 0.0;
  double delta = 0.0;
};

/// For each entry supported in both dumps: (J, model - baseline pair
/// accuracy). The dumps must cover the same (dialogue, turn) keys with the
/// same gold states; order does not matter.
std::vector<DependencyPoint> pair_deltas(std::span<const JaccardEntry> entries,
                                         std::span<const TurnPrediction> model,
                                         std::span<const TurnPrediction> baseline);

struct WindowPoint {
  double jaccard = 0.0;
  double mean_delta = 0.0;
  std::size_t count = 0;
};

/// Mean delta of the points with |J - j| <= window / 2 at each abscissa j.
/// Abscissae are the sorted distinct J values unless `grid` is given; empty
/// windows are dropped.
std::vector<WindowPoint> windowed_pair_delta(std::span<const DependencyPoint> points,
                                             double window = 0.1,
                                             std::span<const double> grid = {});

/// Mean of the smoothed curve over abscissae satisfying the predicate;
/// nullopt when none qualifies.
template <typename Pred>
std::optional<double> mean_window_delta(std::span<const WindowPoint> curve, Pred pred) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const WindowPoint& w : curve) {
    if (!pred(w.jaccard)) continue;
    sum += w.mean_delta;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace dstgat::eval
