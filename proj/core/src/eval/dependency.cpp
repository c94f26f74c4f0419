#include "dstgat/eval/dependency.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace dstgat::eval {

std::string_view to_string(JaccardMode mode) {
  return mode == JaccardMode::kAgreement ? "agreement" : "set_overlap";
}

JaccardMode parse_jaccard_mode(std::string_view name) {
  if (name == "agreement") return JaccardMode::kAgreement;
  if (name == "set_overlap") return JaccardMode::kSetOverlap;
  throw data::DataError("unknown jaccard mode '" + std::string(name) +
                        "' (expected agreement or set_overlap)");
}

namespace {

// Counts over the supported samples: n1 = C1, n2 = C2, both = C1 and C2.
std::optional<double> score_from_counts(std::size_t support, std::size_t n1, std::size_t n2,
                                        std::size_t both, JaccardMode mode) {
  const std::size_t either = n1 + n2 - both;
  if (either == 0) return std::nullopt;
  if (mode == JaccardMode::kSetOverlap) {
    return static_cast<double>(both) / static_cast<double>(either);
  }
  const std::size_t agree = both + (support - either);
  return static_cast<double>(agree) / static_cast<double>(support);
}

void check_slot(std::span<const data::BeliefState> samples, std::size_t slot) {
  for (const data::BeliefState& s : samples) {
    if (slot >= s.size()) {
      throw data::DataError("slot " + std::to_string(slot) + " outside a state of " +
                            std::to_string(s.size()) + " slots");
    }
  }
}

}  // namespace

std::optional<JaccardEntry> jaccard_score(std::span<const data::BeliefState> samples,
                                          std::size_t slot1, const std::string& value1,
                                          std::size_t slot2, const std::string& value2,
                                          JaccardMode mode) {
  if (slot1 == slot2) throw data::DataError("jaccard_score: slots must differ");
  check_slot(samples, slot1);
  check_slot(samples, slot2);
  std::size_t support = 0, n1 = 0, n2 = 0, both = 0;
  for (const data::BeliefState& s : samples) {
    if (!s.filled(slot1) || !s.filled(slot2)) continue;
    ++support;
    const bool c1 = s.value(slot1) == value1;
    const bool c2 = s.value(slot2) == value2;
    n1 += c1;
    n2 += c2;
    both += c1 && c2;
  }
  const auto score = score_from_counts(support, n1, n2, both, mode);
  if (!score) return std::nullopt;
  return JaccardEntry{slot1, value1, slot2, value2, *score, support};
}

std::vector<JaccardEntry> jaccard_scores(std::span<const data::BeliefState> samples,
                                         const data::Ontology& ontology, JaccardMode mode) {
  const std::size_t n = ontology.slot_count();
  for (const data::BeliefState& s : samples) {
    if (s.size() != n) throw data::DataError("jaccard_scores: state size differs from ontology");
  }
  std::vector<JaccardEntry> out;
  const auto& values = ontology.values();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& ca = ontology.slot(a).candidates;
      const auto& cb = ontology.slot(b).candidates;
      std::map<std::string, std::size_t> n1, n2;
      std::map<std::pair<std::string, std::string>, std::size_t> both;
      std::size_t support = 0;
      for (const data::BeliefState& s : samples) {
        if (!s.filled(a) || !s.filled(b)) continue;
        ++support;
        ++n1[s.value(a)];
        ++n2[s.value(b)];
        ++both[{s.value(a), s.value(b)}];
      }
      if (support == 0) continue;
      auto count = [](const auto& m, const auto& k) {
        auto it = m.find(k);
        return it == m.end() ? std::size_t{0} : it->second;
      };
      for (std::size_t va : ca) {
        for (std::size_t vb : cb) {
          const std::string& x = values[va];
          const std::string& y = values[vb];
          const auto score =
              score_from_counts(support, count(n1, x), count(n2, y), count(both, std::pair{x, y}), mode);
          if (score) out.push_back({a, x, b, y, *score, support});
        }
      }
    }
  }
  return out;
}

std::vector<data::BeliefState> gold_states(const data::Corpus& corpus) {
  std::vector<data::BeliefState> out;
  for (const data::Dialogue& d : corpus)
    for (const data::Turn& t : d.turns) out.push_back(t.state);
  return out;
}

std::optional<PairAccuracy> pair_accuracy(std::span<const TurnPrediction> predictions,
                                          std::size_t slot1, const std::string& value1,
                                          std::size_t slot2, const std::string& value2) {
  std::size_t count = 0, correct = 0;
  for (const TurnPrediction& p : predictions) {
    if (p.gold.value(slot1) != value1 || p.gold.value(slot2) != value2) continue;
    ++count;
    correct += p.predicted.value(slot1) == value1 && p.predicted.value(slot2) == value2;
  }
  if (count == 0) return std::nullopt;
  return PairAccuracy{static_cast<double>(correct) / static_cast<double>(count), count};
}

std::vector<DependencyPoint> pair_deltas(std::span<const JaccardEntry> entries,
                                         std::span<const TurnPrediction> model,
                                         std::span<const TurnPrediction> baseline) {
  std::map<std::pair<std::string, std::size_t>, const TurnPrediction*> keyed;
  for (const TurnPrediction& p : baseline) {
    if (!keyed.emplace(std::pair{p.dialogue_id, p.turn}, &p).second) {
      throw data::DataError("baseline dump repeats dialogue '" + p.dialogue_id + "' turn " +
                            std::to_string(p.turn));
    }
  }
  if (model.size() != baseline.size()) {
    throw data::DataError("prediction dumps cover " + std::to_string(model.size()) + " and " +
                          std::to_string(baseline.size()) + " turns");
  }
  for (const TurnPrediction& p : model) {
    auto it = keyed.find({p.dialogue_id, p.turn});
    if (it == keyed.end()) {
      throw data::DataError("dialogue '" + p.dialogue_id + "' turn " + std::to_string(p.turn) +
                            " is missing from the baseline dump");
    }
    if (!(it->second->gold == p.gold)) {
      throw data::DataError("dialogue '" + p.dialogue_id + "' turn " + std::to_string(p.turn) +
                            " has different gold states in the two dumps");
    }
  }
  std::vector<DependencyPoint> out;
  for (const JaccardEntry& e : entries) {
    const auto m = pair_accuracy(model, e.slot1, e.value1, e.slot2, e.value2);
    const auto b = pair_accuracy(baseline, e.slot1, e.value1, e.slot2, e.value2);
    if (m && b) out.push_back({e.score, m->accuracy - b->accuracy});
  }
  return out;
}

std::vector<WindowPoint> windowed_pair_delta(std::span<const DependencyPoint> points,
                                             double window, std::span<const double> grid) {
  if (!(window > 0.0)) throw data::DataError("windowed_pair_delta: window must be > 0");
  if (points.empty()) throw data::DataError("windowed_pair_delta: no points");
  std::vector<double> xs;
  if (grid.empty()) {
    for (const DependencyPoint& p : points) xs.push_back(p.jaccard);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  } else {
    xs.assign(grid.begin(), grid.end());
  }
  // Slack keeps grid-aligned scores that sit exactly on the edge inside.
  const double half = window / 2.0 + 1e-12;
  std::vector<WindowPoint> out;
  for (double x : xs) {
    WindowPoint w{x, 0.0, 0};
    for (const DependencyPoint& p : points) {
      if (std::abs(p.jaccard - x) <= half) {
        w.mean_delta += p.delta;
        ++w.count;
      }
    }
    if (w.count == 0) continue;
    w.mean_delta /= static_cast<double>(w.count);
    out.push_back(w);
  }
  return out;
}

}  // namespace dstgat::eval
