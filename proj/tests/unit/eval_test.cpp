#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dstgat/eval/report.hpp"
#include "oracles.hpp"

using namespace dstgat;
using namespace dstgat::eval;

namespace {

data::BeliefState state2(const char* a, const char* b) {
  data::BeliefState s(2);
  s.set(0, a);
  s.set(1, b);
  return s;
}

std::vector<data::BeliefState> pricerange_samples() {
  const char* restaurant[] = {"none", "expensive", "moderate", "expensive", "moderate"};
  const char* hotel[] = {"none", "moderate", "expensive", "expensive", "cheap"};
  std::vector<data::BeliefState> out;
  for (int i = 0; i < 5; ++i) out.push_back(state2(restaurant[i], hotel[i]));
  return out;
}

std::vector<TurnPrediction> random_predictions(std::mt19937_64& rng, std::size_t slots,
                                               std::size_t dialogues) {
  const char* values[] = {"none", "a", "b"};
  std::uniform_int_distribution<int> pick(0, 2), len(1, 5);
  std::vector<TurnPrediction> out;
  for (std::size_t d = 0; d < dialogues; ++d) {
    const std::size_t turns = static_cast<std::size_t>(len(rng));
    for (std::size_t t = 1; t <= turns; ++t) {
      TurnPrediction p{"d" + std::to_string(d), t, turns, data::BeliefState(slots),
                       data::BeliefState(slots)};
      for (std::size_t s = 0; s < slots; ++s) {
        p.gold.set(s, values[pick(rng)]);
        p.predicted.set(s, values[pick(rng)]);
      }
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("hand-computed accuracies") {
  std::vector<TurnPrediction> p = {
      {"x", 1, 3, state2("a", "none"), state2("a", "none")},
      {"x", 2, 3, state2("a", "b"), state2("a", "c")},
      {"x", 3, 3, state2("a", "c"), state2("a", "c")},
  };
  CHECK(joint_accuracy(p) == doctest::Approx(2.0 / 3.0));
  CHECK(slot_accuracy(p) == doctest::Approx(5.0 / 6.0));
  CHECK(per_slot_accuracy(p) == std::vector<double>{1.0, 2.0 / 3.0});
  CHECK_THROWS_AS(joint_accuracy(std::vector<TurnPrediction>{}), data::DataError);
  p[1].gold = data::BeliefState(3);
  CHECK_THROWS_AS(slot_accuracy(p), data::DataError);
}

TEST_CASE("accuracy invariants on random predictions") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_predictions(rng, 3, 6);
    std::size_t joint = 0, slot = 0;
    for (const auto& t : p) {
      std::size_t ok = 0;
      for (std::size_t s = 0; s < 3; ++s) ok += t.predicted.value(s) == t.gold.value(s);
      joint += ok == 3;
      slot += ok;
    }
    const double j = joint_accuracy(p), s = slot_accuracy(p);
    CHECK(j == doctest::Approx(static_cast<double>(joint) / p.size()).epsilon(1e-12));
    CHECK(s == doctest::Approx(static_cast<double>(slot) / (3.0 * p.size())).epsilon(1e-12));
    CHECK(j <= s);
    const auto per = per_slot_accuracy(p);
    CHECK((per[0] + per[1] + per[2]) / 3.0 == doctest::Approx(s).epsilon(1e-12));

    auto perfect = p;
    for (auto& t : perfect) t.predicted = t.gold;
    CHECK(joint_accuracy(perfect) == 1.0);

    const auto curve = progress_curve(p, 4);
    REQUIRE(curve.size() == 4);
    std::size_t n = 0;
    double weighted = 0.0;
    for (const auto& b : curve) {
      n += b.count;
      weighted += b.accuracy * static_cast<double>(b.count);
    }
    CHECK(n == p.size());
    CHECK(weighted / n == doctest::Approx(j).epsilon(1e-12));
  }
}

TEST_CASE("dialogue progress and buckets") {
  CHECK(dialogue_progress(1, 5) == 0.0);
  CHECK(dialogue_progress(5, 5) == 1.0);
  CHECK(dialogue_progress(3, 5) == 0.5);
  CHECK(dialogue_progress(1, 1) == 1.0);
  std::vector<TurnPrediction> p = {{"x", 1, 1, state2("a", "b"), state2("a", "b")},
                                   {"y", 1, 3, state2("a", "b"), state2("a", "c")}};
  const auto curve = progress_curve(p, 10);
  REQUIRE(curve.size() == 10);
  CHECK(curve.front().count == 1);
  CHECK(curve.front().accuracy == 0.0);
  CHECK(curve.back().count == 1);
  CHECK(curve.back().accuracy == 1.0);
  CHECK(curve[4].count == 0);
  CHECK(curve.back().upper == 1.0);
}

TEST_CASE("jaccard of the pricerange fixture") {
  const auto samples = pricerange_samples();
  const auto agree = jaccard_score(samples, 0, "expensive", 1, "expensive");
  REQUIRE(agree);
  CHECK(agree->score == 0.5);
  CHECK(agree->support == 4);
  const auto overlap = jaccard_score(samples, 0, "expensive", 1, "expensive", JaccardMode::kSetOverlap);
  REQUIRE(overlap);
  CHECK(overlap->score == doctest::Approx(1.0 / 3.0));
  // Neither value occurs with both slots filled.
  const std::vector<data::BeliefState> sparse = {state2("cheap", "none"), state2("moderate", "moderate")};
  CHECK_FALSE(jaccard_score(sparse, 0, "cheap", 1, "cheap"));
  CHECK(jaccard_score(sparse, 0, "moderate", 1, "cheap")->score == 0.0);
  CHECK(parse_jaccard_mode(to_string(JaccardMode::kSetOverlap)) == JaccardMode::kSetOverlap);
  CHECK_THROWS(parse_jaccard_mode("bogus"));
}

TEST_CASE("jaccard scores are bounded and symmetric") {
  const data::Ontology ontology = oracle::pricerange_ontology();
  std::mt19937_64 rng(11);
  const char* values[] = {"none", "cheap", "moderate", "expensive"};
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<data::BeliefState> samples, swapped;
  for (int i = 0; i < 40; ++i) {
    const char* a = values[pick(rng)];
    const char* b = values[pick(rng)];
    samples.push_back(state2(a, b));
    swapped.push_back(state2(b, a));
  }
  for (auto mode : {JaccardMode::kAgreement, JaccardMode::kSetOverlap}) {
    const auto entries = jaccard_scores(samples, ontology, mode);
    CHECK_FALSE(entries.empty());
    for (const auto& e : entries) {
      CHECK(e.score >= 0.0);
      CHECK(e.score <= 1.0);
      CHECK(e.slot1 < e.slot2);
      const auto mirror = jaccard_score(swapped, 0, e.value2, 1, e.value1, mode);
      REQUIRE(mirror);
      CHECK(mirror->score == doctest::Approx(e.score).epsilon(1e-15));
      CHECK(mirror->support == e.support);
    }
  }
  // Identical columns are fully dependent under both definitions.
  std::vector<data::BeliefState> same;
  for (const auto& s : samples) same.push_back(state2(s.value(0).c_str(), s.value(0).c_str()));
  for (const auto& e : jaccard_scores(same, ontology, JaccardMode::kSetOverlap))
    if (e.value1 == e.value2) CHECK(e.score == 1.0);
}

TEST_CASE("pair accuracy and deltas") {
  std::vector<TurnPrediction> base = {{"x", 1, 2, state2("a", "b"), state2("a", "b")},
                                      {"x", 2, 2, state2("a", "c"), state2("a", "b")},
                                      {"y", 1, 1, state2("c", "c"), state2("c", "c")}};
  auto model = base;
  model[1].predicted = model[1].gold;
  const auto acc = pair_accuracy(base, 0, "a", 1, "b");
  REQUIRE(acc);
  CHECK(acc->count == 2);
  CHECK(acc->accuracy == 0.5);
  CHECK_FALSE(pair_accuracy(base, 0, "b", 1, "b"));

  const std::vector<JaccardEntry> entries = {{0, "a", 1, "b", 0.9, 2}, {0, "c", 1, "c", 0.1, 1},
                                             {0, "b", 1, "b", 0.5, 1}};
  std::reverse(model.begin(), model.end());
  const auto pts = pair_deltas(entries, model, base);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].jaccard == 0.9);
  CHECK(pts[0].delta == 0.5);
  CHECK(pts[1].delta == 0.0);
  CHECK(pair_deltas(entries, base, base)[0].delta == 0.0);

  auto other = base;
  other[0].gold = state2("c", "c");
  CHECK_THROWS_AS(pair_deltas(entries, other, base), data::DataError);
  other = base;
  other.pop_back();
  CHECK_THROWS_AS(pair_deltas(entries, other, base), data::DataError);
}

TEST_CASE("windowed delta matches direct recomputation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0), d(-1.0, 1.0);
  std::vector<DependencyPoint> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({std::round(u(rng) * 20) / 20, d(rng)});
  const auto curve = windowed_pair_delta(pts, 0.2);
  CHECK(std::is_sorted(curve.begin(), curve.end(),
                       [](const auto& a, const auto& b) { return a.jaccard < b.jaccard; }));
  for (const auto& w : curve) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : pts)
      if (std::abs(p.jaccard - w.jaccard) <= 0.1 + 1e-12) {
        sum += p.delta;
        ++n;
      }
    CHECK(w.count == n);
    CHECK(w.mean_delta == doctest::Approx(sum / n).epsilon(1e-12));
  }
  const std::vector<double> grid = {0.0, 0.5, 2.0};
  const auto on_grid = windowed_pair_delta(pts, 0.2, grid);
  CHECK(on_grid.size() == 2);
  const auto high = mean_window_delta(std::span<const WindowPoint>(curve), [](double j) { return j > 5; });
  CHECK_FALSE(high);
}

TEST_CASE("csv tables round-trip") {
  Table t{{"a", "b"}, {{"plain", "with,comma"}, {"quote\"d", "line\nbreak"}}};
  const Table back = parse_csv(format_csv(t));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), data::ParseError);
  CHECK_THROWS_AS(parse_csv("a,b\n\"1,2\n"), data::ParseError);
  for (double v : {0.1, 1.0 / 3.0, 0.0, -2.5e-17, 123456.789})
    CHECK(parse_number(format_number(v)) == v);

  std::mt19937_64 rng(5);
  const auto p = random_predictions(rng, 2, 10);
  const MetricsReport r = compute_metrics(p, 5);
  const MetricsReport r2 =
      read_metrics_report(parse_csv(format_csv(summary_table(r))),
                          parse_csv(format_csv(per_slot_table(r, oracle::pricerange_ontology()))),
                          parse_csv(format_csv(progress_table(r))));
  CHECK(r2.joint_accuracy == r.joint_accuracy);
  CHECK(r2.slot_accuracy == r.slot_accuracy);
  CHECK(r2.per_slot == r.per_slot);
  CHECK(r2.turns == r.turns);
  REQUIRE(r2.progress.size() == r.progress.size());
  for (std::size_t i = 0; i < r.progress.size(); ++i) {
    CHECK(r2.progress[i].accuracy == r.progress[i].accuracy);
    CHECK(r2.progress[i].count == r.progress[i].count);
  }

  const data::Ontology ontology = oracle::pricerange_ontology();
  const auto entries = jaccard_scores(pricerange_samples(), ontology);
  const auto entries2 = read_jaccard_table(parse_csv(format_csv(jaccard_table(entries, ontology))), ontology);
  REQUIRE(entries2.size() == entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CHECK(entries2[i].score == entries[i].score);
    CHECK(entries2[i].value2 == entries[i].value2);
  }
}

TEST_CASE("prediction dumps round-trip") {
  std::mt19937_64 rng(9);
  auto p = random_predictions(rng, 2, 4);
  for (auto& t : p)
    for (std::size_t s = 0; s < 2; ++s) {
      if (t.gold.filled(s)) t.gold.set(s, "cheap");
      if (t.predicted.filled(s)) t.predicted.set(s, "moderate");
    }
  const data::Ontology ontology = oracle::pricerange_ontology();
  const auto back = parse_predictions(dump_predictions(p, ontology), ontology);
  REQUIRE(back.size() == p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(back[i].dialogue_id == p[i].dialogue_id);
    CHECK(back[i].turn == p[i].turn);
    CHECK(back[i].total_turns == p[i].total_turns);
    CHECK(back[i].predicted == p[i].predicted);
    CHECK(back[i].gold == p[i].gold);
  }
}
