#include "dstgat/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dstgat/data/text.hpp"
#include "json.hpp"

namespace dstgat::eval {

namespace {

std::size_t checked_slot_count(std::span<const TurnPrediction> predictions, const char* what) {
  if (predictions.empty()) throw data::DataError(std::string(what) + ": no predictions");
  const std::size_t n = predictions.front().gold.size();
  for (const TurnPrediction& p : predictions) {
    if (p.gold.size() != n || p.predicted.size() != n) {
      throw data::DataError(std::string(what) + ": dialogue '" + p.dialogue_id + "' turn " +
                            std::to_string(p.turn) + " has mismatched state sizes");
    }
  }
  return n;
}

}  // namespace

double joint_accuracy(std::span<const TurnPrediction> predictions) {
  checked_slot_count(predictions, "joint_accuracy");
  std::size_t correct = 0;
  for (const TurnPrediction& p : predictions) correct += p.predicted == p.gold;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double slot_accuracy(std::span<const TurnPrediction> predictions) {
  const std::size_t n = checked_slot_count(predictions, "slot_accuracy");
  if (n == 0) return 1.0;
  std::size_t correct = 0;
  for (const TurnPrediction& p : predictions)
    for (std::size_t i = 0; i < n; ++i) correct += p.predicted.value(i) == p.gold.value(i);
  return static_cast<double>(correct) / static_cast<double>(n * predictions.size());
}

std::vector<double> per_slot_accuracy(std::span<const TurnPrediction> predictions) {
  const std::size_t n = checked_slot_count(predictions, "per_slot_accuracy");
  std::vector<double> out(n, 0.0);
  for (const TurnPrediction& p : predictions)
    for (std::size_t i = 0; i < n; ++i) out[i] += p.predicted.value(i) == p.gold.value(i);
  for (double& v : out) v /= static_cast<double>(predictions.size());
  return out;
}

std::vector<double> per_slot_delta(std::span<const double> model, std::span<const double> baseline) {
  if (model.size() != baseline.size()) {
    throw data::DataError("per_slot_delta: " + std::to_string(model.size()) + " vs " +
                          std::to_string(baseline.size()) + " slots");
  }
  std::vector<double> out(model.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = model[i] - baseline[i];
  return out;
}

double dialogue_progress(std::size_t turn, std::size_t total_turns) {
  if (turn == 0 || turn > total_turns) {
    throw data::DataError("turn " + std::to_string(turn) + " outside 1.." +
                          std::to_string(total_turns));
  }
  if (total_turns == 1) return 1.0;
  return static_cast<double>(turn - 1) / static_cast<double>(total_turns - 1);
}

std::vector<ProgressBucket> progress_curve(std::span<const TurnPrediction> predictions,
                                           std::size_t buckets) {
  if (buckets < 2) throw data::DataError("progress_curve: need at least 2 buckets");
  std::vector<ProgressBucket> out(buckets);
  std::vector<std::size_t> correct(buckets, 0);
  for (std::size_t b = 0; b < buckets; ++b) {
    out[b].lower = static_cast<double>(b) / static_cast<double>(buckets);
    out[b].upper = static_cast<double>(b + 1) / static_cast<double>(buckets);
  }
  for (const TurnPrediction& p : predictions) {
    const double x = dialogue_progress(p.turn, p.total_turns);
    const auto b = std::min(buckets - 1, static_cast<std::size_t>(x * static_cast<double>(buckets)));
    ++out[b].count;
    correct[b] += p.predicted == p.gold;
  }
  for (std::size_t b = 0; b < buckets; ++b) {
    if (out[b].count)
      out[b].accuracy = static_cast<double>(correct[b]) / static_cast<double>(out[b].count);
  }
  return out;
}

MetricsReport compute_metrics(std::span<const TurnPrediction> predictions,
                              std::size_t progress_buckets) {
  MetricsReport r;
  r.joint_accuracy = joint_accuracy(predictions);
  r.slot_accuracy = slot_accuracy(predictions);
  r.per_slot = per_slot_accuracy(predictions);
  r.progress = progress_curve(predictions, progress_buckets);
  r.turns = predictions.size();
  r.slots = predictions.front().gold.size();
  return r;
}

std::string dump_predictions(std::span<const TurnPrediction> predictions,
                             const data::Ontology& ontology) {
  std::ostringstream os;
  for (const TurnPrediction& p : predictions) {
    nlohmann::ordered_json j;
    j["dialogue"] = p.dialogue_id;
    j["turn"] = p.turn;
    j["total_turns"] = p.total_turns;
    j["predicted"] = nlohmann::ordered_json::parse(data::state_to_json(p.predicted, ontology));
    j["gold"] = nlohmann::ordered_json::parse(data::state_to_json(p.gold, ontology));
    os << j.dump() << '\n';
  }
  return os.str();
}

std::vector<TurnPrediction> parse_predictions(std::string_view text,
                                              const data::Ontology& ontology) {
  std::vector<TurnPrediction> out;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (data::normalize_whitespace(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TurnPrediction p;
      p.dialogue_id = j.at("dialogue").get<std::string>();
      p.turn = j.at("turn").get<std::size_t>();
      p.total_turns = j.at("total_turns").get<std::size_t>();
      p.predicted = data::state_from_json(j.at("predicted").dump(), ontology);
      p.gold = data::state_from_json(j.at("gold").dump(), ontology);
      if (p.turn == 0 || p.turn > p.total_turns) {
        throw data::ParseError("turn " + std::to_string(p.turn) + " outside 1.." +
                                   std::to_string(p.total_turns),
                               line_no);
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw data::ParseError(std::string("prediction record: ") + e.what(), line_no);
    } catch (const data::ParseError&) {
      throw;
    } catch (const data::DataError& e) {
      throw data::ParseError(e.what(), line_no);
    }
  }
  return out;
}

void save_predictions(std::span<const TurnPrediction> predictions, const data::Ontology& ontology,
                      const std::filesystem::path& path) {
  data::write_file(path.string(), dump_predictions(predictions, ontology));
}

std::vector<TurnPrediction> load_predictions(const std::filesystem::path& path,
                                             const data::Ontology& ontology) {
  return parse_predictions(data::read_file(path.string()), ontology);
}

}  // namespace dstgat::eval
