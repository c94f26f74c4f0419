#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dstgat/data/synth.hpp"
#include "dstgat/eval/dependency.hpp"
#include "dstgat/graph/gat.hpp"
#include "dstgat/model/lm.hpp"
#include "dstgat/model/tracker.hpp"

namespace dstgat::app {

struct SplitConfig {
  double validation_fraction = 0.1;
  double test_fraction = 0.2;
};

struct PathConfig {
  std::string ontology = "data/ontology.json";
  std::string train = "data/train.jsonl";
  std::string validation = "data/validation.jsonl";
  std::string test = "data/test.jsonl";
  /// Empty: <out>/model.ckpt.
  std::string checkpoint;
};

struct EvalConfig {
  std::size_t progress_buckets = 10;
  std::size_t max_value_tokens = 8;
  /// Optional per_slot.csv of a baseline run for the delta column.
  std::string baseline_per_slot;
};

struct AnalyzeConfig {
  std::string model_predictions;
  std::string baseline_predictions;
  double window = 0.1;
  eval::JaccardMode jaccard_mode = eval::JaccardMode::kAgreement;
};

/// Everything one run needs. Loaded from a JSON document whose sections
/// mirror the members; keys absent from the file keep their defaults and
/// unknown keys are rejected.
struct RunConfig {
  model::LmConfig lm;
  graph::GatConfig gat;
  model::TrainConfig train;
  data::SynthConfig synth;
  SplitConfig split;
  PathConfig paths;
  EvalConfig eval;
  AnalyzeConfig analyze;

  /// Throws data::DataError on any inconsistent field.
  void validate() const;
  /// "L1P1K2-DSVGraph".
  std::string name() const { return gat.name(); }
};

std::string dump_run_config(const RunConfig& config);

/// `overrides` are "dotted.key=value" strings applied after the file; the
/// value is read as JSON when it parses, else as a string. A seed, when
/// given, replaces the model, training and synthesis seeds.
RunConfig parse_run_config(std::string_view text, std::span<const std::string> overrides = {},
                           std::optional<std::uint64_t> seed = std::nullopt);
RunConfig load_run_config(const std::string& path, std::span<const std::string> overrides = {},
                          std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace dstgat::app
