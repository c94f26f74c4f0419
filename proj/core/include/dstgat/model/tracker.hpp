#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dstgat/data/dialogue.hpp"
#include "dstgat/data/serialization.hpp"
#include "dstgat/data/tokenizer.hpp"
#include "dstgat/graph/gat.hpp"
#include "dstgat/graph/topology.hpp"
#include "dstgat/model/lm.hpp"
#include "dstgat/numeric/optim.hpp"

namespace dstgat::model {

/// Per output position: the slot whose value tokens or closing <SEP> are
/// predicted there, or nullopt (description tokens, <EOS>).
struct InjectionAlignment {
  std::vector<std::optional<std::size_t>> slot_at;

  std::size_t size() const { return slot_at.size(); }
};

/// Entry j describes the step that predicts target token j. Throws DataError
/// when the target does not follow the state serialization layout.
InjectionAlignment build_injection_alignment(std::span<const data::TokenId> target,
                                             const data::Ontology& ontology,
                                             const data::Tokenizer& tokenizer);

/// logits_p = head([hidden_p, G[slot_at[p]] or 0]). `gat_features` is
/// N_ds x h; hidden has one row per alignment entry.
Var decode_with_injection(TrackerModel& model, Var hidden, Var gat_features,
                          const InjectionAlignment& alignment);

/// Language model, graph stack and the fixed task description they share.
/// Parameters are referenced by address during training, so a Tracker is
/// neither copied nor moved.
class Tracker {
 public:
  Tracker(const LmConfig& lm_config, const graph::GatConfig& gat_config, data::Ontology ontology,
          data::Tokenizer tokenizer);
  Tracker(const Tracker&) = delete;
  Tracker& operator=(const Tracker&) = delete;

  TrackerModel& lm() { return lm_; }
  graph::GatStack& gat() { return gat_; }
  const graph::GraphTopology& topology() const { return topology_; }
  const data::Ontology& ontology() const { return ontology_; }
  const data::Tokenizer& tokenizer() const { return tokenizer_; }
  const data::SlotPrompt& prompt() const { return prompt_; }
  const graph::GatConfig& gat_config() const { return gat_.config(); }
  bool uses_graph() const { return gat_config().type != graph::GraphType::kNoGraph; }

  /// Language-model and graph parameter groups with the given initial rates.
  std::vector<ParameterGroup> parameter_groups(double lr_lm, double lr_gat);
  std::vector<Parameter*> parameters();

 private:
  data::Ontology ontology_;
  data::Tokenizer tokenizer_;
  data::SlotPrompt prompt_;
  std::vector<std::vector<std::size_t>> value_tokens_;
  TrackerModel lm_;
  graph::GatStack gat_;
  graph::GraphTopology topology_;

  friend Var compute_value_embeddings(Tape&, Tracker&);
};

/// X^s: hidden states at the slot-token positions of "H <BOC> prompt". The
/// history is shortened from its oldest end so the whole input fits.
Var pre_extract_slot_features(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                              std::size_t turn);

/// X^v: each row is the mean token embedding of one ontology value.
Var compute_value_embeddings(Tape& tape, Tracker& tracker);

/// G_t (N_ds x h): graph output for the slot nodes, or zeros for NoGraph.
Var slot_graph_features(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                        std::size_t turn);

/// Mean cross-entropy of Y_t given "H_t <BOS>". Returns nullopt (and fills
/// `warning`) when not even one history token fits the context.
std::optional<Var> sample_loss(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                               std::size_t turn, std::string* warning = nullptr);

struct StepResult {
  double loss = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// Averages sample losses over the batch, backpropagates through both passes
/// and the graph, and applies one optimizer step.
StepResult train_step(Tracker& tracker, AdamW& optimizer, const data::Corpus& corpus,
                      std::span<const data::TurnSample> batch);

struct Prediction {
  data::BeliefState state;
  std::vector<std::string> warnings;
  data::TokenSequence generated;
};

struct DecodeOptions {
  std::size_t max_value_tokens = 8;
};

/// Constrained greedy decoding: slot names are forced in ontology order, value
/// tokens are generated with graph features injected, <SEP> and <EOS> close
/// the structure. Always yields a total state.
Prediction predict_state(Tracker& tracker, const data::Dialogue& dialogue, std::size_t turn,
                         const DecodeOptions& options = {});

enum class Regime { kFull, kLastTurn };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view name);

struct TrainConfig {
  Regime regime = Regime::kFull;
  /// 0 selects the default: 8 for full supervision, 36 for last-turn.
  std::size_t epochs = 0;
  double lr_lm = 6.25e-5;
  double lr_gat = 8e-5;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  AdamWConfig adamw;
  /// Stop after this many optimizer steps (0 = run all epochs).
  std::size_t max_steps = 0;

  std::size_t resolved_epochs() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0.0;
  double initial_train_loss = 0.0;
  std::vector<std::string> warnings;
};

std::vector<data::TurnSample> samples_for(const data::Corpus& corpus, Regime regime);

/// Mean loss over samples without updating parameters.
double evaluate_loss(Tracker& tracker, const data::Corpus& corpus,
                     std::span<const data::TurnSample> samples);

/// Trains with AdamW on two parameter groups and a linear decay schedule.
/// After training, parameters are restored to the epoch with the lowest
/// validation loss (training loss when `validation` is empty).
TrainLog train(Tracker& tracker, const data::Corpus& train_corpus,
               const data::Corpus& validation, const TrainConfig& config,
               const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace dstgat::model
