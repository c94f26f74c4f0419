#include "dstgat/model/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dstgat::model {

using data::TokenId;
using data::TokenSequence;

InjectionAlignment build_injection_alignment(std::span<const TokenId> target,
                                             const data::Ontology& ontology,
                                             const data::Tokenizer& tokenizer) {
  InjectionAlignment out;
  out.slot_at.reserve(target.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < ontology.slot_count(); ++i) {
    const TokenSequence desc = tokenizer.encode(ontology.slot(i).description);
    for (TokenId t : desc) {
      if (pos >= target.size() || target[pos] != t) {
        throw data::DataError("injection alignment: expected description of " +
                              ontology.slot(i).token() + " at target position " +
                              std::to_string(pos));
      }
      out.slot_at.push_back(std::nullopt);
      ++pos;
    }
    const std::size_t value_start = pos;
    while (pos < target.size() && target[pos] != tokenizer.sep()) {
      if (target[pos] == tokenizer.eos()) {
        throw data::DataError("injection alignment: <EOS> inside value of " +
                              ontology.slot(i).token());
      }
      out.slot_at.push_back(i);
      ++pos;
    }
    if (pos == value_start) {
      throw data::DataError("injection alignment: empty value for " + ontology.slot(i).token());
    }
    if (pos >= target.size()) {
      throw data::DataError("injection alignment: missing <SEP> after " + ontology.slot(i).token());
    }
    // Decoding cannot tell a value step from the closing step in advance.
    out.slot_at.push_back(i);
    ++pos;
  }
  if (pos + 1 != target.size() || target[pos] != tokenizer.eos()) {
    throw data::DataError("injection alignment: target must end with a single <EOS>");
  }
  out.slot_at.push_back(std::nullopt);
  return out;
}

Var decode_with_injection(TrackerModel& model, Var hidden, Var gat_features,
                          const InjectionAlignment& alignment) {
  Tape& tape = *hidden.tape();
  if (hidden.rows() != alignment.size()) {
    throw DimensionError("decode_with_injection: " + std::to_string(alignment.size()) +
                         " alignment entries for hidden " + shape_of(hidden.value()));
  }
  if (gat_features.cols() != model.hidden()) {
    throw DimensionError("decode_with_injection: features " + shape_of(gat_features.value()) +
                         " but hidden size " + std::to_string(model.hidden()));
  }
  for (const auto& s : alignment.slot_at) {
    if (s && *s >= gat_features.rows()) {
      throw DimensionError("decode_with_injection: alignment slot " + std::to_string(*s) +
                           " outside " + shape_of(gat_features.value()));
    }
  }
  Var injected = ad::gather_rows_or_zero(gat_features, alignment.slot_at);
  Var input = ad::concat(hidden, injected, Axis::kCols);
  return ad::add_row(ad::matmul(input, tape.parameter(model.head_weight)),
                     tape.parameter(model.head_bias));
}

namespace {

graph::GraphTopology topology_for(graph::GraphType type, const data::Ontology& ontology) {
  switch (type) {
    case graph::GraphType::kNoGraph: return {};
    case graph::GraphType::kDSGraph: return graph::build_ds_graph(ontology);
    case graph::GraphType::kDSVGraph: return graph::build_dsv_graph(ontology);
  }
  return {};
}

std::vector<std::vector<std::size_t>> value_token_groups(const data::Ontology& ontology,
                                                         const data::Tokenizer& tokenizer) {
  std::vector<std::vector<std::size_t>> groups;
  for (const std::string& v : ontology.values()) {
    TokenSequence ids = tokenizer.encode(v);
    if (ids.empty() || std::find(ids.begin(), ids.end(), tokenizer.unk()) != ids.end()) {
      throw data::DataError("value '" + v + "' does not tokenize within the vocabulary");
    }
    groups.push_back(std::move(ids));
  }
  return groups;
}

std::size_t history_budget(std::size_t context, std::size_t reserved) {
  return context > reserved ? context - reserved : 0;
}

}  // namespace

Tracker::Tracker(const LmConfig& lm_config, const graph::GatConfig& gat_config,
                 data::Ontology ontology, data::Tokenizer tokenizer)
    : ontology_(std::move(ontology)),
      tokenizer_(std::move(tokenizer)),
      prompt_(data::slot_prompt_string(ontology_, tokenizer_)),
      value_tokens_(value_token_groups(ontology_, tokenizer_)),
      lm_(lm_config, tokenizer_.size()),
      gat_(gat_config, lm_config.hidden, lm_config.seed + 1),
      topology_(topology_for(gat_config.type, ontology_)) {
  if (uses_graph() && prompt_.tokens.size() + 1 >= lm_config.context) {
    throw data::DataError("context length " + std::to_string(lm_config.context) +
                          " cannot hold the slot prompt (" +
                          std::to_string(prompt_.tokens.size()) + " tokens)");
  }
  for (const data::SlotSpec& s : ontology_.slots()) {
    if (tokenizer_.id(s.token()) == tokenizer_.unk()) {
      throw data::DataError("tokenizer lacks slot token " + s.token());
    }
  }
}

std::vector<ParameterGroup> Tracker::parameter_groups(double lr_lm, double lr_gat) {
  return {ParameterGroup{"language_model", lm_.parameters(), lr_lm},
          ParameterGroup{"graph", gat_.parameters(), lr_gat}};
}

std::vector<Parameter*> Tracker::parameters() {
  std::vector<Parameter*> out = lm_.parameters();
  for (Parameter* p : gat_.parameters()) out.push_back(p);
  return out;
}

Var pre_extract_slot_features(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                              std::size_t turn) {
  const data::SlotPrompt& prompt = tracker.prompt();
  const std::size_t budget =
      history_budget(tracker.lm().config().context, prompt.tokens.size() + 1);
  TokenSequence seq = data::serialize_history(dialogue, turn, tracker.tokenizer(), budget);
  const std::size_t offset = seq.size() + 1;
  seq.push_back(tracker.tokenizer().boc());
  seq.insert(seq.end(), prompt.tokens.begin(), prompt.tokens.end());
  Var hidden = causal_forward(tape, tracker.lm(), seq);
  std::vector<std::size_t> rows;
  for (std::size_t p : prompt.slot_positions) rows.push_back(offset + p);
  return ad::gather_rows(hidden, rows);
}

Var compute_value_embeddings(Tape& tape, Tracker& tracker) {
  return ad::mean_of_rows(tape.parameter(tracker.lm().token_embedding), tracker.value_tokens_);
}

Var slot_graph_features(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                        std::size_t turn) {
  if (!tracker.uses_graph()) {
    return tape.constant(Matrix(tracker.ontology().slot_count(), tracker.lm().hidden()));
  }
  Var x = pre_extract_slot_features(tape, tracker, dialogue, turn);
  if (tracker.gat_config().type == graph::GraphType::kDSVGraph) {
    x = ad::concat(x, compute_value_embeddings(tape, tracker), Axis::kRows);
  }
  Var out = graph::gat_stack_forward(x, tracker.topology(), tracker.gat());
  return graph::slice_slot_outputs(out, tracker.topology());
}

std::optional<Var> sample_loss(Tape& tape, Tracker& tracker, const data::Dialogue& dialogue,
                               std::size_t turn, std::string* warning) {
  const data::Tokenizer& tok = tracker.tokenizer();
  const TokenSequence target =
      data::serialize_state(dialogue.turns.at(turn - 1).state, tracker.ontology(), tok);
  const std::size_t budget = history_budget(tracker.lm().config().context, target.size() + 1);
  if (budget == 0) {
    if (warning) {
      *warning = "dialogue '" + dialogue.id + "' turn " + std::to_string(turn) +
                 ": target does not fit the context; sample skipped";
    }
    return std::nullopt;
  }
  TokenSequence seq = data::serialize_history(dialogue, turn, tok, budget);
  const std::size_t start = seq.size();
  seq.push_back(tok.bos());
  seq.insert(seq.end(), target.begin(), target.end() - 1);

  const InjectionAlignment alignment =
      build_injection_alignment(target, tracker.ontology(), tok);
  Var gat_features = slot_graph_features(tape, tracker, dialogue, turn);
  Var hidden = causal_forward(tape, tracker.lm(), seq);
  Var target_hidden = ad::slice_rows(hidden, start, seq.size());
  Var logits = decode_with_injection(tracker.lm(), target_hidden, gat_features, alignment);
  return ad::cross_entropy(logits, target);
}

StepResult train_step(Tracker& tracker, AdamW& optimizer, const data::Corpus& corpus,
                      std::span<const data::TurnSample> batch) {
  if (batch.empty()) throw ContractViolation("train_step: empty batch");
  optimizer.zero_grad();
  StepResult result;
  double total = 0.0;
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const data::TurnSample& s : batch) {
    Tape tape;
    auto loss = sample_loss(tape, tracker, corpus.at(s.dialogue), s.turn);
    if (!loss) {
      ++result.skipped;
      continue;
    }
    total += loss->value()[0];
    ++result.used;
    tape.backward(ad::scale(*loss, weight));
  }
  if (result.used == 0) return result;
  if (result.used != batch.size()) {
    const double fix = static_cast<double>(batch.size()) / static_cast<double>(result.used);
    for (Parameter* p : tracker.parameters())
      for (double& g : p->grad.values()) g *= fix;
  }
  optimizer.step();
  result.loss = total / static_cast<double>(result.used);
  return result;
}

Prediction predict_state(Tracker& tracker, const data::Dialogue& dialogue, std::size_t turn,
                         const DecodeOptions& options) {
  const data::Tokenizer& tok = tracker.tokenizer();
  const data::Ontology& ontology = tracker.ontology();
  const std::size_t max_value = std::max<std::size_t>(options.max_value_tokens, 1);

  Matrix features;
  {
    Tape tape(false);
    features = slot_graph_features(tape, tracker, dialogue, turn).value();
  }

  std::vector<TokenSequence> descriptions;
  std::size_t max_target = 1;
  for (const data::SlotSpec& s : ontology.slots()) {
    descriptions.push_back(tok.encode(s.description));
    max_target += descriptions.back().size() + max_value + 1;
  }
  const std::size_t context = tracker.lm().config().context;
  TokenSequence seq =
      data::serialize_history(dialogue, turn, tok, history_budget(context, max_target + 1));
  seq.push_back(tok.bos());

  Prediction out;
  auto next_token = [&](std::size_t slot, bool allow_sep) {
    // Only the newest position is decoded; earlier rows are unaffected by
    // later tokens, so re-running the prefix is exact.
    Tape tape(false);
    const std::size_t start = seq.size() > context ? seq.size() - context : 0;
    Var hidden = causal_forward(tape, tracker.lm(),
                                std::span<const TokenId>(seq).subspan(start));
    Var last = ad::slice_rows(hidden, hidden.rows() - 1, hidden.rows());
    Var feats = tape.constant(features);
    InjectionAlignment align{{slot}};
    const Matrix& logits = decode_with_injection(tracker.lm(), last, feats, align).value();
    TokenId best = tok.sep();
    double best_score = -INFINITY;
    for (TokenId id = 0; id < logits.cols(); ++id) {
      const bool allowed = id == tok.sep() ? allow_sep : !tok.is_special(id);
      if (allowed && logits(0, id) > best_score) {
        best_score = logits(0, id);
        best = id;
      }
    }
    return best;
  };
  auto emit = [&](TokenId id) {
    seq.push_back(id);
    out.generated.push_back(id);
  };

  for (std::size_t i = 0; i < ontology.slot_count(); ++i) {
    for (TokenId t : descriptions[i]) emit(t);
    bool closed = false;
    for (std::size_t step = 0; step < max_value; ++step) {
      const TokenId t = next_token(i, step > 0);
      emit(t);
      if (t == tok.sep()) {
        closed = true;
        break;
      }
    }
    if (!closed) emit(tok.sep());
  }
  emit(tok.eos());
  data::ParsedState parsed = data::parse_state(out.generated, ontology, tok);
  out.state = std::move(parsed.state);
  out.warnings = std::move(parsed.warnings);
  return out;
}

std::string_view to_string(Regime r) { return r == Regime::kFull ? "full" : "last_turn"; }

Regime parse_regime(std::string_view name) {
  if (name == "full") return Regime::kFull;
  if (name == "last_turn") return Regime::kLastTurn;
  throw data::DataError("unknown regime '" + std::string(name) + "' (expected full or last_turn)");
}

std::size_t TrainConfig::resolved_epochs() const {
  if (epochs > 0) return epochs;
  return regime == Regime::kFull ? 8 : 36;
}

std::vector<data::TurnSample> samples_for(const data::Corpus& corpus, Regime regime) {
  return regime == Regime::kFull ? data::turn_samples(corpus) : data::last_turn_filter(corpus);
}

double evaluate_loss(Tracker& tracker, const data::Corpus& corpus,
                     std::span<const data::TurnSample> samples) {
  double total = 0.0;
  std::size_t used = 0;
  for (const data::TurnSample& s : samples) {
    Tape tape(false);
    if (auto loss = sample_loss(tape, tracker, corpus.at(s.dialogue), s.turn)) {
      total += loss->value()[0];
      ++used;
    }
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

TrainLog train(Tracker& tracker, const data::Corpus& train_corpus, const data::Corpus& validation,
               const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  if (train_corpus.empty()) throw data::DataError("train: empty training corpus");
  if (config.batch_size == 0) throw data::DataError("train: batch_size must be >= 1");
  std::vector<data::TurnSample> samples = samples_for(train_corpus, config.regime);
  const std::vector<data::TurnSample> val_samples = samples_for(validation, config.regime);
  const std::size_t epochs = config.resolved_epochs();
  const std::size_t per_epoch = (samples.size() + config.batch_size - 1) / config.batch_size;
  std::size_t total_steps = epochs * per_epoch;
  if (config.max_steps > 0) total_steps = std::min(total_steps, config.max_steps);

  AdamW optimizer(tracker.parameter_groups(config.lr_lm, config.lr_gat),
                  std::max<std::size_t>(total_steps, 1), config.adamw);
  std::mt19937_64 rng(config.seed);

  TrainLog log;
  log.initial_train_loss = evaluate_loss(tracker, train_corpus, samples);
  std::vector<Parameter*> params = tracker.parameters();
  std::vector<Matrix> best;
  bool have_best = false;

  for (std::size_t epoch = 1; epoch <= epochs && optimizer.steps_taken() < total_steps; ++epoch) {
    for (std::size_t i = samples.size(); i > 1; --i) {
      std::swap(samples[i - 1], samples[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
    }
    EpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < samples.size() && optimizer.steps_taken() < total_steps;
         b += config.batch_size) {
      const std::size_t e = std::min(samples.size(), b + config.batch_size);
      const StepResult r = train_step(tracker, optimizer, train_corpus,
                                      std::span<const data::TurnSample>(samples).subspan(b, e - b));
      loss_sum += r.loss * static_cast<double>(r.used);
      entry.samples += r.used;
      entry.skipped += r.skipped;
    }
    entry.train_loss = entry.samples ? loss_sum / static_cast<double>(entry.samples) : 0.0;
    entry.validation_loss =
        val_samples.empty() ? entry.train_loss : evaluate_loss(tracker, validation, val_samples);
    if (entry.skipped > 0) {
      log.warnings.push_back("epoch " + std::to_string(epoch) + ": skipped " +
                             std::to_string(entry.skipped) + " overlength samples");
    }
    if (!have_best || entry.validation_loss < log.best_validation_loss) {
      have_best = true;
      log.best_epoch = epoch;
      log.best_validation_loss = entry.validation_loss;
      best.clear();
      for (const Parameter* p : params) best.push_back(p->value);
    }
    log.epochs.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  if (have_best) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  }
  return log;
}

}  // namespace dstgat::model
