#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dstgat/data/tokenizer.hpp"
#include "dstgat/numeric/autodiff.hpp"

namespace dstgat::model {

struct LmConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  /// Hidden size h; also the GAT feature dimension.
  std::size_t hidden = 32;
  std::size_t context = 256;
  std::size_t ff_mult = 4;
  std::uint64_t seed = 0;
  /// Standard deviation of the normal initializer for every weight matrix and
  /// embedding table. Layer-norm gains start at 1, biases at 0.
  double init_scale = 0.02;

  void validate() const;
};

struct AttentionHead {
  Parameter query;
  Parameter key;
  Parameter value;
};

struct Block {
  Parameter ln1_gain, ln1_bias;
  std::vector<AttentionHead> heads;
  Parameter proj, proj_bias;
  Parameter ln2_gain, ln2_bias;
  Parameter ff_in, ff_in_bias;
  Parameter ff_out, ff_out_bias;
};

/// Pre-norm causal transformer with learned positions and a decode head that
/// reads 2h inputs: the hidden state and an injected h-vector.
class TrackerModel {
 public:
  TrackerModel(const LmConfig& config, std::size_t vocab_size);
  TrackerModel(const TrackerModel&) = delete;
  TrackerModel& operator=(const TrackerModel&) = delete;

  const LmConfig& config() const { return config_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t hidden() const { return config_.hidden; }

  std::vector<Parameter*> parameters();

  Parameter token_embedding;     // vocab x h
  Parameter position_embedding;  // context x h
  std::vector<Block> blocks;
  Parameter final_gain, final_bias;
  Parameter head_weight;  // 2h x vocab
  Parameter head_bias;    // 1 x vocab

 private:
  LmConfig config_;
  std::size_t vocab_size_;
};

/// Final-layer hidden states (len x h). Position p only sees tokens <= p.
/// Throws ContractViolation when the input exceeds the context length.
Var causal_forward(Tape& tape, TrackerModel& model, std::span<const data::TokenId> tokens);

}  // namespace dstgat::model
