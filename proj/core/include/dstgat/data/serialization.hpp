#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dstgat/data/dialogue.hpp"
#include "dstgat/data/ontology.hpp"
#include "dstgat/data/tokenizer.hpp"

namespace dstgat::data {

inline constexpr std::size_t kUnlimited = std::numeric_limits<std::size_t>::max();

/// Dialogue history at 1-based turn `turn`, most recent first:
///   u_t <SYS> s_{t-1} <USR> u_{t-1} ... <SYS> s_1 <USR> u_1
/// When longer than `max_tokens`, whole (system, user) blocks are dropped from
/// the oldest end. The current utterance is always kept; if it alone exceeds
/// the budget its leading `max_tokens` tokens are returned.
TokenSequence serialize_history(const Dialogue& dialogue, std::size_t turn,
                                const Tokenizer& tokenizer, std::size_t max_tokens = kUnlimited);

/// Fixed prompt listing every slot: description words followed by the slot's
/// dedicated token. `slot_positions[i]` indexes the token of slot i.
struct SlotPrompt {
  TokenSequence tokens;
  std::vector<std::size_t> slot_positions;
};

SlotPrompt slot_prompt_string(const Ontology& ontology, const Tokenizer& tokenizer);

/// "<description> <value> <SEP>" per slot in ontology order, then <EOS>.
TokenSequence serialize_state(const BeliefState& state, const Ontology& ontology,
                              const Tokenizer& tokenizer);

struct ParsedState {
  BeliefState state;
  std::vector<std::string> warnings;
};

/// Inverse of serialize_state that tolerates malformed output: absent slots
/// become "none" and every repair is reported as a warning. Never throws.
ParsedState parse_state(std::span<const TokenId> tokens, const Ontology& ontology,
                        const Tokenizer& tokenizer);

/// One supervised example: dialogue index into the corpus and 1-based turn.
struct TurnSample {
  std::size_t dialogue = 0;
  std::size_t turn = 0;

  friend bool operator==(const TurnSample&, const TurnSample&) = default;
};

/// Every turn of every dialogue.
std::vector<TurnSample> turn_samples(const Corpus& corpus);
/// One sample per dialogue, at its final turn.
std::vector<TurnSample> last_turn_filter(const Corpus& corpus);

}  // namespace dstgat::data
