#include "dstgat/data/serialization.hpp"

#include <algorithm>

#include "dstgat/data/text.hpp"

namespace dstgat::data {

TokenSequence serialize_history(const Dialogue& dialogue, std::size_t turn,
                                const Tokenizer& tokenizer, std::size_t max_tokens) {
  if (turn < 1 || turn > dialogue.turn_count()) {
    throw DataError("serialize_history: turn " + std::to_string(turn) + " outside 1.." +
                    std::to_string(dialogue.turn_count()) + " of dialogue '" + dialogue.id + "'");
  }
  TokenSequence out = tokenizer.encode(dialogue.turns[turn - 1].user);
  if (out.size() > max_tokens) {
    out.resize(max_tokens);
    return out;
  }
  for (std::size_t k = turn - 1; k >= 1; --k) {
    TokenSequence block{tokenizer.sys()};
    const TokenSequence sys = tokenizer.encode(dialogue.turns[k - 1].system);
    const TokenSequence usr = tokenizer.encode(dialogue.turns[k - 1].user);
    block.insert(block.end(), sys.begin(), sys.end());
    block.push_back(tokenizer.usr());
    block.insert(block.end(), usr.begin(), usr.end());
    if (out.size() + block.size() > max_tokens) break;
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

SlotPrompt slot_prompt_string(const Ontology& ontology, const Tokenizer& tokenizer) {
  SlotPrompt prompt;
  for (const SlotSpec& s : ontology.slots()) {
    const TokenSequence desc = tokenizer.encode(s.description);
    prompt.tokens.insert(prompt.tokens.end(), desc.begin(), desc.end());
    prompt.slot_positions.push_back(prompt.tokens.size());
    prompt.tokens.push_back(tokenizer.id(s.token()));
  }
  return prompt;
}

TokenSequence serialize_state(const BeliefState& state, const Ontology& ontology,
                              const Tokenizer& tokenizer) {
  if (state.size() != ontology.slot_count()) {
    throw DataError("serialize_state: state has " + std::to_string(state.size()) +
                    " slots, ontology " + std::to_string(ontology.slot_count()));
  }
  TokenSequence out;
  for (std::size_t i = 0; i < ontology.slot_count(); ++i) {
    const TokenSequence desc = tokenizer.encode(ontology.slot(i).description);
    const TokenSequence value = tokenizer.encode(state.value(i));
    out.insert(out.end(), desc.begin(), desc.end());
    out.insert(out.end(), value.begin(), value.end());
    out.push_back(tokenizer.sep());
  }
  out.push_back(tokenizer.eos());
  return out;
}

ParsedState parse_state(std::span<const TokenId> tokens, const Ontology& ontology,
                        const Tokenizer& tokenizer) {
  ParsedState result{BeliefState(ontology.slot_count()), {}};
  std::vector<TokenSequence> descriptions;
  for (const SlotSpec& s : ontology.slots()) descriptions.push_back(tokenizer.encode(s.description));

  std::vector<TokenSequence> segments;
  TokenSequence current;
  bool saw_eos = false;
  std::size_t i = 0;
  for (; i < tokens.size(); ++i) {
    const TokenId t = tokens[i];
    if (t == tokenizer.eos()) {
      saw_eos = true;
      break;
    }
    if (t == tokenizer.sep()) {
      segments.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(t);
    }
  }
  if (!current.empty()) segments.push_back(std::move(current));
  if (!saw_eos) result.warnings.push_back("missing <EOS>");
  if (saw_eos && i + 1 < tokens.size()) result.warnings.push_back("tokens after <EOS> ignored");

  auto matches = [&](const TokenSequence& seg, std::size_t slot) {
    const TokenSequence& d = descriptions[slot];
    return seg.size() >= d.size() && std::equal(d.begin(), d.end(), seg.begin());
  };

  std::vector<bool> assigned(ontology.slot_count(), false);
  std::size_t cursor = 0;
  for (const TokenSequence& seg : segments) {
    if (seg.empty()) {
      result.warnings.push_back("empty segment");
      continue;
    }
    std::optional<std::size_t> slot;
    for (std::size_t j = cursor; j < ontology.slot_count() && !slot; ++j)
      if (matches(seg, j)) slot = j;
    for (std::size_t j = 0; j < cursor && !slot; ++j)
      if (!assigned[j] && matches(seg, j)) slot = j;
    if (!slot) {
      result.warnings.push_back("unrecognized segment '" + tokenizer.decode(seg) + "'");
      continue;
    }
    const std::span<const TokenId> value(seg.begin() + static_cast<long>(descriptions[*slot].size()),
                                         seg.end());
    const std::string& key = ontology.slot(*slot).token();
    if (assigned[*slot]) {
      result.warnings.push_back("duplicate segment for " + key);
      continue;
    }
    assigned[*slot] = true;
    cursor = *slot + 1;
    if (value.empty()) {
      result.warnings.push_back("empty value for " + key);
      continue;
    }
    result.state.set(*slot, tokenizer.decode(value));
  }
  for (std::size_t j = 0; j < ontology.slot_count(); ++j) {
    if (!assigned[j]) result.warnings.push_back("missing slot " + ontology.slot(j).token());
  }
  return result;
}

std::vector<TurnSample> turn_samples(const Corpus& corpus) {
  std::vector<TurnSample> out;
  for (std::size_t d = 0; d < corpus.size(); ++d)
    for (std::size_t t = 1; t <= corpus[d].turn_count(); ++t) out.push_back({d, t});
  return out;
}

std::vector<TurnSample> last_turn_filter(const Corpus& corpus) {
  std::vector<TurnSample> out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (corpus[d].turn_count() > 0) out.push_back({d, corpus[d].turn_count()});
  }
  return out;
}

}  // namespace dstgat::data
