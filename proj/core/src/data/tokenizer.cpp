#include "dstgat/data/tokenizer.hpp"

#include <set>

#include "dstgat/data/text.hpp"

namespace dstgat::data {
namespace {

constexpr std::string_view kControl[Tokenizer::kControlCount] = {
    Tokenizer::kPad, Tokenizer::kUnk, Tokenizer::kUsr, Tokenizer::kSys,
    Tokenizer::kBoc, Tokenizer::kBos, Tokenizer::kSep, Tokenizer::kEos};

bool looks_special(std::string_view tok) {
  return tok.size() > 2 && tok.front() == '<' && tok.back() == '>';
}

}  // namespace

Tokenizer::Tokenizer(std::vector<std::string> vocabulary) : vocab_(std::move(vocabulary)) {
  if (vocab_.size() < kControlCount) throw DataError("tokenizer: vocabulary lacks control tokens");
  for (std::size_t i = 0; i < kControlCount; ++i) {
    if (vocab_[i] != kControl[i]) {
      throw DataError("tokenizer: expected '" + std::string(kControl[i]) + "' at id " +
                      std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (vocab_[i].empty() || split_whitespace(vocab_[i]).size() != 1) {
      throw DataError("tokenizer: invalid token at id " + std::to_string(i));
    }
    if (!index_.emplace(vocab_[i], i).second) {
      throw DataError("tokenizer: duplicate token '" + vocab_[i] + "'");
    }
  }
}

bool Tokenizer::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

TokenId Tokenizer::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? unk() : it->second;
}

TokenSequence Tokenizer::encode(std::string_view text) const {
  TokenSequence out;
  for (const std::string& w : split_whitespace(text)) out.push_back(id(w));
  return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

bool Tokenizer::is_special(TokenId id) const { return looks_special(vocab_.at(id)); }

Tokenizer build_vocab(const Corpus& corpus, const Ontology& ontology) {
  std::vector<std::string> vocab(std::begin(kControl), std::end(kControl));
  std::set<std::string> taken(vocab.begin(), vocab.end());
  for (const SlotSpec& s : ontology.slots()) {
    vocab.push_back(s.token());
    taken.insert(s.token());
  }
  std::set<std::string> words;
  auto add = [&](std::string_view text) {
    for (std::string& w : split_whitespace(text))
      if (!taken.count(w)) words.insert(std::move(w));
  };
  add(std::string(kNoneValue));
  for (const SlotSpec& s : ontology.slots()) add(s.description);
  for (const std::string& v : ontology.values()) add(v);
  for (const Dialogue& d : corpus) {
    for (const Turn& t : d.turns) {
      add(t.user);
      add(t.system);
      for (const std::string& v : t.state.values()) add(v);
    }
  }
  vocab.insert(vocab.end(), words.begin(), words.end());
  return Tokenizer(std::move(vocab));
}

}  // namespace dstgat::data
