#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dstgat/data/dialogue.hpp"
#include "dstgat/data/ontology.hpp"

namespace dstgat::data {

using TokenId = std::size_t;
using TokenSequence = std::vector<TokenId>;

/// Whitespace tokenizer over a closed vocabulary. Ids are dense from 0; the
/// eight control tokens always occupy ids 0..7 in the order below.
class Tokenizer {
 public:
  static constexpr std::string_view kPad = "<PAD>";
  static constexpr std::string_view kUnk = "<UNK>";
  static constexpr std::string_view kUsr = "<USR>";
  static constexpr std::string_view kSys = "<SYS>";
  static constexpr std::string_view kBoc = "<BOC>";
  static constexpr std::string_view kBos = "<BOS>";
  static constexpr std::string_view kSep = "<SEP>";
  static constexpr std::string_view kEos = "<EOS>";
  static constexpr std::size_t kControlCount = 8;

  Tokenizer() = default;
  /// Rejects duplicates and vocabularies whose first entries are not the
  /// control tokens in canonical order.
  explicit Tokenizer(std::vector<std::string> vocabulary);

  std::size_t size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  bool contains(std::string_view token) const;
  /// Unknown tokens map to <UNK>.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return vocab_.at(id); }

  TokenSequence encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  /// Control tokens and per-slot tokens ("<...>" forms).
  bool is_special(TokenId id) const;

  TokenId pad() const { return 0; }
  TokenId unk() const { return 1; }
  TokenId usr() const { return 2; }
  TokenId sys() const { return 3; }
  TokenId boc() const { return 4; }
  TokenId bos() const { return 5; }
  TokenId sep() const { return 6; }
  TokenId eos() const { return 7; }

  friend bool operator==(const Tokenizer& a, const Tokenizer& b) { return a.vocab_ == b.vocab_; }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Control tokens, then one token per slot in ontology order, then every word
/// of the corpus, slot descriptions and values in sorted order.
Tokenizer build_vocab(const Corpus& corpus, const Ontology& ontology);

}  // namespace dstgat::data
