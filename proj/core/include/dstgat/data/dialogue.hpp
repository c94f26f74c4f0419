#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dstgat/data/ontology.hpp"

namespace dstgat::data {

inline constexpr std::string_view kNoneValue = "none";

/// Total assignment of every domain-slot to a value string; unfilled slots
/// hold "none". Values are stored whitespace-normalized.
class BeliefState {
 public:
  BeliefState() = default;
  explicit BeliefState(std::size_t slot_count);

  std::size_t size() const { return values_.size(); }
  const std::string& value(std::size_t slot) const { return values_.at(slot); }
  bool filled(std::size_t slot) const { return values_.at(slot) != kNoneValue; }
  /// Empty or all-whitespace values are stored as "none".
  void set(std::size_t slot, std::string_view value);
  void clear(std::size_t slot) { values_.at(slot) = std::string(kNoneValue); }
  const std::vector<std::string>& values() const { return values_; }
  std::size_t filled_count() const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  std::vector<std::string> values_;
};

struct Turn {
  std::string user;
  std::string system;
  /// Cumulative gold state after this turn.
  BeliefState state;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  std::size_t turn_count() const { return turns.size(); }
};

using Corpus = std::vector<Dialogue>;

std::size_t total_turns(const Corpus& corpus);

/// Corpus files hold one JSON record per line:
/// {"id", "turns":[{"user", "system", "state":{slot-key: value}}]}. States are
/// sparse; omitted slots are "none".
Corpus parse_corpus(std::string_view text, const Ontology& ontology);
std::string dump_corpus(const Corpus& corpus, const Ontology& ontology);
Corpus load_corpus(const std::filesystem::path& path, const Ontology& ontology);
void save_corpus(const Corpus& corpus, const Ontology& ontology, const std::filesystem::path& path);

/// Sparse {slot-key: value} object for one state, as embedded in corpus and
/// prediction files.
std::string state_to_json(const BeliefState& state, const Ontology& ontology);
BeliefState state_from_json(std::string_view text, const Ontology& ontology);

}  // namespace dstgat::data
