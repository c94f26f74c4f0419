#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dstgat/data/dialogue.hpp"
#include "dstgat/data/ontology.hpp"

namespace dstgat::data {

/// Desk-scale substitute for a multi-domain DST corpus. Every domain carries
/// the same slot names, and a slot name draws from one value pool shared by
/// all domains, so cross-domain slots overlap in their candidate sets.
struct SynthConfig {
  std::size_t domain_count = 3;
  std::size_t slots_per_domain = 3;
  /// Candidates per slot (prefix of the slot name's built-in pool).
  std::size_t values_per_pool = 4;
  /// Probability that the second slot of a designated pair copies the value
  /// of the first when both are filled.
  double rho = 0.9;
  /// Slot-key pairs, e.g. {"hotel-area", "restaurant-area"}. Empty selects
  /// every same-named slot between the first two domains.
  std::vector<std::pair<std::string, std::string>> correlated_pairs;
  std::size_t dialogue_count = 100;
  std::size_t min_turns = 2;
  std::size_t max_turns = 6;
  double domain_probability = 0.7;
  double slot_fill_probability = 0.8;
  /// Chance that an aligned paired value is requested by reference ("the
  /// same area as the hotel") instead of verbatim.
  double coreference_probability = 0.5;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  Ontology ontology;
  Corpus corpus;
  /// Resolved designated pairs as slot indices (first < second).
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Throws DataError on inconsistent configs (rho outside [0,1], unknown or
/// disjoint pairs, empty turn range, sizes beyond the built-in inventories).
void validate(const SynthConfig& config);

/// Ontology implied by the config, independent of the seed.
Ontology synth_ontology(const SynthConfig& config);

/// Deterministic given config.seed. Gold states are cumulative and monotone,
/// and each value is said verbatim at or before the turn it enters the state.
SynthCorpus generate_synthetic_corpus(const SynthConfig& config);

}  // namespace dstgat::data
