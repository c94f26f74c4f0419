#include "dstgat/data/synth.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace dstgat::data {
namespace {

const std::vector<std::string> kDomains = {"hotel", "restaurant", "attraction", "taxi",
                                           "train", "hospital",   "police",     "bus"};

struct Pool {
  std::string slot;
  std::vector<std::string> values;
};

const std::vector<Pool> kPools = {
    {"area", {"north", "south", "east", "west", "centre", "riverside"}},
    {"pricerange", {"cheap", "expensive", "moderate", "luxury", "budget"}},
    {"day", {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"}},
    {"people", {"2", "3", "4", "5", "6", "7", "8"}},
    {"time", {"18 : 00", "09 : 30", "12 : 15", "20 : 45", "07 : 00", "14 : 30"}},
    {"stars", {"3", "4", "5", "2", "1"}},
    {"name", {"demo hotel", "blue lagoon", "old mill", "grand arcade", "red lion", "kings cross"}},
};

const std::vector<std::string> kSystem = {"sure , what else do you need ?", "i can help with that .",
                                          "noted , anything else ?", "okay , let me check ."};
const std::vector<std::string> kOpen = {"hello i am planning a trip", "hi can you help me",
                                        "i have a question"};
const std::vector<std::string> kClose = {"thank you that is all", "great thanks",
                                         "that will be all"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const SynthConfig& c,
                                                               const Ontology& o) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (c.correlated_pairs.empty()) {
    if (c.domain_count >= 2) {
      for (std::size_t s = 0; s < c.slots_per_domain; ++s) pairs.emplace_back(s, c.slots_per_domain + s);
    }
    return pairs;
  }
  for (const auto& [ka, kb] : c.correlated_pairs) {
    const auto a = o.slot_index(ka);
    const auto b = o.slot_index(kb);
    if (!a || !b) throw DataError("synth: correlated pair references unknown slot '" +
                                  (a ? kb : ka) + "'");
    if (*a == *b) throw DataError("synth: correlated pair pairs '" + ka + "' with itself");
    pairs.emplace_back(std::min(*a, *b), std::max(*a, *b));
  }
  return pairs;
}

}  // namespace

void validate(const SynthConfig& c) {
  if (!(c.rho >= 0.0 && c.rho <= 1.0)) throw DataError("synth: rho must lie in [0, 1]");
  for (double p : {c.domain_probability, c.slot_fill_probability, c.coreference_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("synth: probabilities must lie in [0, 1]");
  }
  if (c.domain_count < 1 || c.domain_count > kDomains.size()) {
    throw DataError("synth: domain_count must be in 1.." + std::to_string(kDomains.size()));
  }
  if (c.slots_per_domain < 1 || c.slots_per_domain > kPools.size()) {
    throw DataError("synth: slots_per_domain must be in 1.." + std::to_string(kPools.size()));
  }
  if (c.values_per_pool < 1) throw DataError("synth: values_per_pool must be >= 1");
  for (std::size_t s = 0; s < c.slots_per_domain; ++s) {
    if (c.values_per_pool > kPools[s].values.size()) {
      throw DataError("synth: pool '" + kPools[s].slot + "' has only " +
                      std::to_string(kPools[s].values.size()) + " values");
    }
  }
  if (c.min_turns < 1 || c.min_turns > c.max_turns) {
    throw DataError("synth: need 1 <= min_turns <= max_turns");
  }
  if (c.dialogue_count < 1) throw DataError("synth: dialogue_count must be >= 1");
  const Ontology o = synth_ontology(c);
  for (const auto& [a, b] : resolve_pairs(c, o)) {
    const auto& ca = o.slot(a).candidates;
    const auto& cb = o.slot(b).candidates;
    const bool overlap = std::any_of(ca.begin(), ca.end(), [&](std::size_t v) {
      return std::find(cb.begin(), cb.end(), v) != cb.end();
    });
    if (!overlap) {
      throw DataError("synth: paired slots '" + o.slot(a).key() + "' and '" + o.slot(b).key() +
                      "' have disjoint candidate sets");
    }
  }
}

Ontology synth_ontology(const SynthConfig& c) {
  std::vector<std::string> domains(kDomains.begin(), kDomains.begin() + static_cast<long>(c.domain_count));
  std::vector<std::string> values;
  std::vector<std::vector<std::size_t>> pool_ids;
  for (std::size_t s = 0; s < c.slots_per_domain; ++s) {
    std::vector<std::size_t> ids;
    for (std::size_t v = 0; v < c.values_per_pool && v < kPools[s].values.size(); ++v) {
      const std::string& val = kPools[s].values[v];
      auto it = std::find(values.begin(), values.end(), val);
      if (it == values.end()) {
        values.push_back(val);
        ids.push_back(values.size() - 1);
      } else {
        ids.push_back(static_cast<std::size_t>(it - values.begin()));
      }
    }
    pool_ids.push_back(std::move(ids));
  }
  std::vector<SlotSpec> slots;
  for (const std::string& d : domains) {
    for (std::size_t s = 0; s < c.slots_per_domain; ++s) {
      slots.push_back({d, kPools[s].slot, d + " " + kPools[s].slot, pool_ids[s]});
    }
  }
  return Ontology(std::move(domains), std::move(slots), std::move(values));
}

SynthCorpus generate_synthetic_corpus(const SynthConfig& c) {
  validate(c);
  SynthCorpus out{synth_ontology(c), {}, {}};
  const Ontology& o = out.ontology;
  out.pairs = resolve_pairs(c, o);
  std::vector<std::optional<std::size_t>> partner(o.slot_count());
  for (const auto& [a, b] : out.pairs)
    if (!partner[b]) partner[b] = a;

  Rng rng(c.seed);
  for (std::size_t n = 0; n < c.dialogue_count; ++n) {
    // Which domains and slots this session touches.
    std::vector<std::size_t> active;
    for (std::size_t d = 0; d < c.domain_count; ++d)
      if (rng.uniform() < c.domain_probability) active.push_back(d);
    if (active.empty()) active.push_back(rng.index(c.domain_count));

    BeliefState goal(o.slot_count());
    std::vector<std::size_t> mentioned_slots;
    for (std::size_t d : active) {
      std::vector<std::size_t> slots;
      for (std::size_t s = 0; s < c.slots_per_domain; ++s)
        if (rng.uniform() < c.slot_fill_probability) slots.push_back(d * c.slots_per_domain + s);
      if (slots.empty()) slots.push_back(d * c.slots_per_domain + rng.index(c.slots_per_domain));
      for (std::size_t s : slots) goal.set(s, "x");  // placeholder; values drawn below
    }
    // Values in ontology order, so a pair's first slot is decided first.
    for (std::size_t s = 0; s < o.slot_count(); ++s) {
      if (!goal.filled(s)) continue;
      const auto& cand = o.slot(s).candidates;
      std::string value = o.values()[rng.pick(cand)];
      if (partner[s] && goal.filled(*partner[s]) && rng.uniform() < c.rho) {
        const std::string& lead = goal.value(*partner[s]);
        const auto lead_id = o.value_index(lead);
        if (lead_id && std::find(cand.begin(), cand.end(), *lead_id) != cand.end()) {
          value = lead;
        } else {
          std::vector<std::size_t> shared;
          for (std::size_t v : o.slot(*partner[s]).candidates)
            if (std::find(cand.begin(), cand.end(), v) != cand.end()) shared.push_back(v);
          value = o.values()[rng.pick(shared)];
        }
      }
      goal.set(s, value);
    }

    // Mention order: domain by domain, slots shuffled within a domain.
    rng.shuffle(active);
    for (std::size_t d : active) {
      std::vector<std::size_t> slots;
      for (std::size_t s = 0; s < c.slots_per_domain; ++s)
        if (goal.filled(d * c.slots_per_domain + s)) slots.push_back(d * c.slots_per_domain + s);
      rng.shuffle(slots);
      mentioned_slots.insert(mentioned_slots.end(), slots.begin(), slots.end());
    }

    const std::size_t turns = c.min_turns + rng.index(c.max_turns - c.min_turns + 1);
    std::vector<std::size_t> turn_of(mentioned_slots.size());
    for (auto& t : turn_of) t = rng.index(turns);
    std::sort(turn_of.begin(), turn_of.end());

    Dialogue dialogue;
    dialogue.id = "synth-" + std::to_string(n);
    BeliefState state(o.slot_count());
    std::set<std::size_t> said;
    std::size_t next = 0;
    for (std::size_t t = 0; t < turns; ++t) {
      std::vector<std::string> phrases;
      while (next < mentioned_slots.size() && turn_of[next] == t) {
        const std::size_t s = mentioned_slots[next++];
        const SlotSpec& spec = o.slot(s);
        const std::string& value = goal.value(s);
        const bool can_refer = partner[s] && said.count(*partner[s]) &&
                               goal.value(*partner[s]) == value;
        if (can_refer && rng.uniform() < c.coreference_probability) {
          phrases.push_back("the " + spec.domain + " " + spec.slot + " should be the same as the " +
                            o.slot(*partner[s]).domain);
        } else {
          switch (rng.index(3)) {
            case 0:
              phrases.push_back("i need a " + spec.domain + " with " + spec.slot + " " + value);
              break;
            case 1:
              phrases.push_back("the " + spec.domain + " " + spec.slot + " should be " + value);
              break;
            default:
              phrases.push_back(value + " for the " + spec.domain + " " + spec.slot + " please");
              break;
          }
        }
        said.insert(s);
        state.set(s, value);
      }
      std::string user;
      if (phrases.empty()) {
        user = t == 0 ? rng.pick(kOpen) : rng.pick(kClose);
      } else {
        for (std::size_t i = 0; i < phrases.size(); ++i) user += (i ? " and " : "") + phrases[i];
      }
      dialogue.turns.push_back({user, rng.pick(kSystem), state});
    }
    out.corpus.push_back(std::move(dialogue));
  }
  return out;
}

}  // namespace dstgat::data
