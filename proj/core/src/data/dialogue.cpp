#include "dstgat/data/dialogue.hpp"

#include <sstream>

#include "dstgat/data/text.hpp"
#include "json.hpp"

namespace dstgat::data {

using nlohmann::ordered_json;

BeliefState::BeliefState(std::size_t slot_count) : values_(slot_count, std::string(kNoneValue)) {}

void BeliefState::set(std::size_t slot, std::string_view value) {
  std::string v = normalize_whitespace(value);
  values_.at(slot) = v.empty() ? std::string(kNoneValue) : std::move(v);
}

std::size_t BeliefState::filled_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v != kNoneValue;
  return n;
}

std::size_t total_turns(const Corpus& corpus) {
  std::size_t n = 0;
  for (const Dialogue& d : corpus) n += d.turn_count();
  return n;
}

namespace {

ordered_json state_object(const BeliefState& state, const Ontology& ontology) {
  ordered_json obj = ordered_json::object();
  for (std::size_t i = 0; i < state.size(); ++i)
    if (state.filled(i)) obj[ontology.slot(i).key()] = state.value(i);
  return obj;
}

BeliefState state_from_object(const ordered_json& obj, const Ontology& ontology,
                              const std::string& where) {
  if (!obj.is_object()) throw DataError(where + ": state must be an object");
  BeliefState state(ontology.slot_count());
  for (const auto& [key, value] : obj.items()) {
    const auto idx = ontology.slot_index(key);
    if (!idx) throw DataError(where + ": unknown slot '" + key + "'");
    if (!value.is_string()) throw DataError(where + ": value of '" + key + "' must be a string");
    state.set(*idx, value.get<std::string>());
  }
  return state;
}

std::string string_field(const ordered_json& obj, const char* name, const std::string& where) {
  if (!obj.contains(name) || !obj.at(name).is_string()) {
    throw DataError(where + ": missing string field '" + name + "'");
  }
  return obj.at(name).get<std::string>();
}

}  // namespace

std::string state_to_json(const BeliefState& state, const Ontology& ontology) {
  return state_object(state, ontology).dump();
}

BeliefState state_from_json(std::string_view text, const Ontology& ontology) {
  try {
    return state_from_object(ordered_json::parse(text), ontology, "state");
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("state: ") + e.what(), 1);
  }
}

Corpus parse_corpus(std::string_view text, const Ontology& ontology) {
  Corpus corpus;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (normalize_whitespace(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = "corpus line " + std::to_string(line_no);
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("corpus: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw ParseError("corpus: record must be an object", line_no);
    Dialogue d;
    d.id = string_field(rec, "id", where);
    if (!rec.contains("turns") || !rec["turns"].is_array()) {
      throw ParseError("corpus: record needs a 'turns' array", line_no);
    }
    for (const auto& t : rec["turns"]) {
      Turn turn;
      turn.user = normalize_whitespace(string_field(t, "user", where));
      turn.system = t.contains("system") ? normalize_whitespace(string_field(t, "system", where)) : "";
      turn.state = t.contains("state") ? state_from_object(t["state"], ontology, where)
                                       : BeliefState(ontology.slot_count());
      d.turns.push_back(std::move(turn));
    }
    if (d.turns.empty()) throw ParseError("corpus: dialogue '" + d.id + "' has no turns", line_no);
    corpus.push_back(std::move(d));
    if (end == text.size()) break;
  }
  return corpus;
}

std::string dump_corpus(const Corpus& corpus, const Ontology& ontology) {
  std::ostringstream os;
  for (const Dialogue& d : corpus) {
    ordered_json rec;
    rec["id"] = d.id;
    rec["turns"] = ordered_json::array();
    for (const Turn& t : d.turns) {
      ordered_json jt;
      jt["user"] = t.user;
      jt["system"] = t.system;
      jt["state"] = state_object(t.state, ontology);
      rec["turns"].push_back(std::move(jt));
    }
    os << rec.dump() << '\n';
  }
  return os.str();
}

Corpus load_corpus(const std::filesystem::path& path, const Ontology& ontology) {
  return parse_corpus(read_file(path.string()), ontology);
}

void save_corpus(const Corpus& corpus, const Ontology& ontology, const std::filesystem::path& path) {
  write_file(path.string(), dump_corpus(corpus, ontology));
}

}  // namespace dstgat::data
