#include "dstgat/data/ontology.hpp"

#include <set>

#include "dstgat/data/text.hpp"
#include "json.hpp"

namespace dstgat::data {

using nlohmann::ordered_json;

ParseError::ParseError(const std::string& what, std::size_t line)
    : DataError(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}

bool operator==(const SlotSpec& a, const SlotSpec& b) {
  return a.domain == b.domain && a.slot == b.slot && a.description == b.description &&
         a.candidates == b.candidates;
}

bool operator==(const Ontology& a, const Ontology& b) {
  return a.domains_ == b.domains_ && a.slots_ == b.slots_ && a.values_ == b.values_;
}

Ontology::Ontology(std::vector<std::string> domains, std::vector<SlotSpec> slots,
                   std::vector<std::string> values)
    : domains_(std::move(domains)), slots_(std::move(slots)), values_(std::move(values)) {
  if (slots_.empty()) throw DataError("ontology: no slots");
  std::set<std::string> seen_domains(domains_.begin(), domains_.end());
  if (seen_domains.size() != domains_.size()) throw DataError("ontology: duplicate domain");
  std::set<std::string> seen_values;
  for (std::string& v : values_) {
    v = normalize_whitespace(v);
    if (v.empty()) throw DataError("ontology: empty value string");
    if (v == "none") throw DataError("ontology: 'none' is reserved and cannot be a value");
    if (!seen_values.insert(v).second) throw DataError("ontology: duplicate value '" + v + "'");
  }
  std::set<std::string> seen_slots;
  for (SlotSpec& s : slots_) {
    if (s.domain.empty() || s.slot.empty()) throw DataError("ontology: slot with empty name");
    if (!seen_domains.count(s.domain)) {
      throw DataError("ontology: slot '" + s.key() + "' uses undeclared domain '" + s.domain + "'");
    }
    if (!seen_slots.insert(s.key()).second) {
      throw DataError("ontology: duplicate slot '" + s.key() + "'");
    }
    if (normalize_whitespace(s.description).empty()) s.description = s.domain + " " + s.slot;
    s.description = normalize_whitespace(s.description);
    std::set<std::size_t> cand;
    for (std::size_t c : s.candidates) {
      if (c >= values_.size()) {
        throw DataError("ontology: slot '" + s.key() + "' candidate index " + std::to_string(c) +
                        " outside value list");
      }
      if (!cand.insert(c).second) {
        throw DataError("ontology: slot '" + s.key() + "' lists candidate '" + values_[c] +
                        "' twice");
      }
    }
  }
}

std::optional<std::size_t> Ontology::slot_index(std::string_view key) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].key() == key) return i;
  return std::nullopt;
}

std::optional<std::size_t> Ontology::value_index(std::string_view value) const {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] == value) return i;
  return std::nullopt;
}

std::vector<std::string> Ontology::slot_keys() const {
  std::vector<std::string> keys;
  for (const SlotSpec& s : slots_) keys.push_back(s.key());
  return keys;
}

namespace {

template <typename T>
T field(const ordered_json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw DataError(where + ": missing field '" + name + "'");
  }
  try {
    return obj.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": field '" + name + "' has the wrong type");
  }
}

}  // namespace

Ontology parse_ontology(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("ontology: ") + e.what(), line_of_offset(text, e.byte));
  }
  auto domains = field<std::vector<std::string>>(doc, "domains", "ontology");
  auto values = field<std::vector<std::string>>(doc, "values", "ontology");
  for (auto& v : values) v = normalize_whitespace(v);
  if (!doc.is_object() || !doc.contains("slots")) throw DataError("ontology: missing field 'slots'");
  const auto& slot_docs = doc.at("slots");
  if (!slot_docs.is_array()) throw DataError("ontology: 'slots' must be an array");
  std::vector<SlotSpec> slots;
  for (std::size_t i = 0; i < slot_docs.size(); ++i) {
    const auto& sd = slot_docs[i];
    const std::string where = "ontology slot #" + std::to_string(i);
    SlotSpec s;
    s.domain = field<std::string>(sd, "domain", where);
    s.slot = field<std::string>(sd, "slot", where);
    s.description = sd.contains("description") ? field<std::string>(sd, "description", where) : "";
    for (const auto& c : field<std::vector<std::string>>(sd, "candidates", where)) {
      const std::string v = normalize_whitespace(c);
      std::size_t idx = values.size();
      for (std::size_t k = 0; k < values.size(); ++k)
        if (values[k] == v) idx = k;
      if (idx == values.size()) {
        throw DataError(where + " (" + s.domain + "-" + s.slot + "): candidate '" + v +
                        "' is not in the value list");
      }
      s.candidates.push_back(idx);
    }
    slots.push_back(std::move(s));
  }
  return Ontology(std::move(domains), std::move(slots), std::move(values));
}

std::string dump_ontology(const Ontology& ontology) {
  ordered_json doc;
  doc["domains"] = ontology.domains();
  doc["slots"] = ordered_json::array();
  for (const SlotSpec& s : ontology.slots()) {
    ordered_json sd;
    sd["domain"] = s.domain;
    sd["slot"] = s.slot;
    sd["description"] = s.description;
    std::vector<std::string> cands;
    for (std::size_t c : s.candidates) cands.push_back(ontology.values()[c]);
    sd["candidates"] = cands;
    doc["slots"].push_back(std::move(sd));
  }
  doc["values"] = ontology.values();
  return doc.dump(2) + "\n";
}

Ontology load_ontology(const std::filesystem::path& path) {
  return parse_ontology(read_file(path.string()));
}

void save_ontology(const Ontology& ontology, const std::filesystem::path& path) {
  write_file(path.string(), dump_ontology(ontology));
}

}  // namespace dstgat::data
