#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dstgat::data {

/// Bad input data or configuration (a user-facing error, not a bug).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents; `line` is 1-based (0 when unknown).
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One domain-slot pair, e.g. hotel-name.
struct SlotSpec {
  std::string domain;
  std::string slot;
  /// Free text preceding the slot in prompts and in generated states.
  std::string description;
  /// Indices into Ontology::values().
  std::vector<std::size_t> candidates;

  std::string key() const { return domain + "-" + slot; }
  /// Dedicated vocabulary token, e.g. "<hotel-name>".
  std::string token() const { return "<" + key() + ">"; }
};

/// Domains, ordered domain-slot pairs and the global value list. Slot order is
/// canonical and shared by every consumer.
class Ontology {
 public:
  Ontology() = default;
  /// Validates: no duplicate slots or values, every slot domain declared,
  /// candidates in range, and 'none' never listed as a value.
  Ontology(std::vector<std::string> domains, std::vector<SlotSpec> slots,
           std::vector<std::string> values);

  const std::vector<std::string>& domains() const { return domains_; }
  const std::vector<SlotSpec>& slots() const { return slots_; }
  const std::vector<std::string>& values() const { return values_; }
  const SlotSpec& slot(std::size_t i) const { return slots_.at(i); }

  std::size_t domain_count() const { return domains_.size(); }
  std::size_t slot_count() const { return slots_.size(); }
  std::size_t value_count() const { return values_.size(); }

  std::optional<std::size_t> slot_index(std::string_view key) const;
  std::optional<std::size_t> value_index(std::string_view value) const;
  std::vector<std::string> slot_keys() const;

  friend bool operator==(const Ontology&, const Ontology&);

 private:
  std::vector<std::string> domains_;
  std::vector<SlotSpec> slots_;
  std::vector<std::string> values_;
};

bool operator==(const SlotSpec& a, const SlotSpec& b);

/// Parses the ontology document: {domains, slots:[{domain, slot, description,
/// candidates}], values}. Candidates are value strings.
Ontology parse_ontology(std::string_view text);
std::string dump_ontology(const Ontology& ontology);

Ontology load_ontology(const std::filesystem::path& path);
void save_ontology(const Ontology& ontology, const std::filesystem::path& path);

}  // namespace dstgat::data
