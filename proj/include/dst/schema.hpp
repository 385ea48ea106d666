#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dst {

enum class SlotKind { open, categorical, boolean };

std::string_view to_string(SlotKind kind);

/// One informable slot of the ontology, named "domain-slot".
struct SlotDef {
  std::string name;
  std::string description;
  SlotKind kind = SlotKind::open;
  std::vector<std::string> candidates;
  std::string domain;

  /// Part after the domain separator, e.g. "book_people" for "hotel-book_people".
  std::string_view slot_part() const;
  bool has_candidate(std::string_view value) const;

  friend bool operator==(const SlotDef&, const SlotDef&) = default;
};

/// Builds a SlotDef, inferring kind from the candidate list the same way the
/// schema loader does: ["yes","no"] is boolean, any other list categorical.
SlotDef make_slot(std::string name, std::string description, std::vector<std::string> candidates = {});

/// Immutable slot ontology. Slot order is the file order and drives prompt
/// rendering; lookup by name is case-insensitive.
class Schema {
 public:
  Schema() = default;
  /// `categorical_order` lists the slots with candidates in rendering order;
  /// left empty, slot order is used.
  explicit Schema(std::vector<SlotDef> slots, const std::vector<std::string>& categorical_order = {});

  const std::vector<SlotDef>& slots() const { return slots_; }
  const std::set<std::string>& domains() const { return domains_; }
  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }

  const SlotDef* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<const SlotDef*> slots_in_domain(std::string_view domain) const;
  std::vector<const SlotDef*> categorical_slots() const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.slots_ == b.slots_ && a.categorical_order_ == b.categorical_order_;
  }

 private:
  std::vector<SlotDef> slots_;
  std::map<std::string, std::size_t> index_;  // lowercased name -> position
  std::set<std::string> domains_;
  std::vector<std::size_t> categorical_order_;
};

struct Violation {
  std::string slot;
  std::string rule;
  std::string message;
};

/// Rule ids: "name-format", "categorical-candidates", "boolean-candidates",
/// "open-candidates", "domain-prefix", "duplicate-name".
std::vector<Violation> validate_schema(const Schema& schema);

/// Parses the {"slots": {...}, "categorical": {...}} file format and throws
/// DataError on malformed input or any invariant violation.
Schema parse_schema(std::string_view json_text, const std::string& source = "<schema>");
Schema load_schema(const std::filesystem::path& path);

/// Renders a schema back into the file format.
std::string serialize_schema(const Schema& schema);

/// Requestable (non-informable) slot names, fully qualified ("hotel-address").
class RequestableLexicon {
 public:
  RequestableLexicon() = default;
  explicit RequestableLexicon(std::map<std::string, std::vector<std::string>> by_domain);

  bool contains(std::string_view name) const;
  /// Canonical spelling of a requestable name, or empty if absent.
  std::string canonical(std::string_view name) const;
  const std::set<std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::set<std::string> entries_;
  std::map<std::string, std::string> lower_index_;
};

RequestableLexicon parse_requestables(std::string_view json_text, const std::string& source = "<requestables>");
RequestableLexicon load_requestables(const std::filesystem::path& path);

/// Throws DataError naming every requestable that collides with an informable slot.
void check_disjoint(const Schema& schema, const RequestableLexicon& requestables);

}  // namespace dst
