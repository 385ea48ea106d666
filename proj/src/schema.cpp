#include "dst/schema.hpp"

#include <algorithm>

#include "dst/error.hpp"
#include "dst/json_util.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

const std::vector<std::string> kBooleanCandidates = {"yes", "no"};

std::string domain_of(std::string_view name) {
  auto dash = name.find('-');
  return dash == std::string_view::npos ? std::string() : std::string(name.substr(0, dash));
}

}  // namespace

std::string_view to_string(SlotKind kind) {
  switch (kind) {
    case SlotKind::open:
      return "open";
    case SlotKind::categorical:
      return "categorical";
    case SlotKind::boolean:
      return "boolean";
  }
  return "open";
}

std::string_view SlotDef::slot_part() const {
  std::string_view n = name;
  auto dash = n.find('-');
  return dash == std::string_view::npos ? n : n.substr(dash + 1);
}

bool SlotDef::has_candidate(std::string_view value) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const std::string& c) { return text::iequals(c, value); });
}

SlotDef make_slot(std::string name, std::string description, std::vector<std::string> candidates) {
  SlotDef slot;
  slot.domain = domain_of(name);
  slot.name = std::move(name);
  slot.description = std::move(description);
  if (candidates.empty()) {
    slot.kind = SlotKind::open;
  } else if (candidates == kBooleanCandidates) {
    slot.kind = SlotKind::boolean;
  } else {
    slot.kind = SlotKind::categorical;
  }
  slot.candidates = std::move(candidates);
  return slot;
}

Schema::Schema(std::vector<SlotDef> slots, const std::vector<std::string>& categorical_order)
    : slots_(std::move(slots)) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    index_.emplace(text::to_lower(slots_[i].name), i);
    if (!slots_[i].domain.empty()) domains_.insert(slots_[i].domain);
  }
  std::set<std::size_t> placed;
  for (const auto& name : categorical_order) {
    auto it = index_.find(text::to_lower(name));
    if (it != index_.end() && !slots_[it->second].candidates.empty() && placed.insert(it->second).second)
      categorical_order_.push_back(it->second);
  }
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (!slots_[i].candidates.empty() && !placed.count(i)) categorical_order_.push_back(i);
}

std::vector<const SlotDef*> Schema::categorical_slots() const {
  std::vector<const SlotDef*> out;
  for (auto i : categorical_order_) out.push_back(&slots_[i]);
  return out;
}

const SlotDef* Schema::find(std::string_view name) const {
  auto it = index_.find(text::to_lower(name));
  return it == index_.end() ? nullptr : &slots_[it->second];
}

std::vector<const SlotDef*> Schema::slots_in_domain(std::string_view domain) const {
  std::vector<const SlotDef*> out;
  for (const auto& s : slots_)
    if (s.domain == domain) out.push_back(&s);
  return out;
}

std::vector<Violation> validate_schema(const Schema& schema) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  for (const auto& s : schema.slots()) {
    auto dash = s.name.find('-');
    bool well_formed = dash != std::string::npos && dash > 0 && dash + 1 < s.name.size() &&
                       s.name.find('-', dash + 1) == std::string::npos;
    if (!well_formed)
      out.push_back({s.name, "name-format", "slot name must be \"domain-slot\" with exactly one '-'"});
    if (!seen.insert(text::to_lower(s.name)).second)
      out.push_back({s.name, "duplicate-name", "slot name appears more than once"});
    if (well_formed && s.domain != s.name.substr(0, dash))
      out.push_back({s.name, "domain-prefix", "domain \"" + s.domain + "\" is not the name prefix"});
    switch (s.kind) {
      case SlotKind::categorical:
        if (s.candidates.size() < 2)
          out.push_back({s.name, "categorical-candidates", "categorical slot needs at least two candidates"});
        break;
      case SlotKind::boolean:
        if (s.candidates != kBooleanCandidates)
          out.push_back({s.name, "boolean-candidates", "boolean slot candidates must be exactly [\"yes\",\"no\"]"});
        break;
      case SlotKind::open:
        if (!s.candidates.empty())
          out.push_back({s.name, "open-candidates", "open slot must not list candidates"});
        break;
    }
  }
  return out;
}

Schema parse_schema(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object() || !doc.contains("slots") || !doc.contains("categorical"))
    throw DataError(source + ": expected an object with \"slots\" and \"categorical\" keys");
  const Json& slots = doc["slots"];
  const Json& categorical = doc["categorical"];
  if (!slots.is_object()) throw DataError(source + ": \"slots\" must be an object");
  if (!categorical.is_object()) throw DataError(source + ": \"categorical\" must be an object");

  std::map<std::string, std::vector<std::string>> candidates;
  std::vector<std::string> categorical_order;
  for (const auto& [name, list] : categorical.items()) {
    if (!slots.contains(name)) throw DataError(source + ": categorical entry \"" + name + "\" names no slot");
    if (!list.is_array()) throw DataError(source + ": categorical entry \"" + name + "\" must be a list");
    std::vector<std::string> values;
    for (const auto& v : list) {
      if (!v.is_string()) throw DataError(source + ": categorical entry \"" + name + "\" must list strings");
      values.push_back(v.get<std::string>());
    }
    candidates.emplace(name, std::move(values));
    categorical_order.push_back(name);
  }

  std::vector<SlotDef> defs;
  std::set<std::string> lowered;
  for (const auto& [name, description] : slots.items()) {
    if (!description.is_string()) throw DataError(source + ": description of \"" + name + "\" must be a string");
    if (!lowered.insert(text::to_lower(name)).second)
      throw DataError(source + ": duplicate slot name \"" + name + "\"");
    auto c = candidates.find(name);
    defs.push_back(make_slot(name, description.get<std::string>(),
                             c == candidates.end() ? std::vector<std::string>{} : c->second));
  }
  Schema schema(std::move(defs), categorical_order);
  auto violations = validate_schema(schema);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw DataError(source + ": slot \"" + v.slot + "\" violates " + v.rule + ": " + v.message);
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("schema file not found: " + path.string());
  return parse_schema(text::read_file(path), path.string());
}

std::string serialize_schema(const Schema& schema) {
  Json slots = Json::object();
  Json categorical = Json::object();
  for (const auto& s : schema.slots()) slots[s.name] = s.description;
  for (const auto* s : schema.categorical_slots()) categorical[s->name] = s->candidates;
  Json doc = Json::object();
  doc["slots"] = std::move(slots);
  doc["categorical"] = std::move(categorical);
  return doc.dump(4) + "\n";
}

RequestableLexicon::RequestableLexicon(std::map<std::string, std::vector<std::string>> by_domain) {
  for (const auto& [domain, parts] : by_domain) {
    for (const auto& part : parts) {
      std::string name = domain + "-" + part;
      lower_index_.emplace(text::to_lower(name), name);
      entries_.insert(std::move(name));
    }
  }
}

bool RequestableLexicon::contains(std::string_view name) const {
  return lower_index_.count(text::to_lower(name)) > 0;
}

std::string RequestableLexicon::canonical(std::string_view name) const {
  auto it = lower_index_.find(text::to_lower(name));
  return it == lower_index_.end() ? std::string() : it->second;
}

RequestableLexicon parse_requestables(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object()) throw DataError(source + ": expected an object mapping domain to slot names");
  std::map<std::string, std::vector<std::string>> by_domain;
  for (const auto& [domain, list] : doc.items()) {
    if (!list.is_array()) throw DataError(source + ": entry \"" + domain + "\" must be a list");
    auto& parts = by_domain[domain];
    for (const auto& v : list) {
      if (!v.is_string()) throw DataError(source + ": entry \"" + domain + "\" must list strings");
      parts.push_back(v.get<std::string>());
    }
  }
  return RequestableLexicon(std::move(by_domain));
}

RequestableLexicon load_requestables(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("requestables file not found: " + path.string());
  return parse_requestables(text::read_file(path), path.string());
}

void check_disjoint(const Schema& schema, const RequestableLexicon& requestables) {
  std::string overlap;
  for (const auto& name : requestables.entries()) {
    if (schema.contains(name)) overlap += (overlap.empty() ? "" : ", ") + name;
  }
  if (!overlap.empty()) throw DataError("requestable lexicon overlaps informable slots: " + overlap);
}

}  // namespace dst
