#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dst/schema.hpp"

namespace dst {

/// A flat JSON object of string values, in textual key order.
using FlatObject = std::vector<std::pair<std::string, std::string>>;

/// Every outermost balanced-brace region of `text` that parses as a flat
/// string-to-string JSON object, in textual order. Regions that fail to parse
/// or contain nested values are skipped whole; an unclosed '{' is ignored and
/// scanning resumes right after it.
std::vector<FlatObject> extract_json_fragments(std::string_view text);

struct RawUpdate {
  FlatObject pairs;
  int fragment_count = 0;
  bool empty_indicated = false;
  std::vector<std::string> warnings;

  friend bool operator==(const RawUpdate&, const RawUpdate&) = default;
};

/// Phrases by which a response claims that nothing was updated.
class EmptinessLexicon {
 public:
  EmptinessLexicon();  // built-in phrase list
  explicit EmptinessLexicon(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {}
  static EmptinessLexicon load(const std::filesystem::path& path);

  bool matches(std::string_view text) const;
  const std::vector<std::string>& phrases() const { return phrases_; }

 private:
  std::vector<std::string> phrases_;
};

/// Merges fragments in order (later keys override earlier ones, keeping the
/// first position). A response with no pairs is empty-indicated when its prose
/// matches the emptiness lexicon; no fragments and no such prose adds a warning.
RawUpdate interpret_response(std::string_view text, const std::vector<FlatObject>& fragments,
                             const EmptinessLexicon& emptiness);

struct SlotResolution {
  enum class Kind { schema_slot, requestable_hallucination, alias, fabricated };
  Kind kind = Kind::fabricated;
  std::string name;  // canonical name, or the raw name when fabricated

  friend bool operator==(const SlotResolution&, const SlotResolution&) = default;
};

std::string_view to_string(SlotResolution::Kind kind);
SlotResolution::Kind parse_resolution_kind(std::string_view name);

/// Case-insensitive exact schema match, then requestable match, then a
/// separator-insensitive alias match against schema names, else fabricated.
SlotResolution resolve_slot(std::string_view raw_name, const Schema& schema, const RequestableLexicon& requestables);

/// Orthographic variant table: slot -> {variant: canonical}.
class ValueVariantTable {
 public:
  ValueVariantTable() = default;
  static ValueVariantTable parse(std::string_view json_text, const std::string& source = "<value variants>");
  static ValueVariantTable load(const std::filesystem::path& path);

  void add(std::string_view slot, std::string_view variant, std::string_view canonical);
  const std::string* lookup(std::string_view slot, std::string_view value) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> table_;
};

/// Canonicalizes predicted values: lowercase, whitespace folding, dontcare
/// variants, zero-padded times for time slots, and the orthographic variant
/// table. "?" and "none" are passed through as markers. No semantic mapping.
class ValueNormalizer {
 public:
  ValueNormalizer() = default;
  explicit ValueNormalizer(ValueVariantTable table) : table_(std::move(table)) {}

  std::string normalize(const SlotDef& slot, std::string_view raw) const;

 private:
  ValueVariantTable table_;
};

bool is_time_slot(const SlotDef& slot);

struct DroppedEntry {
  std::string raw_name;
  std::string raw_value;
  SlotResolution resolution;
  std::string reason;

  friend bool operator==(const DroppedEntry&, const DroppedEntry&) = default;
};

struct NormalizedUpdate {
  std::map<std::string, std::string> informable;
  std::set<std::string> removals;
  std::set<std::string> requested;
  std::vector<DroppedEntry> dropped;

  bool empty() const { return informable.empty() && removals.empty() && requested.empty() && dropped.empty(); }
  friend bool operator==(const NormalizedUpdate&, const NormalizedUpdate&) = default;
};

NormalizedUpdate normalize_update(const RawUpdate& raw, const Schema& schema, const RequestableLexicon& requestables,
                                  const ValueNormalizer& normalizer);

/// Everything needed to turn a response into a normalized update.
class Extractor {
 public:
  Extractor(Schema schema, RequestableLexicon requestables, ValueNormalizer normalizer = {},
            EmptinessLexicon emptiness = {});

  struct Result {
    RawUpdate raw;
    NormalizedUpdate update;
  };

  Result extract(std::string_view response) const;

  const Schema& schema() const { return schema_; }
  const RequestableLexicon& requestables() const { return requestables_; }
  const ValueNormalizer& normalizer() const { return normalizer_; }

 private:
  Schema schema_;
  RequestableLexicon requestables_;
  ValueNormalizer normalizer_;
  EmptinessLexicon emptiness_;
};

}  // namespace dst
