#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dst/json_util.hpp"
#include "dst/schema.hpp"
#include "dst/variants.hpp"

namespace dst {

using SlotValues = std::map<std::string, std::string>;

inline constexpr std::string_view kDontcare = "dontcare";
inline constexpr std::string_view kNoneValue = "none";
inline constexpr std::string_view kRequestedMarker = "?";

struct Turn {
  int index = 0;  // 1-based
  std::string system_utterance;
  std::string user_utterance;
  SlotValues gold_state;   // cumulative label after this turn
  SlotValues gold_update;  // difference to the previous turn; removals carry "none"
  std::vector<std::string> requested;  // optional gold requestable annotations
};

struct Dialogue {
  std::string id;
  std::set<std::string> domains;
  std::vector<Turn> turns;

  const Turn& turn(int index) const;  // 1-based
};

struct Corpus {
  std::vector<Dialogue> dialogues;
  std::vector<std::string> warnings;

  const Dialogue* find(std::string_view id) const;
};

/// Fills every turn's gold_update from consecutive gold states. Keys that
/// disappear between turns are recorded with the value "none". Idempotent.
Dialogue derive_gold_updates(Dialogue dialogue);

/// One warning per slot that vanishes from the gold state between turns.
std::vector<std::string> state_shrink_warnings(const Dialogue& dialogue);

Corpus parse_corpus(std::string_view json_text, const std::string& source = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

/// Converts the upstream MultiWOZ 2.1 layout ({"ID.json": {"log": [...]}}).
/// Only domains in `keep_domains` are kept; an empty set keeps all.
Corpus convert_upstream(const Json& upstream, const std::set<std::string>& keep_domains = {});

enum class GoldValueType { extract, inform, refer, boolean, dontcare, none };

inline constexpr GoldValueType kAllValueTypes[] = {GoldValueType::extract,  GoldValueType::inform,
                                                   GoldValueType::refer,    GoldValueType::boolean,
                                                   GoldValueType::dontcare, GoldValueType::none};

std::string_view to_string(GoldValueType type);
GoldValueType parse_value_type(std::string_view name);

/// True when `value` occurs in `utterance` as a whole phrase (case-insensitive,
/// bounded by non-alphanumerics), or any variant of it does.
bool mentions_value(std::string_view utterance, std::string_view slot, std::string_view value,
                    const VariantMap& variants);

/// Value-type heuristic for a slot of the turn's gold update, in precedence
/// order: none, dontcare, boolean, inform, refer, extract.
GoldValueType classify_value(const Dialogue& dialogue, int turn, std::string_view slot, std::string_view value,
                             const Schema& schema, const VariantMap& variants);

GoldValueType classify_gold_value_type(const Dialogue& dialogue, int turn, std::string_view slot,
                                       const Schema& schema, const VariantMap& variants);

}  // namespace dst
