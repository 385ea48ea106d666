#include "dst/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "dst/corpus.hpp"
#include "dst/error.hpp"
#include "dst/json_util.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

std::optional<FlatObject> parse_flat_object(std::string_view candidate) {
  Json j = Json::parse(candidate.begin(), candidate.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  FlatObject out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) return std::nullopt;
    out.emplace_back(k, v.get<std::string>());
  }
  return out;
}

// Index of the '}' closing the region opened at `open`, or npos.
std::size_t find_region_end(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t j = open; j < text.size(); ++j) {
    char c = text[j];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return j;
    }
  }
  return std::string_view::npos;
}

// Lowercased with every separator character removed.
std::string fold_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '-' || c == '_' || c == '.' || std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

const std::vector<std::string> kDontcareVariants = {"dontcare", "dont care", "don't care", "do not care",
                                                    "do n't care", "any", "doesn't matter", "does not matter"};

bool is_short_time(std::string_view v) {
  return v.size() == 4 && std::isdigit(static_cast<unsigned char>(v[0])) && v[1] == ':' &&
         std::isdigit(static_cast<unsigned char>(v[2])) && std::isdigit(static_cast<unsigned char>(v[3]));
}

}  // namespace

std::vector<FlatObject> extract_json_fragments(std::string_view text) {
  std::vector<FlatObject> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    auto end = find_region_end(text, i);
    if (end == std::string_view::npos) {
      ++i;
      continue;
    }
    if (auto obj = parse_flat_object(text.substr(i, end - i + 1))) out.push_back(std::move(*obj));
    i = end + 1;
  }
  return out;
}

EmptinessLexicon::EmptinessLexicon()
    : phrases_{"empty JSON list",    "empty JSON object",       "no slots were updated", "no \"slots\" were updated",
               "no \"slots\" updated", "no new slot",           "no slots updated"} {}

EmptinessLexicon EmptinessLexicon::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("emptiness phrase list not found: " + path.string());
  return EmptinessLexicon(text::read_lines(path));
}

bool EmptinessLexicon::matches(std::string_view text) const {
  return std::any_of(phrases_.begin(), phrases_.end(),
                     [&](const std::string& p) { return text::icontains(text, p); });
}

RawUpdate interpret_response(std::string_view text, const std::vector<FlatObject>& fragments,
                             const EmptinessLexicon& emptiness) {
  RawUpdate raw;
  raw.fragment_count = static_cast<int>(fragments.size());
  for (const auto& fragment : fragments) {
    for (const auto& [key, value] : fragment) {
      auto it = std::find_if(raw.pairs.begin(), raw.pairs.end(), [&](const auto& p) { return p.first == key; });
      if (it == raw.pairs.end()) {
        raw.pairs.emplace_back(key, value);
      } else {
        it->second = value;
      }
    }
  }
  if (raw.pairs.empty()) raw.empty_indicated = emptiness.matches(text);
  if (fragments.empty() && !raw.empty_indicated)
    raw.warnings.push_back("response contains no JSON object and no emptiness statement");
  return raw;
}

std::string_view to_string(SlotResolution::Kind kind) {
  switch (kind) {
    case SlotResolution::Kind::schema_slot:
      return "schema";
    case SlotResolution::Kind::requestable_hallucination:
      return "requestable";
    case SlotResolution::Kind::alias:
      return "alias";
    case SlotResolution::Kind::fabricated:
      return "fabricated";
  }
  return "fabricated";
}

SlotResolution::Kind parse_resolution_kind(std::string_view name) {
  for (auto k : {SlotResolution::Kind::schema_slot, SlotResolution::Kind::requestable_hallucination,
                 SlotResolution::Kind::alias, SlotResolution::Kind::fabricated})
    if (to_string(k) == name) return k;
  throw DataError("unknown slot resolution: " + std::string(name));
}

SlotResolution resolve_slot(std::string_view raw_name, const Schema& schema, const RequestableLexicon& requestables) {
  auto name = text::trim(raw_name);
  if (const auto* def = schema.find(name)) return {SlotResolution::Kind::schema_slot, def->name};
  if (requestables.contains(name)) return {SlotResolution::Kind::requestable_hallucination, requestables.canonical(name)};
  auto folded = fold_name(name);
  if (!folded.empty()) {
    for (const auto& s : schema.slots())
      if (fold_name(s.name) == folded) return {SlotResolution::Kind::alias, s.name};
    for (const auto& r : requestables.entries())
      if (fold_name(r) == folded) return {SlotResolution::Kind::requestable_hallucination, r};
  }
  return {SlotResolution::Kind::fabricated, std::string(name)};
}

ValueVariantTable ValueVariantTable::parse(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object()) throw DataError(source + ": expected {slot: {variant: canonical}}");
  ValueVariantTable table;
  for (const auto& [slot, entries] : doc.items()) {
    if (!entries.is_object()) throw DataError(source + ": \"" + slot + "\" must map variants to canonical values");
    for (const auto& [variant, canonical] : entries.items()) {
      if (!canonical.is_string()) throw DataError(source + ": \"" + slot + "\"/\"" + variant + "\" must be a string");
      table.add(slot, variant, canonical.get<std::string>());
    }
  }
  // A canonical value that is itself a variant of something else would break idempotence.
  for (const auto& [slot, entries] : table.table_)
    for (const auto& [variant, canonical] : entries)
      if (auto it = entries.find(canonical); it != entries.end() && it->second != canonical)
        throw DataError(source + ": \"" + slot + "\" canonical value \"" + canonical + "\" is itself remapped");
  return table;
}

ValueVariantTable ValueVariantTable::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("value variant table not found: " + path.string());
  return parse(text::read_file(path), path.string());
}

void ValueVariantTable::add(std::string_view slot, std::string_view variant, std::string_view canonical) {
  table_[text::to_lower(slot)][text::collapse_whitespace(text::to_lower(variant))] =
      text::collapse_whitespace(text::to_lower(canonical));
}

const std::string* ValueVariantTable::lookup(std::string_view slot, std::string_view value) const {
  auto s = table_.find(text::to_lower(slot));
  if (s == table_.end()) return nullptr;
  auto v = s->second.find(std::string(value));
  return v == s->second.end() ? nullptr : &v->second;
}

bool is_time_slot(const SlotDef& slot) {
  auto part = text::to_lower(slot.slot_part());
  return part == "leaveat" || part == "arriveby" || part == "book_time";
}

std::string ValueNormalizer::normalize(const SlotDef& slot, std::string_view raw) const {
  std::string v = text::collapse_whitespace(text::to_lower(raw));
  if (v == kRequestedMarker || v == kNoneValue) return v;
  if (std::find(kDontcareVariants.begin(), kDontcareVariants.end(), v) != kDontcareVariants.end())
    return std::string(kDontcare);
  if (is_time_slot(slot) && is_short_time(v)) v.insert(v.begin(), '0');
  if (const auto* canonical = table_.lookup(slot.name, v)) return *canonical;
  return v;
}

NormalizedUpdate normalize_update(const RawUpdate& raw, const Schema& schema, const RequestableLexicon& requestables,
                                  const ValueNormalizer& normalizer) {
  NormalizedUpdate upd;
  for (const auto& [name, value] : raw.pairs) {
    auto res = resolve_slot(name, schema, requestables);
    if (res.kind == SlotResolution::Kind::requestable_hallucination) {
      upd.dropped.push_back({name, value, res, "requestable slot"});
      continue;
    }
    if (res.kind == SlotResolution::Kind::fabricated) {
      upd.dropped.push_back({name, value, res, "unknown slot"});
      continue;
    }
    const SlotDef& def = *schema.find(res.name);
    auto v = normalizer.normalize(def, value);
    if (v.empty()) {
      upd.dropped.push_back({name, value, res, "empty value"});
      continue;
    }
    upd.informable.erase(def.name);
    upd.removals.erase(def.name);
    upd.requested.erase(def.name);
    if (v == kRequestedMarker) {
      upd.requested.insert(def.name);
    } else if (v == kNoneValue) {
      upd.removals.insert(def.name);
    } else {
      upd.informable[def.name] = v;
    }
  }
  return upd;
}

Extractor::Extractor(Schema schema, RequestableLexicon requestables, ValueNormalizer normalizer,
                     EmptinessLexicon emptiness)
    : schema_(std::move(schema)),
      requestables_(std::move(requestables)),
      normalizer_(std::move(normalizer)),
      emptiness_(std::move(emptiness)) {}

Extractor::Result Extractor::extract(std::string_view response) const {
  Result r;
  r.raw = interpret_response(response, extract_json_fragments(response), emptiness_);
  r.update = normalize_update(r.raw, schema_, requestables_, normalizer_);
  return r;
}

}  // namespace dst
