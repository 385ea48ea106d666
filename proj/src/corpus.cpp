#include "dst/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool contains_phrase(std::string_view haystack, std::string_view phrase) {
  if (phrase.empty()) return false;
  auto h = text::to_lower(haystack);
  auto p = text::to_lower(phrase);
  for (auto pos = h.find(p); pos != std::string::npos; pos = h.find(p, pos + 1)) {
    bool left_ok = pos == 0 || !is_word_char(h[pos - 1]) || !is_word_char(p.front());
    auto end = pos + p.size();
    bool right_ok = end == h.size() || !is_word_char(h[end]) || !is_word_char(p.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::string upstream_value(std::string_view raw) {
  auto v = text::collapse_whitespace(text::to_lower(raw));
  if (v.empty() || v == "not mentioned" || v == "none") return {};
  if (v == "dont care" || v == "don't care" || v == "do n't care" || v == "dontcare") return std::string(kDontcare);
  return v;
}

SlotValues upstream_state(const Json& metadata, const std::set<std::string>& keep) {
  SlotValues state;
  if (!metadata.is_object()) return state;
  for (const auto& [domain, sections] : metadata.items()) {
    if (!keep.empty() && !keep.count(domain)) continue;
    if (!sections.is_object()) continue;
    for (const auto& [section, slots] : sections.items()) {
      if (!slots.is_object()) continue;
      for (const auto& [key, value] : slots.items()) {
        if (key == "booked" || !value.is_string()) continue;
        auto v = upstream_value(value.get<std::string>());
        if (v.empty()) continue;
        std::string name = domain + "-" + (section == "book" ? "book_" + key : key);
        state[name] = v;
      }
    }
  }
  return state;
}

std::set<std::string> state_domains(const Dialogue& d) {
  std::set<std::string> out;
  for (const auto& t : d.turns)
    for (const auto& [slot, value] : t.gold_state) {
      auto dash = slot.find('-');
      if (dash != std::string::npos) out.insert(slot.substr(0, dash));
    }
  return out;
}

SlotValues parse_slot_map(const Json& j, const std::string& where) {
  SlotValues out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw DataError(where + " must be an object of slot to value");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw DataError(where + ": value of \"" + k + "\" must be a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

}  // namespace

const Turn& Dialogue::turn(int index) const {
  if (index < 1 || index > static_cast<int>(turns.size()))
    throw DataError("dialogue " + id + " has no turn " + std::to_string(index));
  return turns[static_cast<std::size_t>(index - 1)];
}

const Dialogue* Corpus::find(std::string_view id) const {
  auto it = std::find_if(dialogues.begin(), dialogues.end(), [&](const Dialogue& d) { return d.id == id; });
  return it == dialogues.end() ? nullptr : &*it;
}

Dialogue derive_gold_updates(Dialogue dialogue) {
  const SlotValues empty;
  const SlotValues* prev = &empty;
  for (auto& turn : dialogue.turns) {
    turn.gold_update.clear();
    for (const auto& [slot, value] : turn.gold_state) {
      auto it = prev->find(slot);
      if (it == prev->end() || it->second != value) turn.gold_update[slot] = value;
    }
    for (const auto& [slot, value] : *prev)
      if (!turn.gold_state.count(slot)) turn.gold_update[slot] = std::string(kNoneValue);
    prev = &turn.gold_state;
  }
  return dialogue;
}

std::vector<std::string> state_shrink_warnings(const Dialogue& dialogue) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < dialogue.turns.size(); ++i)
    for (const auto& [slot, value] : dialogue.turns[i - 1].gold_state)
      if (!dialogue.turns[i].gold_state.count(slot))
        out.push_back(dialogue.id + " turn " + std::to_string(i + 1) + ": gold state drops \"" + slot + "\"");
  return out;
}

Corpus parse_corpus(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object() || !doc.contains("dialogues") || !doc["dialogues"].is_array())
    throw DataError(source + ": expected {\"dialogues\": [...]}");
  Corpus corpus;
  std::set<std::string> ids;
  for (const auto& jd : doc["dialogues"]) {
    Dialogue d;
    d.id = jd.value("id", "");
    if (d.id.empty()) throw DataError(source + ": dialogue without id");
    if (!ids.insert(d.id).second) throw DataError(source + ": duplicate dialogue id " + d.id);
    for (const auto& dom : jd.value("domains", Json::array())) d.domains.insert(dom.get<std::string>());
    if (!jd.contains("turns") || !jd["turns"].is_array()) throw DataError(source + ": " + d.id + " has no turns");
    bool all_updates = true;
    std::vector<SlotValues> given_updates;
    for (const auto& jt : jd["turns"]) {
      Turn t;
      t.index = static_cast<int>(d.turns.size()) + 1;
      if (jt.contains("turn") && jt["turn"].get<int>() != t.index)
        throw DataError(source + ": " + d.id + " turn indices are not contiguous from 1 (found " +
                        std::to_string(jt["turn"].get<int>()) + ", expected " + std::to_string(t.index) + ")");
      t.system_utterance = jt.value("system", "");
      t.user_utterance = jt.value("user", "");
      std::string where = source + ": " + d.id + " turn " + std::to_string(t.index);
      t.gold_state = parse_slot_map(jt.value("state", Json::object()), where + " state");
      if (jt.contains("update")) {
        given_updates.push_back(parse_slot_map(jt["update"], where + " update"));
      } else {
        all_updates = false;
      }
      for (const auto& r : jt.value("requested", Json::array())) t.requested.push_back(r.get<std::string>());
      d.turns.push_back(std::move(t));
    }
    d = derive_gold_updates(std::move(d));
    if (all_updates && !given_updates.empty()) {
      for (std::size_t i = 0; i < d.turns.size(); ++i)
        if (given_updates[i] != d.turns[i].gold_update)
          throw DataError(source + ": " + d.id + " turn " + std::to_string(i + 1) +
                          " update does not equal the difference of consecutive states");
    }
    for (auto& w : state_shrink_warnings(d)) corpus.warnings.push_back(std::move(w));
    auto seen = state_domains(d);
    for (const auto& dom : seen) {
      if (!d.domains.count(dom)) {
        corpus.warnings.push_back(d.id + ": domain \"" + dom + "\" used in gold state but not listed");
        d.domains.insert(dom);
      }
    }
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("corpus file not found: " + path.string());
  return parse_corpus(text::read_file(path), path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  Json dialogues = Json::array();
  for (const auto& d : corpus.dialogues) {
    Json jd;
    jd["id"] = d.id;
    jd["domains"] = d.domains;
    Json turns = Json::array();
    for (const auto& t : d.turns) {
      Json jt;
      jt["system"] = t.system_utterance;
      jt["user"] = t.user_utterance;
      jt["state"] = t.gold_state;
      if (!t.requested.empty()) jt["requested"] = t.requested;
      turns.push_back(std::move(jt));
    }
    jd["turns"] = std::move(turns);
    dialogues.push_back(std::move(jd));
  }
  Json doc;
  doc["dialogues"] = std::move(dialogues);
  return doc.dump(2) + "\n";
}

Corpus convert_upstream(const Json& upstream, const std::set<std::string>& keep_domains) {
  if (!upstream.is_object()) throw DataError("upstream corpus must be an object keyed by dialogue file name");
  Corpus corpus;
  for (const auto& [key, jd] : upstream.items()) {
    Dialogue d;
    d.id = key.size() > 5 && key.ends_with(".json") ? key.substr(0, key.size() - 5) : key;
    if (!jd.contains("log") || !jd["log"].is_array()) throw DataError("upstream dialogue " + key + " has no log");
    const Json& log = jd["log"];
    SlotValues state;
    for (std::size_t i = 0; i < log.size(); i += 2) {
      Turn t;
      t.index = static_cast<int>(d.turns.size()) + 1;
      t.user_utterance = log[i].value("text", "");
      if (i > 0) t.system_utterance = log[i - 1].value("text", "");
      if (i + 1 < log.size()) state = upstream_state(log[i + 1].value("metadata", Json::object()), keep_domains);
      t.gold_state = state;
      d.turns.push_back(std::move(t));
    }
    d = derive_gold_updates(std::move(d));
    d.domains = state_domains(d);
    for (auto& w : state_shrink_warnings(d)) corpus.warnings.push_back(std::move(w));
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

std::string_view to_string(GoldValueType type) {
  switch (type) {
    case GoldValueType::extract:
      return "extract";
    case GoldValueType::inform:
      return "inform";
    case GoldValueType::refer:
      return "refer";
    case GoldValueType::boolean:
      return "boolean";
    case GoldValueType::dontcare:
      return "dontcare";
    case GoldValueType::none:
      return "none";
  }
  return "extract";
}

GoldValueType parse_value_type(std::string_view name) {
  for (auto t : kAllValueTypes)
    if (to_string(t) == name) return t;
  throw DataError("unknown value type: " + std::string(name));
}

bool mentions_value(std::string_view utterance, std::string_view slot, std::string_view value,
                    const VariantMap& variants) {
  for (const auto& v : variants.variants_of(slot, value))
    if (contains_phrase(utterance, v)) return true;
  return false;
}

GoldValueType classify_value(const Dialogue& dialogue, int turn, std::string_view slot, std::string_view value,
                             const Schema& schema, const VariantMap& variants) {
  if (text::iequals(value, kNoneValue)) return GoldValueType::none;
  if (text::iequals(value, kDontcare)) return GoldValueType::dontcare;
  if (const auto* def = schema.find(slot); def && def->kind == SlotKind::boolean) return GoldValueType::boolean;

  const Turn& t = dialogue.turn(turn);
  bool in_user = mentions_value(t.user_utterance, slot, value, variants);
  if (!in_user && mentions_value(t.system_utterance, slot, value, variants)) return GoldValueType::inform;
  if (!in_user && turn > 1) {
    for (const auto& [other, other_value] : dialogue.turn(turn - 1).gold_state) {
      if (text::iequals(other, slot)) continue;
      if (variants.equivalent(slot, other_value, value) || variants.equivalent(other, other_value, value))
        return GoldValueType::refer;
    }
  }
  return GoldValueType::extract;
}

GoldValueType classify_gold_value_type(const Dialogue& dialogue, int turn, std::string_view slot,
                                       const Schema& schema, const VariantMap& variants) {
  const Turn& t = dialogue.turn(turn);
  auto it = t.gold_update.find(std::string(slot));
  if (it == t.gold_update.end())
    throw DataError(dialogue.id + " turn " + std::to_string(turn) + ": \"" + std::string(slot) +
                    "\" is not in the gold update");
  return classify_value(dialogue, turn, slot, it->second, schema, variants);
}

}  // namespace dst
