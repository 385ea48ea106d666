#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifndef DST_SOURCE_DIR
#error "DST_SOURCE_DIR must point at the repository root"
#endif

namespace dst::testing {

std::filesystem::path source_dir() { return DST_SOURCE_DIR; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// Recounts the whole span: braces outside string literals must close exactly at its end.
bool closes_at_end(const std::string& span) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t k = 0; k < span.size(); ++k) {
    char c = span[k];
    if (in_string) {
      if (c == '\\') {
        ++k;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') in_string = true;
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return k + 1 == span.size();
    }
  }
  return false;
}

}  // namespace

std::vector<FlatObject> brute_force_fragments(const std::string& text) {
  std::vector<FlatObject> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && !(text[j] == '}' && closes_at_end(text.substr(i, j - i + 1)))) ++j;
    if (j == text.size()) {
      ++i;
      continue;
    }
    auto doc = nlohmann::ordered_json::parse(text.substr(i, j - i + 1), nullptr, false);
    bool flat = !doc.is_discarded() && doc.is_object();
    FlatObject obj;
    if (flat) {
      for (const auto& [k, v] : doc.items()) {
        if (!v.is_string()) {
          flat = false;
          break;
        }
        obj.emplace_back(k, v.get<std::string>());
      }
    }
    if (flat) out.push_back(std::move(obj));
    i = j + 1;
  }
  return out;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool same_value(const std::string& a, const std::string& b, const ClassList& classes) {
  auto la = lower(a), lb = lower(b);
  if (la == lb) return true;
  for (const auto& c : classes)
    if (c.count(la) && c.count(lb)) return true;
  return false;
}

std::string domain_of(const std::string& slot) { return slot.substr(0, slot.find('-')); }

bool turn_matches(const std::map<std::string, std::string>& predicted, const std::map<std::string, std::string>& gold,
                  const std::vector<std::string>& slots, const ClassList& classes) {
  std::set<std::string> keys;
  for (const auto& s : slots) {
    if (predicted.count(s)) keys.insert(s);
    if (gold.count(s)) keys.insert(s);
  }
  for (const auto& k : keys) {
    auto p = predicted.find(k);
    auto g = gold.find(k);
    if (p == predicted.end() || g == gold.end()) return false;
    if (!same_value(p->second, g->second, classes)) return false;
  }
  return true;
}

}  // namespace

OracleScores brute_force_scores(const std::vector<Trace>& traces, const Corpus& corpus,
                                const std::vector<std::string>& slot_names, const ClassList& classes) {
  OracleScores out;
  std::set<std::string> domains;
  for (const auto& s : slot_names) domains.insert(domain_of(s));

  int correct = 0, total = 0;
  for (const auto& trace : traces) {
    const Dialogue* d = nullptr;
    for (const auto& cand : corpus.dialogues)
      if (cand.id == trace.dialogue_id) d = &cand;
    for (std::size_t t = 0; t < trace.turns.size(); ++t) {
      ++total;
      if (turn_matches(trace.turns[t].state.assignments, d->turns[t].gold_state, slot_names, classes)) ++correct;
    }
  }
  out.jga = total ? static_cast<double>(correct) / total : 0.0;

  for (const auto& dom : domains) {
    std::vector<std::string> dom_slots;
    for (const auto& s : slot_names)
      if (domain_of(s) == dom) dom_slots.push_back(s);
    for (int all = 0; all < 2; ++all) {
      int c = 0, n = 0;
      for (const auto& trace : traces) {
        const Dialogue* d = nullptr;
        for (const auto& cand : corpus.dialogues)
          if (cand.id == trace.dialogue_id) d = &cand;
        bool touches = false;
        for (const auto& turn : d->turns)
          for (const auto& [slot, value] : turn.gold_state)
            if (domain_of(slot) == dom) touches = true;
        if (!all && !touches) continue;
        for (std::size_t t = 0; t < trace.turns.size(); ++t) {
          ++n;
          if (turn_matches(trace.turns[t].state.assignments, d->turns[t].gold_state, dom_slots, classes)) ++c;
        }
      }
      std::optional<double> v;
      if (n) v = static_cast<double>(c) / n;
      (all ? out.per_domain_all : out.per_domain)[dom] = v;
    }
  }
  return out;
}

namespace {

const std::vector<std::string> kDomainPool = {"taxi", "hotel", "train", "restaurant", "attraction"};
const std::vector<std::string> kValuePool = {"north", "cheap", "cambridge", "3", "monday", "12:30", "yes", "no",
                                             "dontcare", "italian", "gonville hotel", "the gonville hotel",
                                             "museum", "museums", "acorn guest house"};

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

GeneratedCase generate_case(std::mt19937& rng, int max_dialogues, int max_turns) {
  GeneratedCase gc;
  gc.classes = {{"gonville hotel", "the gonville hotel"}, {"museum", "museums"}};
  for (const auto& c : gc.classes) gc.variants.add_class("*", std::vector<std::string>(c.begin(), c.end()));

  std::vector<std::string> domains = kDomainPool;
  std::shuffle(domains.begin(), domains.end(), rng);
  domains.resize(static_cast<std::size_t>(uniform(rng, 1, 5)));
  std::vector<SlotDef> defs;
  std::vector<std::string> names;
  for (const auto& d : domains) {
    int n = uniform(rng, 1, 5);
    for (int k = 0; k < n; ++k) {
      names.push_back(d + "-s" + std::to_string(k));
      defs.push_back(make_slot(names.back(), "slot " + std::to_string(k)));
    }
  }
  gc.schema = Schema(std::move(defs));

  int dialogues = uniform(rng, 1, max_dialogues);
  for (int di = 0; di < dialogues; ++di) {
    Dialogue d;
    d.id = "G" + std::to_string(di);
    SlotValues state;
    int turns = uniform(rng, 1, max_turns);
    for (int t = 1; t <= turns; ++t) {
      int edits = uniform(rng, 0, 3);
      for (int e = 0; e < edits; ++e) {
        const auto& slot = pick(rng, names);
        if (state.count(slot) && chance(rng, 0.25)) {
          state.erase(slot);
        } else {
          state[slot] = pick(rng, kValuePool);
        }
      }
      Turn turn;
      turn.index = t;
      turn.user_utterance = "user " + std::to_string(t);
      turn.system_utterance = "system " + std::to_string(t);
      turn.gold_state = state;
      d.turns.push_back(std::move(turn));
    }
    d = derive_gold_updates(std::move(d));
    gc.corpus.dialogues.push_back(d);

    Trace trace;
    trace.dialogue_id = d.id;
    trace.model_id = "generated";
    trace.complete = true;
    for (const auto& gturn : d.turns) {
      TurnRecord rec;
      rec.state.assignments = gturn.gold_state;
      auto& a = rec.state.assignments;
      if (chance(rng, 0.5)) {
        int corruptions = uniform(rng, 1, 3);
        for (int c = 0; c < corruptions; ++c) {
          switch (uniform(rng, 0, 4)) {
            case 0:
              if (!a.empty()) a.erase(std::next(a.begin(), uniform(rng, 0, static_cast<int>(a.size()) - 1)));
              break;
            case 1:
              if (!a.empty())
                std::next(a.begin(), uniform(rng, 0, static_cast<int>(a.size()) - 1))->second = pick(rng, kValuePool);
              break;
            case 2:
              a[pick(rng, names)] = pick(rng, kValuePool);
              break;
            case 3:  // equivalent spelling, still correct
              for (auto& [slot, value] : a) {
                if (value == "gonville hotel") value = "the gonville hotel";
                else if (value == "museum") value = "museums";
              }
              break;
            default:  // case change, still correct
              for (auto& [slot, value] : a)
                if (!value.empty()) value[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(value[0])));
              break;
          }
        }
      }
      trace.turns.push_back(std::move(rec));
    }
    gc.traces.push_back(std::move(trace));
  }
  return gc;
}

namespace {

const std::vector<std::string> kProse = {
    "Sure, here is the update:", "The user changed the following slots.", "Updated slots",
    "Let me know if anything else is needed.", "Based on the latest response", "(see below)", "Note: values are lowercase.",
    "Here you go!", "No other slots changed.", "I hope this helps."};

const std::vector<std::string> kKeyPool = {"hotel-name", "hotel-area", "train-day", "taxi-leaveAt", "restaurant-food",
                                           "Hotel-Name", "hotel_name", "train-leave at", "x"};

std::string random_string(std::mt19937& rng) {
  static const std::string alphabet = "abcdefghijklmnop ABCXYZ0123456789:-_'{}\"\\";
  std::string s;
  int n = uniform(rng, 0, 14);
  for (int i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(alphabet.size()) - 1))];
  return s;
}

}  // namespace

Embedding generate_embedding(std::mt19937& rng) {
  Embedding e;
  bool open_brace_emitted = false;
  int pieces = uniform(rng, 1, 6);
  for (int p = 0; p < pieces; ++p) {
    int kind = uniform(rng, 0, 9);
    if (kind <= 3) {
      FlatObject obj;
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      std::set<std::string> used;
      int n = uniform(rng, 0, 5);
      for (int k = 0; k < n; ++k) {
        std::string key = chance(rng, 0.7) ? pick(rng, kKeyPool) : random_string(rng);
        if (!used.insert(key).second) continue;
        std::string value = chance(rng, 0.6) ? generate_raw_value(rng) : random_string(rng);
        j[key] = value;
        obj.emplace_back(key, value);
      }
      std::string body = chance(rng, 0.5) ? j.dump() : j.dump(uniform(rng, 1, 4));
      if (chance(rng, 0.3)) body = "```json\n" + body + "\n```";
      e.text += body;
      e.objects.push_back(std::move(obj));
    } else if (kind == 4) {
      e.text += "{\"nested\": {\"hotel-area\": \"north\"}}";
    } else if (kind == 5) {
      e.text += "{\"hotel-stars\": 4, \"list\": [\"a\"]}";
    } else if (kind == 6 && !open_brace_emitted) {
      e.text += "{placeholder}";
    } else if (kind == 7 && !open_brace_emitted) {
      e.text += " } ";
    } else if (kind == 8) {
      e.text += " { ";
      open_brace_emitted = true;
    } else {
      e.text += pick(rng, kProse);
    }
    e.text += chance(rng, 0.5) ? "\n" : " ";
    if (chance(rng, 0.5)) e.text += pick(rng, kProse) + "\n";
  }
  return e;
}

std::string generate_raw_value(std::mt19937& rng) {
  static const std::vector<std::string> shapes = {
      "Saturday", "  the   Gonville Hotel ", "guesthouse", "Guest-House", "center", "dont care", "Don't Care",
      "any", "do not care", "?", "none", "9:30", "09:30", "12:5", "1:05", "DONTCARE", "doesn't matter", "Cheap",
      "hotels", "", " ", "north\teast", "4", "yes", "CENTRE", "guest house"};
  std::string v = pick(rng, shapes);
  if (chance(rng, 0.2)) v += " " + pick(rng, shapes);
  return v;
}

}  // namespace dst::testing
