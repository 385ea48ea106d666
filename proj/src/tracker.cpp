#include "dst/tracker.hpp"

#include <algorithm>
#include <sstream>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

Json raw_to_json(const RawUpdate& raw) {
  Json pairs = Json::array();
  for (const auto& [k, v] : raw.pairs) pairs.push_back(Json::array({k, v}));
  Json j;
  j["pairs"] = std::move(pairs);
  j["fragment_count"] = raw.fragment_count;
  j["empty_indicated"] = raw.empty_indicated;
  return j;
}

Json update_to_json(const NormalizedUpdate& u) {
  Json dropped = Json::array();
  for (const auto& d : u.dropped) {
    Json jd;
    jd["raw_name"] = d.raw_name;
    jd["raw_value"] = d.raw_value;
    jd["resolution"] = std::string(to_string(d.resolution.kind));
    jd["resolved_name"] = d.resolution.name;
    jd["reason"] = d.reason;
    dropped.push_back(std::move(jd));
  }
  Json j;
  j["informable"] = u.informable;
  j["removals"] = u.removals;
  j["requested"] = u.requested;
  j["dropped"] = std::move(dropped);
  return j;
}

RawUpdate raw_from_json(const Json& j) {
  RawUpdate raw;
  for (const auto& p : j.at("pairs")) raw.pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  raw.fragment_count = j.at("fragment_count").get<int>();
  raw.empty_indicated = j.at("empty_indicated").get<bool>();
  return raw;
}

NormalizedUpdate update_from_json(const Json& j) {
  NormalizedUpdate u;
  u.informable = j.at("informable").get<std::map<std::string, std::string>>();
  u.removals = j.at("removals").get<std::set<std::string>>();
  u.requested = j.at("requested").get<std::set<std::string>>();
  for (const auto& jd : j.at("dropped")) {
    u.dropped.push_back({jd.at("raw_name").get<std::string>(), jd.at("raw_value").get<std::string>(),
                         {parse_resolution_kind(jd.at("resolution").get<std::string>()),
                          jd.at("resolved_name").get<std::string>()},
                         jd.at("reason").get<std::string>()});
  }
  return u;
}

}  // namespace

DialogueState apply_update(const DialogueState& prev, const NormalizedUpdate& update) {
  DialogueState next = prev;
  for (const auto& slot : update.removals) next.assignments.erase(slot);
  for (const auto& [slot, value] : update.informable) next.assignments[slot] = value;
  return next;
}

bool detect_full_state_prediction(const DialogueState& prev, const std::map<std::string, std::string>& informable,
                                  std::size_t min_slots) {
  if (prev.assignments.empty() || prev.assignments.size() < min_slots) return false;
  bool repeats_a_value = false;
  for (const auto& [slot, value] : prev.assignments) {
    auto it = informable.find(slot);
    if (it == informable.end()) return false;
    if (it->second == value) repeats_a_value = true;
  }
  // A pure difference update never restates an unchanged value.
  return repeats_a_value;
}

Trace run_dialogue(ChatSession& session, const Extractor& extractor, const TaskPrompt& prompt,
                   const Dialogue& dialogue, const TrackerOptions& options) {
  if (!session.exchanges().empty())
    throw BackendError("session " + session.session_id() + " was already used; one fresh session per dialogue");
  Trace trace;
  trace.dialogue_id = dialogue.id;
  trace.model_id = session.model_id();
  DialogueState state;
  for (const auto& turn : dialogue.turns) {
    TurnMessage message = turn.index == 1
                              ? build_initial_prompt(prompt, turn.system_utterance, turn.user_utterance)
                              : build_followup_prompt(turn.system_utterance, turn.user_utterance, turn.index);
    TurnRecord rec;
    try {
      rec.response = session.send(message);
    } catch (const BackendError& e) {
      trace.error = e.what();
      return trace;
    }
    rec.message = std::move(message);
    auto extracted = extractor.extract(rec.response);
    rec.raw = std::move(extracted.raw);
    rec.update = std::move(extracted.update);
    rec.warnings = rec.raw.warnings;
    rec.full_state = detect_full_state_prediction(state, rec.update.informable, options.full_state_min_slots);
    state = apply_update(state, rec.update);
    rec.state = state;
    trace.turns.push_back(std::move(rec));
  }
  trace.complete = true;
  return trace;
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  for (const auto& rec : trace.turns) {
    Json j;
    j["dialogue_id"] = trace.dialogue_id;
    j["turn"] = rec.message.turn_index;
    j["kind"] = rec.message.kind == MessageKind::initial ? "initial" : "followup";
    j["model_id"] = trace.model_id;
    j["prompt"] = rec.message.text;
    j["response"] = rec.response;
    j["raw"] = raw_to_json(rec.raw);
    j["update"] = update_to_json(rec.update);
    j["state"] = rec.state.assignments;
    j["full_state"] = rec.full_state;
    j["warnings"] = rec.warnings;
    out += j.dump() + "\n";
  }
  if (!trace.complete) {
    Json j;
    j["dialogue_id"] = trace.dialogue_id;
    j["incomplete"] = true;
    j["error"] = trace.error;
    out += j.dump() + "\n";
  }
  return out;
}

Trace parse_trace(std::string_view jsonl, const std::string& source) {
  Trace trace;
  trace.complete = true;
  std::istringstream in{std::string(jsonl)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string where = source + ":" + std::to_string(line_no);
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(where + ": malformed trace line");
    try {
      auto id = j.at("dialogue_id").get<std::string>();
      if (trace.dialogue_id.empty()) trace.dialogue_id = id;
      if (id != trace.dialogue_id) throw DataError(where + ": trace mixes dialogues");
      if (j.value("incomplete", false)) {
        trace.complete = false;
        trace.error = j.value("error", "");
        continue;
      }
      TurnRecord rec;
      rec.message.turn_index = j.at("turn").get<int>();
      rec.message.kind = j.at("kind").get<std::string>() == "initial" ? MessageKind::initial : MessageKind::followup;
      rec.message.text = j.at("prompt").get<std::string>();
      if (trace.model_id.empty()) trace.model_id = j.value("model_id", "");
      rec.response = j.at("response").get<std::string>();
      rec.raw = raw_from_json(j.at("raw"));
      rec.update = update_from_json(j.at("update"));
      rec.state.assignments = j.at("state").get<std::map<std::string, std::string>>();
      rec.full_state = j.at("full_state").get<bool>();
      rec.warnings = j.at("warnings").get<std::vector<std::string>>();
      rec.raw.warnings = rec.warnings;
      if (rec.message.turn_index != static_cast<int>(trace.turns.size()) + 1)
        throw DataError(where + ": trace turns are not contiguous");
      trace.turns.push_back(std::move(rec));
    } catch (const Json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return trace;
}

Trace load_trace(const std::filesystem::path& path) { return parse_trace(text::read_file(path), path.string()); }

std::vector<Trace> load_traces(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("trace directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".jsonl") && !name.ends_with(".partial.jsonl"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Trace> traces;
  for (const auto& f : files) traces.push_back(load_trace(f));
  return traces;
}

TranscriptStore make_gold_store(const Corpus& corpus, const TaskPrompt& prompt, const std::string& model_id) {
  TranscriptStore store;
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) {
      auto message = t.index == 1 ? build_initial_prompt(prompt, t.system_utterance, t.user_utterance)
                                  : build_followup_prompt(t.system_utterance, t.user_utterance, t.index);
      Json update = Json::object();
      for (const auto& [slot, value] : t.gold_update) update[slot] = value;
      store.add({d.id, t.index, message.text, update.dump(), model_id, std::nullopt});
    }
  }
  return store;
}

}  // namespace dst
