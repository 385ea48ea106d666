#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dst/backend.hpp"
#include "dst/corpus.hpp"
#include "dst/extraction.hpp"
#include "dst/prompting.hpp"

namespace dst {

struct DialogueState {
  std::map<std::string, std::string> assignments;

  friend bool operator==(const DialogueState&, const DialogueState&) = default;
};

/// prev, minus removals, plus informable assignments. Requested and dropped
/// entries never touch the state.
DialogueState apply_update(const DialogueState& prev, const NormalizedUpdate& update);

/// True when the update re-predicts every slot of a non-trivial previous state
/// (at least `min_slots` assignments), i.e. the model emitted a full state
/// instead of an update. Values may change, but at least one must be restated
/// unchanged.
bool detect_full_state_prediction(const DialogueState& prev, const std::map<std::string, std::string>& informable,
                                  std::size_t min_slots = 2);

struct TurnRecord {
  TurnMessage message;
  std::string response;
  RawUpdate raw;
  NormalizedUpdate update;
  DialogueState state;
  bool full_state = false;
  std::vector<std::string> warnings;
};

struct Trace {
  std::string dialogue_id;
  std::string model_id;
  std::vector<TurnRecord> turns;
  bool complete = false;
  std::string error;  // set when the backend failed mid-dialogue
};

struct TrackerOptions {
  std::size_t full_state_min_slots = 2;
};

/// Runs one dialogue through a fresh session: initial prompt at turn 1,
/// follow-ups afterwards, one pass. A backend failure stops the run and
/// returns the partial trace with complete = false.
Trace run_dialogue(ChatSession& session, const Extractor& extractor, const TaskPrompt& prompt,
                   const Dialogue& dialogue, const TrackerOptions& options = {});

/// JSONL, one record per turn, fixed field order. Incomplete traces end with
/// an {"incomplete": true, "error": ...} line.
std::string serialize_trace(const Trace& trace);
Trace parse_trace(std::string_view jsonl, const std::string& source = "<trace>");
Trace load_trace(const std::filesystem::path& path);

/// Complete traces (<id>.jsonl) of a directory, sorted by dialogue id.
/// Partial traces (<id>.partial.jsonl) are ignored.
std::vector<Trace> load_traces(const std::filesystem::path& dir);

/// A store whose responses are the gold updates as JSON objects; replaying it
/// reproduces the gold states.
TranscriptStore make_gold_store(const Corpus& corpus, const TaskPrompt& prompt, const std::string& model_id = "gold");

}  // namespace dst
