#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dst/schema.hpp"

namespace dst {

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// The task-defining prompt: slot list, categorical list, task description.
struct TaskPrompt {
  std::string text;
  std::array<ByteRange, 3> parts;

  std::string_view part(std::size_t i) const {
    return std::string_view(text).substr(parts[i].begin, parts[i].end - parts[i].begin);
  }
};

enum class MessageKind { initial, followup };

struct TurnMessage {
  std::string text;
  int turn_index = 0;
  MessageKind kind = MessageKind::followup;
};

/// Prompt boilerplate with two insertion points, "{{slots}}" and
/// "{{categorical}}", each on a line of its own.
class PromptTemplate {
 public:
  static PromptTemplate builtin();
  static PromptTemplate load(const std::filesystem::path& path);
  /// A single trailing newline is dropped, so template files may end in one.
  static PromptTemplate parse(std::string text);

  const std::string& text() const { return text_; }

 private:
  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

/// Throws DataError for an empty schema.
TaskPrompt build_task_prompt(const Schema& schema, const PromptTemplate& tmpl = PromptTemplate::builtin());

/// `"system": "<m>"` newline `"user": "<u>"`, both JSON-string escaped.
std::string render_turn_pair(std::string_view system, std::string_view user);

TurnMessage build_initial_prompt(const TaskPrompt& prompt, std::string_view system, std::string_view user);

/// Throws std::invalid_argument when turn < 2.
TurnMessage build_followup_prompt(std::string_view system, std::string_view user, int turn);

struct TurnPair {
  std::string system;
  std::string user;
};

/// Recovers the utterances from the trailing turn-pair of a rendered message.
std::optional<TurnPair> parse_turn_pair(std::string_view message);

}  // namespace dst
