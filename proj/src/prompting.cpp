#include "dst/prompting.hpp"

#include <stdexcept>

#include "dst/error.hpp"
#include "dst/json_util.hpp"
#include "dst/text.hpp"
#include "prompt_template_data.hpp"

namespace dst {

namespace {

constexpr std::string_view kSlotsMarker = "{{slots}}";
constexpr std::string_view kCategoricalMarker = "{{categorical}}";
constexpr std::string_view kIndent = "    ";

std::string json_quote(std::string_view s) { return Json(std::string(s)).dump(); }

std::string render_slot_entries(const Schema& schema) {
  std::string out;
  for (const auto& s : schema.slots()) {
    if (!out.empty()) out += ",\n";
    out += std::string(kIndent) + json_quote(s.name) + ": " + json_quote(s.description);
  }
  return out;
}

std::string render_categorical_entries(const Schema& schema) {
  std::string out;
  for (const auto* s : schema.categorical_slots()) {
    if (!out.empty()) out += ",\n";
    out += std::string(kIndent) + json_quote(s->name) + ": [";
    for (std::size_t i = 0; i < s->candidates.size(); ++i) out += (i ? ", " : "") + json_quote(s->candidates[i]);
    out += "]";
  }
  return out;
}

// Replaces the marker line. An empty body removes the line entirely.
// Returns the offset just past the inserted block's closing "}" line.
std::size_t substitute(std::string& text, std::string_view marker, const std::string& body) {
  auto pos = text.find(marker);
  if (pos == std::string::npos) throw DataError("prompt template lacks " + std::string(marker));
  if (body.empty()) {
    auto erase_from = pos > 0 && text[pos - 1] == '\n' ? pos - 1 : pos;
    text.erase(erase_from, marker.size() + (pos - erase_from));
    pos = erase_from;
  } else {
    text.replace(pos, marker.size(), body);
    pos += body.size();
  }
  auto close = text.find("\n}", pos);
  return close == std::string::npos ? pos : close + 2;
}

std::size_t skip_newlines(const std::string& text, std::size_t pos) {
  while (pos < text.size() && text[pos] == '\n') ++pos;
  return pos;
}

std::optional<std::string> parse_quoted_line(std::string_view line, std::string_view key) {
  std::string prefix = "\"" + std::string(key) + "\": ";
  if (!line.starts_with(prefix)) return std::nullopt;
  try {
    auto j = Json::parse(line.substr(prefix.size()));
    if (!j.is_string()) return std::nullopt;
    return j.get<std::string>();
  } catch (const Json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

PromptTemplate PromptTemplate::builtin() { return parse(detail::kBuiltinPromptTemplate); }

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("prompt template not found: " + path.string());
  return parse(text::read_file(path));
}

PromptTemplate PromptTemplate::parse(std::string text) {
  if (text.ends_with('\n')) text.pop_back();
  for (auto marker : {kSlotsMarker, kCategoricalMarker}) {
    auto pos = text.find(marker);
    if (pos == std::string::npos) throw DataError("prompt template lacks " + std::string(marker));
    if (text.find(marker, pos + 1) != std::string::npos)
      throw DataError("prompt template repeats " + std::string(marker));
  }
  if (text.find(kSlotsMarker) > text.find(kCategoricalMarker))
    throw DataError("prompt template must place {{slots}} before {{categorical}}");
  return PromptTemplate(std::move(text));
}

TaskPrompt build_task_prompt(const Schema& schema, const PromptTemplate& tmpl) {
  if (schema.empty()) throw DataError("cannot build a task prompt from an empty schema (rule: non-empty-schema)");
  TaskPrompt prompt;
  prompt.text = tmpl.text();
  auto slots_end = substitute(prompt.text, kSlotsMarker, render_slot_entries(schema));
  auto categorical_end = substitute(prompt.text, kCategoricalMarker, render_categorical_entries(schema));
  auto categorical_begin = skip_newlines(prompt.text, slots_end);
  prompt.parts[0] = {0, slots_end};
  prompt.parts[1] = {categorical_begin, categorical_end};
  prompt.parts[2] = {skip_newlines(prompt.text, categorical_end), prompt.text.size()};
  return prompt;
}

std::string render_turn_pair(std::string_view system, std::string_view user) {
  return "\"system\": " + json_quote(system) + "\n\"user\": " + json_quote(user);
}

TurnMessage build_initial_prompt(const TaskPrompt& prompt, std::string_view system, std::string_view user) {
  return {prompt.text + "\n\n" + render_turn_pair(system, user), 1, MessageKind::initial};
}

TurnMessage build_followup_prompt(std::string_view system, std::string_view user, int turn) {
  if (turn < 2) throw std::invalid_argument("follow-up prompts start at turn 2, got " + std::to_string(turn));
  return {render_turn_pair(system, user), turn, MessageKind::followup};
}

std::optional<TurnPair> parse_turn_pair(std::string_view message) {
  auto user_nl = message.rfind('\n');
  if (user_nl == std::string_view::npos) return std::nullopt;
  auto system_nl = message.rfind('\n', user_nl - 1);
  auto system_begin = (user_nl == 0 || system_nl == std::string_view::npos) ? 0 : system_nl + 1;
  auto system = parse_quoted_line(message.substr(system_begin, user_nl - system_begin), "system");
  auto user = parse_quoted_line(message.substr(user_nl + 1), "user");
  if (!system || !user) return std::nullopt;
  return TurnPair{*system, *user};
}

}  // namespace dst
