#include <gtest/gtest.h>

#include "dst/error.hpp"
#include "dst/prompting.hpp"
#include "support/oracles.hpp"

using namespace dst;
using dst::testing::read_text;
using dst::testing::source_dir;

namespace {

Schema bundled() { return load_schema(source_dir() / "data/schema/multiwoz21.json"); }

}  // namespace

TEST(Prompt, BundledSchemaReproducesReferencePromptExactly) {
  auto prompt = build_task_prompt(bundled());
  EXPECT_EQ(prompt.text, read_text(source_dir() / "tests/fixtures/reference_prompt.txt"));
}

TEST(Prompt, TemplateFileMatchesBuiltinCopy) {
  EXPECT_EQ(PromptTemplate::load(source_dir() / "data/prompt_template.txt").text(), PromptTemplate::builtin().text());
}

TEST(Prompt, PartsAppearInOrder) {
  auto prompt = build_task_prompt(bundled());
  EXPECT_TRUE(prompt.part(0).starts_with("Consider the following list of concepts"));
  EXPECT_TRUE(prompt.part(0).ends_with("}"));
  EXPECT_NE(prompt.part(0).find("\"taxi-leaveAt\""), std::string_view::npos);
  EXPECT_TRUE(prompt.part(1).starts_with("Some \"slots\" can only take"));
  EXPECT_NE(prompt.part(1).find("\"hotel-parking\": [\"yes\", \"no\"]"), std::string_view::npos);
  EXPECT_TRUE(prompt.part(2).starts_with("Now consider the following dialogue"));
  EXPECT_TRUE(prompt.part(2).ends_with("fill it with \"dontcare\"."));
  EXPECT_LE(prompt.parts[0].end, prompt.parts[1].begin);
  EXPECT_LE(prompt.parts[1].end, prompt.parts[2].begin);
}

TEST(Prompt, SingleSlotSchemaMatchesHandSubstitution) {
  Schema one({make_slot("taxi-leaveAt", "the departure time of the taxi")});
  EXPECT_EQ(build_task_prompt(one).text, read_text(source_dir() / "tests/fixtures/single_slot_prompt.txt"));
}

TEST(Prompt, EmptySchemaIsRejectedNamingTheRule) {
  try {
    build_task_prompt(Schema{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("non-empty-schema"), std::string::npos);
  }
}

TEST(Prompt, TemplatesNeedBothMarkersInOrder) {
  EXPECT_THROW(PromptTemplate::parse("no markers"), DataError);
  EXPECT_THROW(PromptTemplate::parse("{{categorical}}\n{{slots}}"), DataError);
  EXPECT_THROW(PromptTemplate::parse("{{slots}}\n{{slots}}\n{{categorical}}"), DataError);
  EXPECT_EQ(PromptTemplate::parse("a\n{{slots}}\n{{categorical}}\n").text(), "a\n{{slots}}\n{{categorical}}");
}

TEST(Prompt, TurnMessagesCarryTheEscapedPair) {
  auto prompt = build_task_prompt(bundled());
  auto first = build_initial_prompt(prompt, "", "I need a \"cheap\" hotel\nin the north");
  EXPECT_EQ(first.turn_index, 1);
  EXPECT_EQ(first.kind, MessageKind::initial);
  EXPECT_EQ(first.text, prompt.text + "\n\n\"system\": \"\"\n\"user\": \"I need a \\\"cheap\\\" hotel\\nin the north\"");

  auto next = build_followup_prompt("Which area?", "North.", 2);
  EXPECT_EQ(next.text, "\"system\": \"Which area?\"\n\"user\": \"North.\"");
  EXPECT_EQ(next.kind, MessageKind::followup);
  EXPECT_THROW(build_followup_prompt("a", "b", 1), std::invalid_argument);
}

TEST(Prompt, TurnPairsParseBack) {
  auto prompt = build_task_prompt(bundled());
  auto msg = build_initial_prompt(prompt, "Say \"hi\"\n", "ok {json}");
  auto pair = parse_turn_pair(msg.text);
  ASSERT_TRUE(pair.has_value());
  EXPECT_EQ(pair->system, "Say \"hi\"\n");
  EXPECT_EQ(pair->user, "ok {json}");
  EXPECT_FALSE(parse_turn_pair("plain text").has_value());
}

TEST(Prompt, RenderingIsDeterministic) {
  EXPECT_EQ(build_task_prompt(bundled()).text, build_task_prompt(bundled()).text);
}
