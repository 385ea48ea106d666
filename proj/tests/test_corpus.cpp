#include <gtest/gtest.h>

#include "dst/corpus.hpp"
#include "dst/error.hpp"
#include "support/oracles.hpp"

using namespace dst;
using dst::testing::read_text;
using dst::testing::source_dir;

namespace {

Schema bundled_schema() { return load_schema(source_dir() / "data/schema/multiwoz21.json"); }
VariantMap eval_variants() { return load_variant_map(source_dir() / "data/eval_variants.json"); }

Dialogue three_turns() {
  Dialogue d;
  d.id = "D1";
  Turn t1, t2, t3;
  t1.index = 1;
  t1.gold_state = {{"hotel-area", "north"}, {"hotel-stars", "4"}};
  t2.index = 2;
  t2.gold_state = {{"hotel-area", "north"}, {"hotel-stars", "5"}};
  t3.index = 3;
  t3.gold_state = {{"hotel-stars", "5"}};
  d.turns = {t1, t2, t3};
  return d;
}

}  // namespace

TEST(Corpus, BundledFixturesLoad) {
  Corpus c = load_corpus(source_dir() / "fixtures/corpus.json");
  ASSERT_EQ(c.dialogues.size(), 9u);
  std::vector<std::string> ids;
  for (const auto& d : c.dialogues) ids.push_back(d.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"PMUL4050", "PMUL0117", "SNG01873", "MUL2051", "MUL0524", "PMUL4246",
                                           "MUL2122", "MUL2405", "MUL2116"}));
  EXPECT_EQ(c.find("MUL2122")->turns.size(), 8u);
  EXPECT_EQ(c.find("nope"), nullptr);
  EXPECT_THROW(c.find("SNG01873")->turn(2), DataError);

  Corpus s = load_corpus(source_dir() / "fixtures/supplementary/corpus.json");
  EXPECT_NE(s.find("PMUL0599"), nullptr);
}

TEST(Corpus, GoldUpdatesAreStateDifferences) {
  Dialogue d = derive_gold_updates(three_turns());
  EXPECT_EQ(d.turns[0].gold_update, (SlotValues{{"hotel-area", "north"}, {"hotel-stars", "4"}}));
  EXPECT_EQ(d.turns[1].gold_update, (SlotValues{{"hotel-stars", "5"}}));
  EXPECT_EQ(d.turns[2].gold_update, (SlotValues{{"hotel-area", "none"}}));
  Dialogue again = derive_gold_updates(d);
  for (std::size_t i = 0; i < d.turns.size(); ++i) EXPECT_EQ(again.turns[i].gold_update, d.turns[i].gold_update);
  auto warnings = state_shrink_warnings(d);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("hotel-area"), std::string::npos);
}

TEST(Corpus, ParseValidatesStructure) {
  EXPECT_THROW(parse_corpus("[]"), DataError);
  EXPECT_THROW(parse_corpus(R"({"dialogues": [{"id": "A", "turns": []}, {"id": "A", "turns": []}]})"), DataError);
  EXPECT_THROW(parse_corpus(R"({"dialogues": [{"id": "A", "turns": [{"turn": 2, "state": {}}]}]})"), DataError);
  EXPECT_THROW(parse_corpus(R"({"dialogues": [{"id": "A", "turns": [{"state": {"hotel-area": 3}}]}]})"), DataError);
  EXPECT_THROW(
      parse_corpus(R"({"dialogues": [{"id": "A", "turns": [{"state": {"hotel-area": "north"}, "update": {}}]}]})"),
      DataError);
  EXPECT_NO_THROW(parse_corpus(
      R"({"dialogues": [{"id": "A", "turns": [{"turn": 1, "state": {"hotel-area": "north"}, "update": {"hotel-area": "north"}}]}]})"));
}

TEST(Corpus, UnlistedDomainsAreAddedWithAWarning) {
  Corpus c = parse_corpus(
      R"({"dialogues": [{"id": "A", "domains": ["hotel"], "turns": [{"state": {"taxi-leaveAt": "10:00"}}]}]})");
  EXPECT_EQ(c.dialogues[0].domains, (std::set<std::string>{"hotel", "taxi"}));
  ASSERT_EQ(c.warnings.size(), 1u);
}

TEST(Corpus, SerializationRoundTrips) {
  Corpus c = load_corpus(source_dir() / "fixtures/corpus.json");
  Corpus again = parse_corpus(serialize_corpus(c));
  ASSERT_EQ(again.dialogues.size(), c.dialogues.size());
  for (std::size_t i = 0; i < c.dialogues.size(); ++i) {
    EXPECT_EQ(again.dialogues[i].id, c.dialogues[i].id);
    for (std::size_t t = 0; t < c.dialogues[i].turns.size(); ++t) {
      EXPECT_EQ(again.dialogues[i].turns[t].gold_state, c.dialogues[i].turns[t].gold_state);
      EXPECT_EQ(again.dialogues[i].turns[t].gold_update, c.dialogues[i].turns[t].gold_update);
      EXPECT_EQ(again.dialogues[i].turns[t].requested, c.dialogues[i].turns[t].requested);
    }
  }
  EXPECT_EQ(serialize_corpus(again), serialize_corpus(c));
}

TEST(Corpus, UpstreamConversionMatchesHandConvertedFile) {
  Json upstream = parse_json_strict(read_text(source_dir() / "tests/fixtures/upstream_sample.json"), "sample");
  Corpus got = convert_upstream(upstream);
  Corpus want = load_corpus(source_dir() / "tests/fixtures/upstream_expected.json");
  ASSERT_EQ(got.dialogues.size(), want.dialogues.size());
  for (std::size_t i = 0; i < want.dialogues.size(); ++i) {
    const auto& g = got.dialogues[i];
    const auto& w = want.dialogues[i];
    EXPECT_EQ(g.id, w.id);
    EXPECT_EQ(g.domains, w.domains) << w.id;
    ASSERT_EQ(g.turns.size(), w.turns.size()) << w.id;
    for (std::size_t t = 0; t < w.turns.size(); ++t) {
      EXPECT_EQ(g.turns[t].system_utterance, w.turns[t].system_utterance) << w.id << " turn " << t + 1;
      EXPECT_EQ(g.turns[t].user_utterance, w.turns[t].user_utterance) << w.id << " turn " << t + 1;
      EXPECT_EQ(g.turns[t].gold_state, w.turns[t].gold_state) << w.id << " turn " << t + 1;
      EXPECT_EQ(g.turns[t].gold_update, w.turns[t].gold_update) << w.id << " turn " << t + 1;
    }
  }
  // MUL0003 drops its restaurant slots in the last turn.
  EXPECT_EQ(got.warnings.size(), 2u);
}

TEST(Corpus, UpstreamConversionCanKeepSelectedDomains) {
  Json upstream = parse_json_strict(read_text(source_dir() / "tests/fixtures/upstream_sample.json"), "sample");
  Corpus got = convert_upstream(upstream, {"train"});
  const Dialogue* d = got.find("MUL0003");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->turns[0].gold_state, SlotValues{});
  EXPECT_EQ(d->turns[2].gold_state, (SlotValues{{"train-destination", "cambridge"}, {"train-day", "monday"}}));
  EXPECT_TRUE(got.find("SNG0001")->domains.empty());
  EXPECT_THROW(convert_upstream(Json::array()), DataError);
}

TEST(Corpus, MentionsRequireWholePhrases) {
  VariantMap v = eval_variants();
  EXPECT_TRUE(mentions_value("I'd recommend the Autumn House.", "hotel-name", "autumn house", v));
  EXPECT_FALSE(mentions_value("two hotels nearby", "hotel-type", "hotel", v));
  EXPECT_TRUE(mentions_value("a hotel nearby", "hotel-type", "hotel", v));
  EXPECT_TRUE(mentions_value("The Gonville Hotel is nice", "hotel-name", "gonville hotel", v));
  EXPECT_FALSE(mentions_value("", "hotel-name", "gonville hotel", v));
}

TEST(Corpus, ValueTypesFollowPrecedence) {
  Schema schema = bundled_schema();
  VariantMap v = eval_variants();
  Corpus c = load_corpus(source_dir() / "fixtures/corpus.json");
  const Dialogue& pmul4050 = *c.find("PMUL4050");
  EXPECT_EQ(classify_gold_value_type(pmul4050, 1, "hotel-name", schema, v), GoldValueType::inform);
  EXPECT_EQ(classify_gold_value_type(pmul4050, 1, "hotel-book_people", schema, v), GoldValueType::extract);
  const Dialogue& pmul0117 = *c.find("PMUL0117");
  EXPECT_EQ(classify_gold_value_type(pmul0117, 3, "taxi-destination", schema, v), GoldValueType::refer);
  EXPECT_EQ(classify_gold_value_type(pmul0117, 3, "taxi-departure", schema, v), GoldValueType::refer);

  Dialogue d;
  d.id = "X";
  Turn t1;
  t1.index = 1;
  t1.gold_state = {{"hotel-parking", "yes"}, {"hotel-area", "dontcare"}, {"hotel-stars", "4"}};
  Turn t2;
  t2.index = 2;
  t2.gold_state = {{"hotel-parking", "yes"}, {"hotel-area", "dontcare"}};
  d.turns = {t1, t2};
  d = derive_gold_updates(d);
  EXPECT_EQ(classify_gold_value_type(d, 1, "hotel-parking", schema, v), GoldValueType::boolean);
  EXPECT_EQ(classify_gold_value_type(d, 1, "hotel-area", schema, v), GoldValueType::dontcare);
  EXPECT_EQ(classify_gold_value_type(d, 2, "hotel-stars", schema, v), GoldValueType::none);
  EXPECT_EQ(parse_value_type("refer"), GoldValueType::refer);
  EXPECT_THROW(parse_value_type("other"), DataError);
}
