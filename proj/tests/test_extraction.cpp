#include <gtest/gtest.h>

#include "dst/error.hpp"
#include "dst/extraction.hpp"
#include "support/oracles.hpp"

using namespace dst;
using dst::testing::source_dir;

namespace {

struct Fixture {
  Schema schema = load_schema(source_dir() / "data/schema/multiwoz21.json");
  RequestableLexicon requestables = load_requestables(source_dir() / "data/requestables.json");
  ValueNormalizer normalizer{ValueVariantTable::load(source_dir() / "data/value_variants.json")};
  Extractor extractor{schema, requestables, normalizer};

  std::string norm(const std::string& slot, const std::string& raw) const {
    return normalizer.normalize(*schema.find(slot), raw);
  }
};

FlatObject obj(std::initializer_list<std::pair<std::string, std::string>> pairs) { return FlatObject(pairs); }

}  // namespace

TEST(Fragments, FindsOutermostFlatObjectsInProse) {
  auto got = extract_json_fragments(
      "Here you go:\n```json\n{\"hotel-area\": \"north\"}\n```\nand also {\"train-day\":\"monday\", \"x\": \"}\"}.");
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], obj({{"hotel-area", "north"}}));
  EXPECT_EQ(got[1], obj({{"train-day", "monday"}, {"x", "}"}}));
}

TEST(Fragments, SkipsNestedAndNonStringRegionsWhole) {
  EXPECT_TRUE(extract_json_fragments("{\"a\": {\"b\": \"c\"}}").empty());
  EXPECT_TRUE(extract_json_fragments("{\"stars\": 4}").empty());
  EXPECT_TRUE(extract_json_fragments("{placeholder}").empty());
  EXPECT_EQ(extract_json_fragments("{}"), std::vector<FlatObject>{FlatObject{}});
}

TEST(Fragments, UnclosedBraceIsIgnored) {
  auto got = extract_json_fragments("oops { then {\"a\": \"b\"} end");
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], obj({{"a", "b"}}));
  EXPECT_TRUE(extract_json_fragments("{\"a\": \"b\"").empty());
}

TEST(Fragments, AgreeWithBruteForceOracleOnCornerCases) {
  for (std::string text : {"", "{", "}", "{}{}", "{\"a\":\"{\"}", "{\"a\":\"\\\"}\"}", "{ {\"a\":\"b\"} }",
                           "x {\"a\":\"b\"} } {\"c\":\"d\"}", "{\"k\": \"v\"", "{\"a\":[\"b\"]} {\"c\":\"d\"}"}) {
    EXPECT_EQ(extract_json_fragments(text), dst::testing::brute_force_fragments(text)) << text;
  }
}

TEST(Interpret, LaterFragmentsOverrideEarlierOnes) {
  EmptinessLexicon lex;
  auto raw = interpret_response("", {obj({{"a", "1"}, {"b", "2"}}), obj({{"a", "3"}})}, lex);
  EXPECT_EQ(raw.pairs, obj({{"a", "3"}, {"b", "2"}}));
  EXPECT_EQ(raw.fragment_count, 2);
  EXPECT_FALSE(raw.empty_indicated);
}

TEST(Interpret, EmptinessNeedsNoPairsAndAPhrase) {
  EmptinessLexicon lex;
  std::string prose = "No slots were updated in the latest response, so here is an empty JSON object: {}";
  auto raw = interpret_response(prose, extract_json_fragments(prose), lex);
  EXPECT_TRUE(raw.empty_indicated);
  EXPECT_TRUE(raw.warnings.empty());

  auto silent = interpret_response("I am not sure.", {}, lex);
  EXPECT_FALSE(silent.empty_indicated);
  EXPECT_EQ(silent.warnings.size(), 1u);

  auto with_pairs = interpret_response("no slots were updated", {obj({{"a", "b"}})}, lex);
  EXPECT_FALSE(with_pairs.empty_indicated);
}

TEST(Interpret, BundledPhraseListMatchesBuiltin) {
  auto loaded = EmptinessLexicon::load(source_dir() / "data/emptiness_phrases.txt");
  EXPECT_EQ(loaded.phrases(), EmptinessLexicon().phrases());
}

TEST(Resolve, SchemaRequestableAliasFabricated) {
  Fixture f;
  EXPECT_EQ(resolve_slot("Hotel-Name", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::schema_slot, "hotel-name"}));
  EXPECT_EQ(resolve_slot("hotel-address", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::requestable_hallucination, "hotel-address"}));
  EXPECT_EQ(resolve_slot("train-leave_at", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::alias, "train-leaveAt"}));
  EXPECT_EQ(resolve_slot("hotel bookpeople", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::alias, "hotel-book_people"}));
  EXPECT_EQ(resolve_slot("hotel-referencenumber", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::requestable_hallucination, "hotel-reference_number"}));
  EXPECT_EQ(resolve_slot("hotel-wifi", f.schema, f.requestables),
            (SlotResolution{SlotResolution::Kind::fabricated, "hotel-wifi"}));
  EXPECT_EQ(parse_resolution_kind("alias"), SlotResolution::Kind::alias);
  EXPECT_THROW(parse_resolution_kind("other"), DataError);
}

TEST(Normalize, CanonicalForms) {
  Fixture f;
  EXPECT_EQ(f.norm("train-day", " Saturday "), "saturday");
  EXPECT_EQ(f.norm("hotel-name", "the  Gonville\tHotel"), "the gonville hotel");
  EXPECT_EQ(f.norm("hotel-area", "?"), "?");
  EXPECT_EQ(f.norm("hotel-area", "None"), "none");
  for (std::string v : {"dontcare", "dont care", "Don't Care", "do not care", "any", "doesn't matter"})
    EXPECT_EQ(f.norm("hotel-area", v), "dontcare") << v;
  EXPECT_EQ(f.norm("taxi-leaveAt", "4:30"), "04:30");
  EXPECT_EQ(f.norm("restaurant-book_time", "9:15"), "09:15");
  EXPECT_EQ(f.norm("restaurant-book_people", "4"), "4");
  EXPECT_EQ(f.norm("hotel-book_stay", "4:30"), "4:30");
  EXPECT_EQ(f.norm("hotel-type", "guesthouse"), "guest house");
  EXPECT_EQ(f.norm("hotel-type", "Guest-House"), "guest house");
  EXPECT_EQ(f.norm("hotel-area", "center"), "centre");
  // no semantic coercion to candidates
  EXPECT_EQ(f.norm("restaurant-pricerange", "high-end"), "high-end");
  EXPECT_EQ(f.norm("attraction-area", "city centre"), "city centre");
}

TEST(Normalize, VariantTableRejectsChains) {
  EXPECT_THROW(ValueVariantTable::parse(R"({"hotel-type": {"a": "b", "b": "c"}})"), DataError);
  EXPECT_NO_THROW(ValueVariantTable::parse(R"({"hotel-type": {"a": "c", "b": "c"}})"));
}

TEST(NormalizeUpdate, RoutesEachPair) {
  Fixture f;
  RawUpdate raw;
  raw.pairs = obj({{"hotel-area", "North"},
                   {"hotel-address", "?"},
                   {"hotel-name", "?"},
                   {"hotel-stars", "none"},
                   {"hotel-wifi", "yes"},
                   {"train_leaveAt", "9:30"},
                   {"hotel-type", "  "}});
  auto upd = normalize_update(raw, f.schema, f.requestables, f.normalizer);
  EXPECT_EQ(upd.informable, (std::map<std::string, std::string>{{"hotel-area", "north"}, {"train-leaveAt", "09:30"}}));
  EXPECT_EQ(upd.requested, std::set<std::string>{"hotel-name"});
  EXPECT_EQ(upd.removals, std::set<std::string>{"hotel-stars"});
  ASSERT_EQ(upd.dropped.size(), 3u);
  EXPECT_EQ(upd.dropped[0].reason, "requestable slot");
  EXPECT_EQ(upd.dropped[1].reason, "unknown slot");
  EXPECT_EQ(upd.dropped[2].reason, "empty value");
  EXPECT_EQ(upd.dropped[2].resolution.kind, SlotResolution::Kind::schema_slot);
}

TEST(NormalizeUpdate, LaterPairForTheSameSlotWins) {
  Fixture f;
  RawUpdate raw;
  raw.pairs = obj({{"hotel-area", "north"}, {"Hotel-Area", "none"}});
  auto upd = normalize_update(raw, f.schema, f.requestables, f.normalizer);
  EXPECT_TRUE(upd.informable.empty());
  EXPECT_EQ(upd.removals, std::set<std::string>{"hotel-area"});
}

TEST(Extractor, EndToEnd) {
  Fixture f;
  auto r = f.extractor.extract("Updated slots:\n{\n\"hotel-type\":\"guesthouse\",\n\"hotel-address\":\"?\"\n}");
  EXPECT_EQ(r.raw.fragment_count, 1);
  EXPECT_EQ(r.update.informable, (std::map<std::string, std::string>{{"hotel-type", "guest house"}}));
  ASSERT_EQ(r.update.dropped.size(), 1u);
  EXPECT_EQ(r.update.dropped[0].resolution.kind, SlotResolution::Kind::requestable_hallucination);
}
