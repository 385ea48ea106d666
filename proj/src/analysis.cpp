#include "dst/analysis.hpp"

#include <cstdio>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

struct CategoryInfo {
  ErrorCategory category;
  std::string_view name;
  char letter;
  std::string_view title;
};

constexpr CategoryInfo kCategoryInfo[] = {
    {ErrorCategory::carry_over_failure, "carry_over_failure", 'a', "Informed values not carried over"},
    {ErrorCategory::coref_unresolved, "coref_unresolved", 'b', "Unresolved coreferences"},
    {ErrorCategory::dontcare_overprediction, "dontcare_overprediction", 'c', "Spurious dontcare"},
    {ErrorCategory::candidate_ignored, "candidate_ignored", 'd', "Values outside the candidate list"},
    {ErrorCategory::hallucinated_slot, "hallucinated_slot", 'e', "Slots outside the schema"},
    {ErrorCategory::arbitrary_normalization, "arbitrary_normalization", 'f', "Inconsistent value normalization"},
    {ErrorCategory::full_state_prediction, "full_state_prediction", 'g', "Full state instead of an update"},
};

const CategoryInfo& info(ErrorCategory c) { return kCategoryInfo[static_cast<int>(c)]; }

const std::string* lookup(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *v);
  return buf;
}

std::string plain(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string shown(const std::string& v) { return v.empty() ? "(none)" : "\"" + v + "\""; }

ErrorRecord make_record(ErrorCategory c, const Trace& trace, int turn, std::string slot, std::string predicted,
                        std::string gold, std::string detail) {
  ErrorRecord r;
  r.category = c;
  r.dialogue_id = trace.dialogue_id;
  r.turn = turn;
  r.slot = std::move(slot);
  r.predicted = std::move(predicted);
  r.gold = std::move(gold);
  r.detail = std::move(detail);
  return r;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

Json record_json(const ErrorRecord& r) {
  Json j;
  j["category"] = to_string(r.category);
  j["dialogue_id"] = r.dialogue_id;
  j["turn"] = r.turn;
  j["slot"] = r.slot;
  j["predicted"] = r.predicted;
  j["gold"] = r.gold;
  j["resolution"] = r.resolution ? Json(to_string(*r.resolution)) : Json(nullptr);
  j["detail"] = r.detail;
  return j;
}

ErrorRecord record_from_json(const Json& j) {
  ErrorRecord r;
  r.category = parse_error_category(j.at("category").get<std::string>());
  r.dialogue_id = j.at("dialogue_id").get<std::string>();
  r.turn = j.at("turn").get<int>();
  r.slot = j.at("slot").get<std::string>();
  r.predicted = j.at("predicted").get<std::string>();
  r.gold = j.at("gold").get<std::string>();
  if (!j.at("resolution").is_null()) r.resolution = parse_resolution_kind(j.at("resolution").get<std::string>());
  r.detail = j.at("detail").get<std::string>();
  return r;
}

constexpr SlotResolution::Kind kResolutionKinds[] = {
    SlotResolution::Kind::schema_slot, SlotResolution::Kind::requestable_hallucination, SlotResolution::Kind::alias,
    SlotResolution::Kind::fabricated};

}  // namespace

std::string_view to_string(ErrorCategory category) { return info(category).name; }

ErrorCategory parse_error_category(std::string_view name) {
  for (const auto& i : kCategoryInfo)
    if (i.name == name) return i.category;
  throw DataError("unknown error category: " + std::string(name));
}

char category_letter(ErrorCategory category) { return info(category).letter; }
std::string_view category_title(ErrorCategory category) { return info(category).title; }

GenericReferentLexicon::GenericReferentLexicon()
    : GenericReferentLexicon({"hotel", "the hotel", "my hotel", "restaurant", "the restaurant", "attraction",
                              "the attraction", "station", "the station", "train station", "the train station"}) {}

GenericReferentLexicon::GenericReferentLexicon(std::vector<std::string> phrases) {
  for (auto& p : phrases) phrases_.insert(text::to_lower(text::collapse_whitespace(p)));
}

GenericReferentLexicon GenericReferentLexicon::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("generic referent lexicon not found: " + path.string());
  return GenericReferentLexicon(text::read_lines(path));
}

bool GenericReferentLexicon::contains(std::string_view value) const {
  return phrases_.count(text::to_lower(text::collapse_whitespace(value))) > 0;
}

bool differs_only_in_casing(std::string_view raw, std::string_view canonical) {
  return raw != canonical && text::to_lower(text::collapse_whitespace(raw)) == canonical;
}

void CasingEvidence::add(const std::string& slot, const std::string& dialogue_id, bool canonical_as_written) {
  auto& sides = by_slot_[slot];
  (canonical_as_written ? sides.as_written : sides.recased).insert(dialogue_id);
}

bool CasingEvidence::inconsistent(std::string_view slot) const {
  auto it = by_slot_.find(std::string(slot));
  if (it == by_slot_.end()) return false;
  const auto& [as_written, recased] = it->second;
  for (const auto& a : as_written)
    for (const auto& b : recased)
      if (a != b) return true;
  return false;
}

CasingEvidence CasingEvidence::collect(const std::vector<Trace>& traces, const Schema& schema,
                                       const RequestableLexicon& requestables) {
  CasingEvidence ev;
  for (const auto& trace : traces) {
    for (const auto& rec : trace.turns) {
      for (const auto& [raw_name, raw_value] : rec.raw.pairs) {
        auto res = resolve_slot(raw_name, schema, requestables);
        if (res.kind != SlotResolution::Kind::schema_slot && res.kind != SlotResolution::Kind::alias) continue;
        const std::string* canonical = lookup(rec.update.informable, res.name);
        if (!canonical) continue;
        if (raw_value == *canonical) {
          ev.add(res.name, trace.dialogue_id, true);
        } else if (differs_only_in_casing(raw_value, *canonical)) {
          ev.add(res.name, trace.dialogue_id, false);
        }
      }
    }
  }
  return ev;
}

std::vector<ErrorRecord> classify_turn_errors(const Trace& trace, int turn, const Dialogue& gold,
                                              const AnalysisContext& ctx) {
  const TurnRecord& rec = trace.turns.at(static_cast<std::size_t>(turn - 1));
  const Turn& gturn = gold.turn(turn);
  const auto& predicted = rec.state.assignments;
  std::vector<ErrorRecord> out;

  // a, b: slots the gold update fills with an inform or refer value
  for (const auto& [slot, value] : gturn.gold_update) {
    if (!ctx.schema.contains(slot)) continue;
    auto type = classify_gold_value_type(gold, turn, slot, ctx.schema, ctx.variants);
    const std::string* p = lookup(predicted, slot);
    if (type == GoldValueType::inform) {
      if (!values_match(slot, p, &value, ctx.variants))
        out.push_back(make_record(ErrorCategory::carry_over_failure, trace, turn, slot, p ? *p : "", value,
                                  "system-informed value " + shown(value) + ", predicted " + shown(p ? *p : "")));
    } else if (type == GoldValueType::refer) {
      bool generic = p && ctx.referents.contains(*p);
      if (generic || !values_match(slot, p, &value, ctx.variants))
        out.push_back(make_record(ErrorCategory::coref_unresolved, trace, turn, slot, p ? *p : "", value,
                                  std::string(generic ? "generic referent " : "unresolved reference ") +
                                      shown(p ? *p : "") + " for " + shown(value)));
    }
  }

  for (const auto& [slot, value] : rec.update.informable) {
    const std::string* g = lookup(gturn.gold_state, slot);
    // c
    if (value == kDontcare && !g)
      out.push_back(make_record(ErrorCategory::dontcare_overprediction, trace, turn, slot, value, "",
                                "dontcare predicted for a slot the user never constrained"));
    // d
    const SlotDef* def = ctx.schema.find(slot);
    if (def && def->kind != SlotKind::open && value != kDontcare && !def->has_candidate(value))
      out.push_back(make_record(ErrorCategory::candidate_ignored, trace, turn, slot, value, g ? *g : "",
                                shown(value) + " is not a candidate of " + slot));
  }

  // e
  for (const auto& d : rec.update.dropped) {
    auto r = make_record(ErrorCategory::hallucinated_slot, trace, turn, d.raw_name, d.raw_value, "",
                         std::string(to_string(d.resolution.kind)) + ": " + d.reason);
    r.resolution = d.resolution.kind;
    out.push_back(std::move(r));
  }

  // f
  for (const auto& [raw_name, raw_value] : rec.raw.pairs) {
    auto res = resolve_slot(raw_name, ctx.schema, ctx.requestables);
    if (res.kind != SlotResolution::Kind::schema_slot && res.kind != SlotResolution::Kind::alias) continue;
    const std::string* canonical = lookup(rec.update.informable, res.name);
    if (!canonical || !differs_only_in_casing(raw_value, *canonical) || !ctx.casing.inconsistent(res.name)) continue;
    const std::string* g = lookup(gturn.gold_state, res.name);
    out.push_back(make_record(ErrorCategory::arbitrary_normalization, trace, turn, res.name, raw_value, g ? *g : "",
                              "raw " + shown(raw_value) + " normalized to " + shown(*canonical) +
                                  "; other dialogues write this slot as canonical"));
  }

  // g
  if (rec.full_state)
    out.push_back(make_record(ErrorCategory::full_state_prediction, trace, turn, "", "", "",
                              "update restates all " + std::to_string(turn > 1 ? trace.turns[turn - 2].state.assignments.size() : 0) +
                                  " slots of the previous state"));
  return out;
}

std::vector<ErrorRecord> classify_errors(const std::vector<Trace>& traces, const Corpus& corpus,
                                         const AnalysisContext& ctx) {
  std::vector<ErrorRecord> out;
  for (const auto& [trace, dialogue] : align(traces, corpus)) {
    for (int t = 1; t <= static_cast<int>(trace->turns.size()); ++t) {
      auto recs = classify_turn_errors(*trace, t, *dialogue, ctx);
      out.insert(out.end(), recs.begin(), recs.end());
    }
  }
  return out;
}

Report aggregate(const std::vector<ErrorRecord>& records, const std::vector<Trace>& traces, const Corpus& corpus,
                 const AnalysisContext& ctx) {
  Report r;
  auto aligned = align(traces, corpus);
  r.dialogue_count = static_cast<long long>(aligned.size());

  long long inform_values = 0, refer_values = 0, absent_gold_predictions = 0, categorical_predictions = 0,
            informable_predictions = 0;
  for (auto k : kResolutionKinds) r.hallucination.counts[k] = 0;

  for (const auto& [trace, dialogue] : aligned) {
    for (int t = 1; t <= static_cast<int>(trace->turns.size()); ++t) {
      ++r.turn_count;
      const Turn& gturn = dialogue->turn(t);
      const TurnRecord& rec = trace->turns[t - 1];
      for (const auto& [slot, value] : gturn.gold_update) {
        if (!ctx.schema.contains(slot)) continue;
        auto type = classify_gold_value_type(*dialogue, t, slot, ctx.schema, ctx.variants);
        if (type == GoldValueType::inform) ++inform_values;
        if (type == GoldValueType::refer) ++refer_values;
      }
      for (const auto& [slot, value] : rec.update.informable) {
        ++informable_predictions;
        if (!gturn.gold_state.count(slot)) ++absent_gold_predictions;
        const SlotDef* def = ctx.schema.find(slot);
        if (def && def->kind != SlotKind::open) ++categorical_predictions;
      }
      for (const auto& [raw_name, raw_value] : rec.raw.pairs) {
        ++r.hallucination.total;
        ++r.hallucination.counts[resolve_slot(raw_name, ctx.schema, ctx.requestables).kind];
      }
      for (const auto& wanted : gturn.requested) {
        ++r.requestable_support;
        for (const auto& d : rec.update.dropped) {
          if (d.resolution.kind == SlotResolution::Kind::requestable_hallucination &&
              text::iequals(d.resolution.name, wanted)) {
            ++r.requestable_hits;
            break;
          }
        }
      }
    }
  }
  for (auto k : kResolutionKinds) r.hallucination.shares[k] = ratio(r.hallucination.counts[k], r.hallucination.total);
  r.requestable_recall = ratio(r.requestable_hits, r.requestable_support);

  const std::map<ErrorCategory, std::pair<long long, std::string>> denominators = {
      {ErrorCategory::carry_over_failure, {inform_values, "inform-type gold values"}},
      {ErrorCategory::coref_unresolved, {refer_values, "refer-type gold values"}},
      {ErrorCategory::dontcare_overprediction, {absent_gold_predictions, "predicted values where gold has none"}},
      {ErrorCategory::candidate_ignored, {categorical_predictions, "categorical predictions"}},
      {ErrorCategory::hallucinated_slot, {r.hallucination.total, "raw slot predictions"}},
      {ErrorCategory::arbitrary_normalization, {informable_predictions, "informable predictions"}},
      {ErrorCategory::full_state_prediction, {r.dialogue_count, "dialogues"}},
  };
  std::set<std::string> full_state_dialogues;
  for (auto c : kAllErrorCategories) r.categories[c] = {};
  for (const auto& rec : records) {
    auto& stats = r.categories[rec.category];
    ++stats.records;
    if (rec.category == ErrorCategory::full_state_prediction) {
      full_state_dialogues.insert(rec.dialogue_id);
    } else {
      ++stats.count;
    }
    auto& ex = r.examples[rec.category];
    if (ex.size() < kExamplesPerCategory) ex.push_back(rec);
  }
  r.categories[ErrorCategory::full_state_prediction].count = static_cast<long long>(full_state_dialogues.size());
  for (auto& [c, stats] : r.categories) {
    const auto& [den, basis] = denominators.at(c);
    stats.denominator = den;
    stats.basis = basis;
    stats.rate = ratio(stats.count, den);
  }

  r.dontcare = dontcare_confusion(traces, corpus, ctx.schema);
  r.dontcare_precision = ratio(r.dontcare.both, r.dontcare.both + r.dontcare.predicted_only);
  r.dontcare_recall = ratio(r.dontcare.both, r.dontcare.both + r.dontcare.gold_only);
  return r;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::markdown;
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw ConfigError("unknown report format: " + std::string(name) + " (expected markdown, json or csv)");
}

namespace {

Json report_json(const Report& r) {
  Json j;
  j["dialogue_count"] = r.dialogue_count;
  j["turn_count"] = r.turn_count;
  Json cats = Json::array();
  for (const auto& [c, s] : r.categories) {
    Json jc;
    jc["category"] = to_string(c);
    jc["letter"] = std::string(1, category_letter(c));
    jc["records"] = s.records;
    jc["count"] = s.count;
    jc["denominator"] = s.denominator;
    jc["rate"] = optional_json(s.rate);
    jc["basis"] = s.basis;
    cats.push_back(std::move(jc));
  }
  j["categories"] = std::move(cats);
  Json h;
  h["total"] = r.hallucination.total;
  Json counts = Json::object(), shares = Json::object();
  for (const auto& [k, n] : r.hallucination.counts) counts[std::string(to_string(k))] = n;
  for (const auto& [k, v] : r.hallucination.shares) shares[std::string(to_string(k))] = optional_json(v);
  h["counts"] = std::move(counts);
  h["shares"] = std::move(shares);
  j["hallucination"] = std::move(h);
  j["requestable_support"] = r.requestable_support;
  j["requestable_hits"] = r.requestable_hits;
  j["requestable_recall"] = optional_json(r.requestable_recall);
  j["dontcare_confusion"] = {{"both", r.dontcare.both},
                             {"predicted_only", r.dontcare.predicted_only},
                             {"gold_only", r.dontcare.gold_only},
                             {"neither", r.dontcare.neither}};
  j["dontcare_precision"] = optional_json(r.dontcare_precision);
  j["dontcare_recall"] = optional_json(r.dontcare_recall);
  Json ex = Json::object();
  for (const auto& [c, list] : r.examples) {
    Json arr = Json::array();
    for (const auto& rec : list) arr.push_back(record_json(rec));
    ex[std::string(to_string(c))] = std::move(arr);
  }
  j["examples"] = std::move(ex);
  return j;
}

std::string render_markdown(const Report& r) {
  std::string out = "# Error analysis\n\n";
  out += std::to_string(r.dialogue_count) + " dialogues, " + std::to_string(r.turn_count) + " turns.\n\n";
  out += "| Category | Count | Denominator | Rate |\n|---|---:|---:|---:|\n";
  for (const auto& [c, s] : r.categories)
    out += "| " + std::string(1, category_letter(c)) + ") " + std::string(to_string(c)) + " | " +
           std::to_string(s.count) + " | " + std::to_string(s.denominator) + " " + s.basis + " | " + percent(s.rate) +
           " |\n";

  out += "\n## Slot predictions by resolution\n\n";
  out += std::to_string(r.hallucination.total) + " raw slot predictions.\n\n";
  for (const auto& [k, v] : r.hallucination.shares)
    out += "- " + std::string(to_string(k)) + ": " + std::to_string(r.hallucination.counts.at(k)) + " (" +
           percent(v) + ")\n";
  out += "\nRequestable recall: " + percent(r.requestable_recall) + " (" + std::to_string(r.requestable_hits) + " of " +
         std::to_string(r.requestable_support) + " annotated requests).\n";
  out += "Dontcare precision: " + percent(r.dontcare_precision) + ", recall: " + percent(r.dontcare_recall) +
         " (slot-turns).\n";

  for (const auto& [c, s] : r.categories) {
    out += "\n## " + std::string(1, category_letter(c)) + ") " + std::string(category_title(c)) + "\n\n";
    out += "Count " + std::to_string(s.count);
    if (c == ErrorCategory::full_state_prediction) out += " dialogues (" + std::to_string(s.records) + " turns)";
    out += ", rate " + percent(s.rate) + " of " + s.basis + ".\n";
    auto it = r.examples.find(c);
    if (it == r.examples.end() || it->second.empty()) {
      out += "\nNo occurrences.\n";
      continue;
    }
    out += "\n";
    for (const auto& rec : it->second) {
      out += "- " + rec.dialogue_id + " turn " + std::to_string(rec.turn);
      if (!rec.slot.empty()) out += ", " + rec.slot;
      out += ": " + rec.detail + "\n";
    }
  }
  return out;
}

std::string render_csv(const Report& r) {
  std::string out = "category,count,rate,denominator\n";
  for (const auto& [c, s] : r.categories)
    out += std::string(to_string(c)) + "," + std::to_string(s.count) + "," + plain(s.rate) + "," +
           std::to_string(s.denominator) + "\n";
  return out;
}

}  // namespace

std::string render_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::markdown:
      return render_markdown(report);
    case ReportFormat::json:
      return report_json(report).dump(2) + "\n";
    case ReportFormat::csv:
      return render_csv(report);
  }
  throw ConfigError("unknown report format");
}

Report report_from_json(const Json& j) {
  Report r;
  try {
    r.dialogue_count = j.at("dialogue_count").get<long long>();
    r.turn_count = j.at("turn_count").get<long long>();
    for (const auto& jc : j.at("categories")) {
      CategoryStats s;
      s.records = jc.at("records").get<long long>();
      s.count = jc.at("count").get<long long>();
      s.denominator = jc.at("denominator").get<long long>();
      s.rate = optional_from(jc.at("rate"));
      s.basis = jc.at("basis").get<std::string>();
      r.categories[parse_error_category(jc.at("category").get<std::string>())] = s;
    }
    const Json& h = j.at("hallucination");
    r.hallucination.total = h.at("total").get<long long>();
    for (const auto& [k, v] : h.at("counts").items()) r.hallucination.counts[parse_resolution_kind(k)] = v.get<long long>();
    for (const auto& [k, v] : h.at("shares").items()) r.hallucination.shares[parse_resolution_kind(k)] = optional_from(v);
    r.requestable_support = j.at("requestable_support").get<long long>();
    r.requestable_hits = j.at("requestable_hits").get<long long>();
    r.requestable_recall = optional_from(j.at("requestable_recall"));
    const Json& dc = j.at("dontcare_confusion");
    r.dontcare = {dc.at("both").get<long long>(), dc.at("predicted_only").get<long long>(),
                  dc.at("gold_only").get<long long>(), dc.at("neither").get<long long>()};
    r.dontcare_precision = optional_from(j.at("dontcare_precision"));
    r.dontcare_recall = optional_from(j.at("dontcare_recall"));
    for (const auto& [c, arr] : j.at("examples").items()) {
      auto& list = r.examples[parse_error_category(c)];
      for (const auto& jr : arr) list.push_back(record_from_json(jr));
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

}  // namespace dst
