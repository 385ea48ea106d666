#include "dst/eval.hpp"

#include <cstdio>
#include <set>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

const std::string* lookup(const std::map<std::string, std::string>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

bool turn_correct(const std::vector<const SlotDef*>& slots, const DialogueState& predicted, const SlotValues& gold,
                  const VariantMap& variants) {
  for (const auto* s : slots)
    if (!values_match(s->name, lookup(predicted.assignments, s->name), lookup(gold, s->name), variants)) return false;
  return true;
}

std::vector<const SlotDef*> all_slots(const Schema& schema) {
  std::vector<const SlotDef*> out;
  for (const auto& s : schema.slots()) out.push_back(&s);
  return out;
}

bool touches_domain(const Dialogue& d, const std::vector<const SlotDef*>& slots) {
  for (const auto& t : d.turns)
    for (const auto* s : slots)
      if (t.gold_state.count(s->name)) return true;
  return false;
}

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

bool values_match(std::string_view slot, const std::string* predicted, const std::string* gold,
                  const VariantMap& variants) {
  if (!predicted || !gold) return !predicted && !gold;
  return variants.equivalent(slot, *predicted, *gold);
}

std::string_view to_string(PerDomainProtocol protocol) {
  return protocol == PerDomainProtocol::touching ? "touching" : "all";
}

PerDomainProtocol parse_per_domain_protocol(std::string_view name) {
  if (name == "touching") return PerDomainProtocol::touching;
  if (name == "all") return PerDomainProtocol::all;
  throw ConfigError("unknown per-domain protocol: " + std::string(name) + " (expected touching or all)");
}

std::vector<ScoredDialogue> align(const std::vector<Trace>& traces, const Corpus& corpus) {
  std::vector<ScoredDialogue> out;
  std::set<std::string> seen;
  for (const auto& trace : traces) {
    const Dialogue* d = corpus.find(trace.dialogue_id);
    if (!d) throw DataError("trace " + trace.dialogue_id + " has no corpus dialogue");
    if (!trace.complete) throw DataError("trace " + trace.dialogue_id + " is incomplete");
    if (trace.turns.size() != d->turns.size())
      throw DataError("trace " + trace.dialogue_id + " has " + std::to_string(trace.turns.size()) +
                      " turns, corpus has " + std::to_string(d->turns.size()));
    if (!seen.insert(trace.dialogue_id).second) throw DataError("duplicate trace for " + trace.dialogue_id);
    out.push_back({&trace, d});
  }
  return out;
}

double joint_goal_accuracy(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                           const VariantMap& variants) {
  auto slots = all_slots(schema);
  long long correct = 0, total = 0;
  for (const auto& [trace, dialogue] : align(traces, corpus)) {
    for (std::size_t i = 0; i < dialogue->turns.size(); ++i) {
      ++total;
      if (turn_correct(slots, trace->turns[i].state, dialogue->turns[i].gold_state, variants)) ++correct;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> per_domain_jga(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                                     const VariantMap& variants, std::string_view domain, PerDomainProtocol protocol) {
  if (!schema.domains().count(std::string(domain))) throw DataError("unknown domain: " + std::string(domain));
  auto slots = schema.slots_in_domain(domain);
  long long correct = 0, total = 0;
  for (const auto& [trace, dialogue] : align(traces, corpus)) {
    if (protocol == PerDomainProtocol::touching && !touches_domain(*dialogue, slots)) continue;
    for (std::size_t i = 0; i < dialogue->turns.size(); ++i) {
      ++total;
      if (turn_correct(slots, trace->turns[i].state, dialogue->turns[i].gold_state, variants)) ++correct;
    }
  }
  return ratio(correct, total);
}

std::map<GoldValueType, TypeMetrics> per_type_metrics(const std::vector<Trace>& traces, const Corpus& corpus,
                                                      const Schema& schema, const VariantMap& variants) {
  std::map<GoldValueType, TypeMetrics> out;
  for (auto t : kAllValueTypes) out[t] = {};
  for (const auto& [trace, dialogue] : align(traces, corpus)) {
    const auto n = dialogue->turns.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Turn& turn = dialogue->turns[i];
      for (const auto& [slot, value] : turn.gold_update) {
        if (!schema.contains(slot)) continue;
        auto type = classify_gold_value_type(*dialogue, turn.index, slot, schema, variants);
        auto& m = out[type];
        ++m.support;
        const std::string* expected = type == GoldValueType::none ? nullptr : &value;
        for (std::size_t later = i; later < n; ++later) {
          if (values_match(slot, lookup(trace->turns[later].state.assignments, slot), expected, variants)) {
            ++m.recalled;
            break;
          }
        }
      }
      const NormalizedUpdate& upd = trace->turns[i].update;
      auto score = [&](const std::string& slot, const std::string& value, const std::string* predicted) {
        auto type = classify_value(*dialogue, turn.index, slot, value, schema, variants);
        auto& m = out[type];
        ++m.predicted;
        if (values_match(slot, predicted, lookup(turn.gold_state, slot), variants)) ++m.correct;
      };
      for (const auto& [slot, value] : upd.informable) score(slot, value, &value);
      for (const auto& slot : upd.removals) score(slot, std::string(kNoneValue), nullptr);
    }
  }
  for (auto& [type, m] : out) {
    m.precision = ratio(m.correct, m.predicted);
    m.recall = ratio(m.recalled, m.support);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0)
      m.f1 = 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
    else if (m.precision && m.recall)
      m.f1 = 0.0;
  }
  return out;
}

DontcareConfusion dontcare_confusion(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema) {
  DontcareConfusion c;
  for (const auto& [trace, dialogue] : align(traces, corpus)) {
    for (std::size_t i = 0; i < dialogue->turns.size(); ++i) {
      for (const auto& s : schema.slots()) {
        const auto* p = lookup(trace->turns[i].state.assignments, s.name);
        const auto* g = lookup(dialogue->turns[i].gold_state, s.name);
        bool pd = p && *p == kDontcare;
        bool gd = g && *g == kDontcare;
        if (pd && gd) {
          ++c.both;
        } else if (pd) {
          ++c.predicted_only;
        } else if (gd) {
          ++c.gold_only;
        } else {
          ++c.neither;
        }
      }
    }
  }
  return c;
}

Metrics evaluate(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                 const VariantMap& variants, PerDomainProtocol protocol) {
  Metrics m;
  auto aligned = align(traces, corpus);
  auto slots = all_slots(schema);
  m.dialogue_count = static_cast<long long>(aligned.size());
  for (const auto& [trace, dialogue] : aligned) {
    for (std::size_t i = 0; i < dialogue->turns.size(); ++i) {
      ++m.turn_count;
      if (turn_correct(slots, trace->turns[i].state, dialogue->turns[i].gold_state, variants)) ++m.correct_turns;
    }
  }
  m.jga = m.turn_count == 0 ? 0.0 : static_cast<double>(m.correct_turns) / static_cast<double>(m.turn_count);
  for (const auto& domain : schema.domains())
    if (auto v = per_domain_jga(traces, corpus, schema, variants, domain, protocol)) m.per_domain_jga[domain] = *v;
  m.per_type = per_type_metrics(traces, corpus, schema, variants);
  m.dontcare = dontcare_confusion(traces, corpus, schema);
  m.per_domain_protocol = std::string(to_string(protocol));
  return m;
}

Json to_json(const Metrics& m) {
  Json j;
  j["jga"] = m.jga;
  j["correct_turns"] = m.correct_turns;
  j["turn_count"] = m.turn_count;
  j["dialogue_count"] = m.dialogue_count;
  j["per_domain_protocol"] = m.per_domain_protocol;
  j["per_domain_jga"] = m.per_domain_jga;
  Json types = Json::object();
  for (const auto& [type, t] : m.per_type) {
    Json jt;
    jt["support"] = t.support;
    jt["recalled"] = t.recalled;
    jt["predicted"] = t.predicted;
    jt["correct"] = t.correct;
    jt["precision"] = optional_json(t.precision);
    jt["recall"] = optional_json(t.recall);
    jt["f1"] = optional_json(t.f1);
    types[std::string(to_string(type))] = std::move(jt);
  }
  j["per_type"] = std::move(types);
  Json dc;
  dc["both"] = m.dontcare.both;
  dc["predicted_only"] = m.dontcare.predicted_only;
  dc["gold_only"] = m.dontcare.gold_only;
  dc["neither"] = m.dontcare.neither;
  j["dontcare_confusion"] = std::move(dc);
  return j;
}

Metrics metrics_from_json(const Json& j) {
  Metrics m;
  try {
    m.jga = j.at("jga").get<double>();
    m.correct_turns = j.at("correct_turns").get<long long>();
    m.turn_count = j.at("turn_count").get<long long>();
    m.dialogue_count = j.at("dialogue_count").get<long long>();
    m.per_domain_protocol = j.at("per_domain_protocol").get<std::string>();
    m.per_domain_jga = j.at("per_domain_jga").get<std::map<std::string, double>>();
    for (const auto& [name, jt] : j.at("per_type").items()) {
      TypeMetrics t;
      t.support = jt.at("support").get<long long>();
      t.recalled = jt.at("recalled").get<long long>();
      t.predicted = jt.at("predicted").get<long long>();
      t.correct = jt.at("correct").get<long long>();
      t.precision = optional_from(jt.at("precision"));
      t.recall = optional_from(jt.at("recall"));
      t.f1 = optional_from(jt.at("f1"));
      m.per_type[parse_value_type(name)] = t;
    }
    const Json& dc = j.at("dontcare_confusion");
    m.dontcare = {dc.at("both").get<long long>(), dc.at("predicted_only").get<long long>(),
                  dc.at("gold_only").get<long long>(), dc.at("neither").get<long long>()};
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
  return m;
}

ReferenceNumbers ReferenceNumbers::parse(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  ReferenceNumbers r;
  try {
    if (doc.contains("headline")) {
      r.headline_label = doc["headline"].value("label", "reference JGA");
      r.headline_jga = doc["headline"].at("jga").get<double>();
    }
    r.domains = doc.at("domains").get<std::vector<std::string>>();
    for (const auto& jr : doc.at("rows")) {
      Row row{jr.at("model").get<std::string>(), jr.at("values").get<std::vector<double>>(), jr.at("avg").get<double>()};
      if (row.values.size() != r.domains.size())
        throw DataError(source + ": row " + row.model + " does not have one value per domain");
      r.rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    throw DataError(source + ": malformed reference numbers: " + e.what());
  }
  return r;
}

ReferenceNumbers ReferenceNumbers::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("reference numbers not found: " + path.string());
  return parse(text::read_file(path), path.string());
}

std::string render_comparison(const Metrics& metrics, const ReferenceNumbers* reference, TableFormat format) {
  std::vector<std::string> domains;
  if (reference) {
    domains = reference->domains;
  } else {
    for (const auto& [d, v] : metrics.per_domain_jga) domains.push_back(d);
  }

  std::vector<std::string> run_cells;
  double sum = 0.0;
  int defined = 0;
  for (const auto& d : domains) {
    auto it = metrics.per_domain_jga.find(d);
    if (it == metrics.per_domain_jga.end()) {
      run_cells.push_back("n/a");
      continue;
    }
    run_cells.push_back(fixed(100.0 * it->second, 2));
    sum += 100.0 * it->second;
    ++defined;
  }
  std::string run_avg = defined ? fixed(sum / defined, 2) : "n/a";

  std::string out;
  if (format == TableFormat::csv) {
    out += "model,source";
    for (const auto& d : domains) out += "," + d;
    out += ",avg\n";
    out += "this run,measured";
    for (const auto& c : run_cells) out += "," + c;
    out += "," + run_avg + "\n";
    if (reference) {
      for (const auto& row : reference->rows) {
        out += "\"" + row.model + "\",published reference";
        for (double v : row.values) out += "," + fixed(v, 1);
        out += "," + fixed(row.avg, 2) + "\n";
      }
    }
    return out;
  }

  out += "# Per-domain joint goal accuracy (%)\n\n";
  out += "This run: JGA " + fixed(100.0 * metrics.jga, 2) + "% over " + std::to_string(metrics.turn_count) +
         " turns in " + std::to_string(metrics.dialogue_count) + " dialogues (per-domain protocol: " +
         metrics.per_domain_protocol + ").\n";
  if (reference && reference->headline_jga)
    out += "Published reference, not reproducible here: " + reference->headline_label + " = " +
           fixed(*reference->headline_jga, 1) + "%.\n";
  out += "\n| Model |";
  for (const auto& d : domains) out += " " + d + " |";
  out += " avg. |\n|---|";
  for (std::size_t i = 0; i < domains.size(); ++i) out += "---:|";
  out += "---:|\n| this run |";
  for (const auto& c : run_cells) out += " " + c + " |";
  out += " " + run_avg + " |\n";
  if (reference) {
    for (const auto& row : reference->rows) {
      out += "| " + row.model + " (reference) |";
      for (double v : row.values) out += " " + fixed(v, 1) + " |";
      out += " " + fixed(row.avg, 2) + " |\n";
    }
    out += "\nReference rows are published constants for context only.\n";
  }
  return out;
}

}  // namespace dst
