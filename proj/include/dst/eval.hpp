#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dst/corpus.hpp"
#include "dst/json_util.hpp"
#include "dst/schema.hpp"
#include "dst/tracker.hpp"
#include "dst/variants.hpp"

namespace dst {

/// Absent values (nullptr) match only absence; present values match when
/// equal or in one variant class.
bool values_match(std::string_view slot, const std::string* predicted, const std::string* gold,
                  const VariantMap& variants);

enum class PerDomainProtocol {
  touching,  // only dialogues whose gold states use the domain
  all,       // every dialogue
};

std::string_view to_string(PerDomainProtocol protocol);
PerDomainProtocol parse_per_domain_protocol(std::string_view name);

struct TypeMetrics {
  long long support = 0;  // gold assignments of the type
  long long recalled = 0;
  long long predicted = 0;  // predicted assignments bucketed into the type
  long long correct = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  friend bool operator==(const TypeMetrics&, const TypeMetrics&) = default;
};

/// Slot-turn counts of predicted vs gold dontcare.
struct DontcareConfusion {
  long long both = 0;
  long long predicted_only = 0;
  long long gold_only = 0;
  long long neither = 0;

  friend bool operator==(const DontcareConfusion&, const DontcareConfusion&) = default;
};

struct Metrics {
  double jga = 0.0;
  long long correct_turns = 0;
  long long turn_count = 0;
  long long dialogue_count = 0;
  std::map<std::string, double> per_domain_jga;
  std::map<GoldValueType, TypeMetrics> per_type;
  DontcareConfusion dontcare;
  std::string per_domain_protocol = "touching";

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// A trace paired with its gold dialogue.
struct ScoredDialogue {
  const Trace* trace;
  const Dialogue* dialogue;
};

/// Pairs each trace with its corpus dialogue. Throws DataError when a trace is
/// incomplete, names an unknown dialogue, or differs in turn count.
std::vector<ScoredDialogue> align(const std::vector<Trace>& traces, const Corpus& corpus);

/// Correct turns / total turns over all informable schema slots.
double joint_goal_accuracy(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                           const VariantMap& variants);

/// JGA with states restricted to the domain's slots. nullopt when no turn
/// qualifies under the protocol. Throws DataError for an unknown domain.
std::optional<double> per_domain_jga(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                                     const VariantMap& variants, std::string_view domain,
                                     PerDomainProtocol protocol = PerDomainProtocol::touching);

std::map<GoldValueType, TypeMetrics> per_type_metrics(const std::vector<Trace>& traces, const Corpus& corpus,
                                                      const Schema& schema, const VariantMap& variants);

DontcareConfusion dontcare_confusion(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema);

Metrics evaluate(const std::vector<Trace>& traces, const Corpus& corpus, const Schema& schema,
                 const VariantMap& variants, PerDomainProtocol protocol = PerDomainProtocol::touching);

Json to_json(const Metrics& metrics);
Metrics metrics_from_json(const Json& j);

/// Published numbers shown next to a run. Values are percentages.
struct ReferenceNumbers {
  struct Row {
    std::string model;
    std::vector<double> values;  // aligned with `domains`
    double avg = 0.0;
  };
  std::string headline_label;
  std::optional<double> headline_jga;
  std::vector<std::string> domains;
  std::vector<Row> rows;

  static ReferenceNumbers load(const std::filesystem::path& path);
  static ReferenceNumbers parse(std::string_view json_text, const std::string& source = "<reference>");
};

enum class TableFormat { markdown, csv };

/// Side-by-side per-domain table of this run against the reference rows.
/// Without references only the run's row is shown.
std::string render_comparison(const Metrics& metrics, const ReferenceNumbers* reference, TableFormat format);

}  // namespace dst
