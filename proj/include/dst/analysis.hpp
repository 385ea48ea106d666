#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dst/corpus.hpp"
#include "dst/eval.hpp"
#include "dst/extraction.hpp"
#include "dst/json_util.hpp"
#include "dst/schema.hpp"
#include "dst/tracker.hpp"
#include "dst/variants.hpp"

namespace dst {

enum class ErrorCategory {
  carry_over_failure,       // a
  coref_unresolved,         // b
  dontcare_overprediction,  // c
  candidate_ignored,        // d
  hallucinated_slot,        // e
  arbitrary_normalization,  // f
  full_state_prediction,    // g
};

inline constexpr std::array<ErrorCategory, 7> kAllErrorCategories = {
    ErrorCategory::carry_over_failure,      ErrorCategory::coref_unresolved,  ErrorCategory::dontcare_overprediction,
    ErrorCategory::candidate_ignored,       ErrorCategory::hallucinated_slot, ErrorCategory::arbitrary_normalization,
    ErrorCategory::full_state_prediction};

std::string_view to_string(ErrorCategory category);
ErrorCategory parse_error_category(std::string_view name);
char category_letter(ErrorCategory category);
std::string_view category_title(ErrorCategory category);

struct ErrorRecord {
  ErrorCategory category = ErrorCategory::carry_over_failure;
  std::string dialogue_id;
  int turn = 0;
  std::string slot;
  std::string predicted;  // empty when nothing was predicted
  std::string gold;       // empty when gold has no assignment
  std::optional<SlotResolution::Kind> resolution;  // hallucinated_slot only
  std::string detail;

  friend bool operator==(const ErrorRecord&, const ErrorRecord&) = default;
};

/// Values that name a place generically instead of the entity itself.
class GenericReferentLexicon {
 public:
  GenericReferentLexicon();  // built-in list
  explicit GenericReferentLexicon(std::vector<std::string> phrases);
  static GenericReferentLexicon load(const std::filesystem::path& path);

  bool contains(std::string_view value) const;

 private:
  std::set<std::string> phrases_;
};

/// Per slot, the dialogues whose raw predictions were already canonical and
/// those whose raw predictions differed from the canonical value only in case
/// or spacing.
class CasingEvidence {
 public:
  static CasingEvidence collect(const std::vector<Trace>& traces, const Schema& schema,
                                const RequestableLexicon& requestables);

  void add(const std::string& slot, const std::string& dialogue_id, bool canonical_as_written);

  /// Both kinds observed for the slot, in two different dialogues.
  bool inconsistent(std::string_view slot) const;

 private:
  struct Sides {
    std::set<std::string> as_written;
    std::set<std::string> recased;
  };
  std::map<std::string, Sides> by_slot_;
};

/// Raw predicted value that normalization changed only in case or spacing.
bool differs_only_in_casing(std::string_view raw, std::string_view canonical);

struct AnalysisContext {
  const Schema& schema;
  const RequestableLexicon& requestables;
  const VariantMap& variants;
  const GenericReferentLexicon& referents;
  const CasingEvidence& casing;
};

/// All detectors over one turn (1-based) of an aligned trace. Each detector
/// looks only at the trace, the gold dialogue and the lexicons.
std::vector<ErrorRecord> classify_turn_errors(const Trace& trace, int turn, const Dialogue& gold,
                                              const AnalysisContext& ctx);

std::vector<ErrorRecord> classify_errors(const std::vector<Trace>& traces, const Corpus& corpus,
                                         const AnalysisContext& ctx);

struct CategoryStats {
  long long records = 0;
  long long count = 0;  // records, except full_state_prediction which counts dialogues
  long long denominator = 0;
  std::optional<double> rate;
  std::string basis;  // what the denominator counts

  friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct HallucinationBreakdown {
  long long total = 0;  // every raw slot prediction
  std::map<SlotResolution::Kind, long long> counts;
  std::map<SlotResolution::Kind, std::optional<double>> shares;

  friend bool operator==(const HallucinationBreakdown&, const HallucinationBreakdown&) = default;
};

struct Report {
  long long dialogue_count = 0;
  long long turn_count = 0;
  std::map<ErrorCategory, CategoryStats> categories;
  HallucinationBreakdown hallucination;
  long long requestable_support = 0;
  long long requestable_hits = 0;
  std::optional<double> requestable_recall;
  DontcareConfusion dontcare;
  std::optional<double> dontcare_precision;
  std::optional<double> dontcare_recall;
  std::map<ErrorCategory, std::vector<ErrorRecord>> examples;

  friend bool operator==(const Report&, const Report&) = default;
};

inline constexpr std::size_t kExamplesPerCategory = 5;

Report aggregate(const std::vector<ErrorRecord>& records, const std::vector<Trace>& traces, const Corpus& corpus,
                 const AnalysisContext& ctx);

enum class ReportFormat { markdown, json, csv };
ReportFormat parse_report_format(std::string_view name);

std::string render_report(const Report& report, ReportFormat format);
Report report_from_json(const Json& j);

}  // namespace dst
