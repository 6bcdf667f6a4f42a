#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "krail/agents.hpp"
#include "krail/attributes.hpp"
#include "krail/graph.hpp"
#include "krail/llm.hpp"
#include "krail/resolver.hpp"
#include "krail/stats.hpp"

namespace krail {

struct EvalCase {
  CaseInput case_input;
  ResolvedAttributeSet truth;
  std::string truth_entry_id;
  std::string reference_id;  // shots citing this reference are excluded
  std::size_t row = 0;       // source row, for diagnostics
};

inline constexpr std::string_view kEvalDatasetHeader =
    "case_text,table,truth_entry_id,truth_pif,truth_cfms,truth_task,truth_pif_measure,truth_other_pifs,reference";

/// Throws Error(FormatError/FieldError/MalformedPifCode/InvalidCase) naming
/// the offending row.
/// Every truth_entry_id must exist in `store` under the case's table.
std::vector<EvalCase> load_eval_dataset(std::istream& in, const EntryStore& store);
std::vector<EvalCase> load_eval_dataset_file(const std::filesystem::path& path, const EntryStore& store);
void serialize_eval_dataset(const std::vector<EvalCase>& cases, std::ostream& out);

/// Binary text match: equal lowercased alphanumeric token sequences, both non-empty.
bool text_matches(std::string_view truth, std::string_view candidate);

struct EvalOutcome {
  std::array<bool, 5> hits{};  // indexed by Dimension
  bool resolution_hit = false;
  bool failed = false;
  std::string diagnostic;  // failing stage and message when failed
  std::vector<std::string> shot_entry_ids;
  std::map<std::string, std::chrono::nanoseconds> timings;

  bool hit(Dimension d) const { return hits[static_cast<std::size_t>(d)]; }
};

EvalOutcome score_case(const CandidateAttributeSet& candidates, const HepResolution& resolution,
                       const EvalCase& truth);

struct EvalConfig {
  ShotConfig shots;
  bool ablation = false;
  std::uint64_t seed = 0;
  std::size_t n_resamples = kDefaultResamples;
  double level = 0.95;
  bool parallel_cases = true;
};

struct AccuracySummary {
  std::size_t hits = 0;
  double mean = 0.0;
  double std = 0.0;
  std::optional<ConfidenceInterval> ci;  // absent when n == 0
};

struct TimingSummary {
  std::size_t n = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

struct EvalSummary {
  EvalConfig config;
  std::size_t n = 0;
  std::size_t failures = 0;
  std::array<AccuracySummary, 5> dimensions;  // indexed by Dimension
  AccuracySummary resolution;                 // top-5 hit of the final lookup
  std::map<std::string, TimingSummary> timings;
  std::vector<EvalOutcome> outcomes;  // in dataset order

  const AccuracySummary& dimension(Dimension d) const { return dimensions[static_cast<std::size_t>(d)]; }
};

/// Aggregates outcomes. The bootstrap seed for each dimension is derived from
/// (config.seed, dimension), so the result does not depend on outcome order
/// beyond the multiset of hits.
EvalSummary summarize(std::vector<EvalOutcome> outcomes, const EvalConfig& config);

/// Runs create, decompose (unless ablation), attribute and resolve per case,
/// excluding shots that cite the case's reference. Failures become misses.
EvalSummary run_evaluation(const std::vector<EvalCase>& dataset, const KnowledgeGraph& graph, Provider& provider,
                           const EvalConfig& config);

/// Per-case comparison of two runs over the same dataset. `better` counts
/// cases the baseline hits and the other run misses.
struct HitPartition {
  std::size_t better = 0;
  std::size_t worse = 0;
  std::size_t unchanged = 0;

  friend bool operator==(const HitPartition&, const HitPartition&) = default;
};

struct RunComparison {
  std::array<HitPartition, 5> dimensions;
  HitPartition resolution;

  const HitPartition& dimension(Dimension d) const { return dimensions[static_cast<std::size_t>(d)]; }
};

/// Throws Error(InvalidArgument) when the runs differ in length.
RunComparison compare_outcomes(const std::vector<EvalOutcome>& baseline, const std::vector<EvalOutcome>& other);

/// Welch t-test on one stage's per-case durations (seconds).
TTestResult compare_timings(const std::vector<EvalOutcome>& a, const std::vector<EvalOutcome>& b,
                            const std::string& stage);

/// Accuracies reported for the original system, per table and shot count.
/// They depend on a specific hosted model and are for side-by-side display
/// only; nothing here reproduces them.
struct PublishedAccuracy {
  TableId table;
  int shots;
  std::array<double, 5> mean;
  std::array<double, 5> std;
};
const std::vector<PublishedAccuracy>& published_accuracies();

/// Plain-text table: one row per dimension with mean ± std and the CI, plus
/// the published row for the same table and shot count when `table` is set.
std::string render_summary(const EvalSummary& summary, std::optional<TableId> table = {});

/// Machine-readable summary. Wall-clock timings are left out unless asked
/// for, so repeated runs with one seed write identical files.
nlohmann::json summary_to_json(const EvalSummary& summary, bool include_timings = false);

}  // namespace krail
