#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "krail/agents.hpp"
#include "krail/idtable.hpp"

namespace krail {

/// Number of worked examples in the attribute prompt: 0, 1, 3 or 5.
class ShotConfig {
 public:
  constexpr ShotConfig() = default;
  /// Throws Error(InvalidArgument) for any other count.
  static ShotConfig of(int k);
  constexpr int k() const noexcept { return k_; }
  friend bool operator==(ShotConfig, ShotConfig) = default;

 private:
  constexpr explicit ShotConfig(int k) : k_(k) {}
  int k_ = 0;
};

inline constexpr std::array<int, 4> kLegalShotCounts = {0, 1, 3, 5};

/// The five attribute dimensions.
enum class Dimension { Pif, Cfm, TaskAndErrorMeasure, PifMeasure, OtherPifsAndUncertainty };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::Pif, Dimension::Cfm, Dimension::TaskAndErrorMeasure, Dimension::PifMeasure,
    Dimension::OtherPifsAndUncertainty};

std::string_view dimension_key(Dimension d) noexcept;     // "pif", "task_and_error_measure", ...
std::string_view dimension_header(Dimension d) noexcept;  // "PIF", "TASK_AND_ERROR_MEASURE", ...
std::string_view dimension_title(Dimension d) noexcept;   // "PIF", "Task", "PIF Measure", ...
std::optional<Dimension> parse_dimension_key(std::string_view key);

inline constexpr std::size_t kMaxCandidates = 5;

struct CandidateAttributeSet {
  std::vector<PifCode> pif;
  std::vector<CfmSet> cfm;
  std::vector<std::string> task_and_error_measure;
  std::vector<std::string> pif_measure;
  std::vector<std::string> other_pifs_and_uncertainty;
  std::vector<std::string> warnings;

  const std::vector<std::string>& text_candidates(Dimension d) const;
  std::vector<std::string>& text_candidates(Dimension d);
  std::size_t candidate_count(Dimension d) const;

  /// Equality over candidates only; warnings are diagnostics.
  bool same_candidates(const CandidateAttributeSet& other) const;
};

struct FewShotExample {
  std::string source_entry_id;
  std::string rendered_text;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

FewShotExample render_few_shot(const IdTableEntry& entry);

/// min(k, eligible) examples from `table`, by entry_id ascending, skipping
/// entries whose reference_id equals `exclude_reference`.
std::vector<FewShotExample> select_few_shots(const EntryStore& store, TableId table, ShotConfig shots,
                                             const std::optional<std::string>& exclude_reference = {});

inline constexpr std::string_view kExampleBlockMarker = "### EXAMPLE ";

/// Fixed order: instructions, graph context, examples, agent reports (omitted
/// when `reports` is empty), case text, output contract.
std::string build_attribute_prompt(const CaseInput& c, const std::vector<AgentReport>& reports,
                                   std::string_view graph_context, const std::vector<FewShotExample>& shots);

std::string_view attribute_output_contract();

/// Reads the RANK-prefixed dimension blocks. Lists longer than five are
/// truncated with a warning. Throws Error(MissingDimension | NoValidCandidate).
CandidateAttributeSet extract_attributes(std::string_view llm_text);

/// Canonical text in the output-contract format.
std::string render_candidates(const CandidateAttributeSet& set);

}  // namespace krail
