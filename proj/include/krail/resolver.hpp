#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "krail/attributes.hpp"
#include "krail/graph.hpp"
#include "krail/idtable.hpp"

namespace krail {

enum class Provenance { ModelRank1, ExpertEdited };
std::string_view provenance_name(Provenance p) noexcept;

/// One chosen value per dimension, with where it came from.
struct ResolvedAttributeSet {
  PifCode pif;
  CfmSet cfms;
  std::string task;
  std::string pif_measure;
  std::string other_pifs;
  std::array<Provenance, 5> provenance{Provenance::ModelRank1, Provenance::ModelRank1, Provenance::ModelRank1,
                                       Provenance::ModelRank1, Provenance::ModelRank1};

  Provenance provenance_of(Dimension d) const { return provenance[static_cast<std::size_t>(d)]; }
  friend bool operator==(const ResolvedAttributeSet&, const ResolvedAttributeSet&) = default;
};

/// Rank-1 value of every dimension, provenance ModelRank1.
ResolvedAttributeSet resolve_from_rank1(const CandidateAttributeSet& candidates);

/// Relative weight of each term. Defaults favour the indexing dimensions.
struct ScoreWeights {
  double pif = 4.0;
  double cfm = 2.0;
  double task = 2.0;
  double pif_measure = 1.0;
  double other_pifs = 1.0;

  double total() const noexcept { return pif + cfm + task + pif_measure + other_pifs; }
};

struct ScoreBreakdown {
  double pif_term = 0.0;    // 1 exact, 0.5 same prefix and major, else 0
  double cfm_term = 0.0;    // Jaccard of CFM sets
  double task_term = 0.0;   // Jaccard of word tokens
  double pif_measure_term = 0.0;
  double other_pifs_term = 0.0;
  double total = 0.0;

  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

/// Attribute text pre-tokenized for repeated scoring.
struct PreparedAttributes {
  PifCode pif;
  CfmSet cfms;
  std::vector<std::string> task_tokens;
  std::vector<std::string> pif_measure_tokens;
  std::vector<std::string> other_pifs_tokens;
};

PreparedAttributes prepare(const ResolvedAttributeSet& attrs);

double pif_term(const PifCode& entry, const PifCode& wanted) noexcept;
double cfm_term(const CfmSet& entry, const CfmSet& wanted) noexcept;

ScoreBreakdown match_score(const IdTableEntry& entry, const ResolvedAttributeSet& attrs,
                           const ScoreWeights& weights = {});
ScoreBreakdown match_score(const IdTableEntry& entry, const EntryFeatures& features,
                           const PreparedAttributes& attrs, const ScoreWeights& weights);

struct RankedMatch {
  std::string entry_id;
  double score = 0.0;
  double error_rate = 0.0;
  ScoreBreakdown breakdown;

  friend bool operator==(const RankedMatch&, const RankedMatch&) = default;
};

inline constexpr std::size_t kTopK = 5;

struct HepResolution {
  std::vector<RankedMatch> ranked_matches;  // at most kTopK
  double base_hep = 0.0;                    // error rate of rank 1

  friend bool operator==(const HepResolution&, const HepResolution&) = default;
};

/// Scores every entry of `table`, sorts by (score desc, entry_id asc) and keeps
/// the top five. Throws Error(EmptyTable).
HepResolution resolve_hep(const KnowledgeGraph& graph, TableId table, const ResolvedAttributeSet& attrs,
                          const ScoreWeights& weights = {});
/// Same contract, single-threaded; kept as the reference for the parallel path.
HepResolution resolve_hep_serial(const KnowledgeGraph& graph, TableId table, const ResolvedAttributeSet& attrs,
                                 const ScoreWeights& weights = {});

bool top5_contains(const HepResolution& resolution, std::string_view truth_entry_id);

/// Delimited export: rank,entry_id,score,error_rate,pif_term,cfm_term,task_term,
/// pif_measure_term,other_pifs_term
void export_resolution(const HepResolution& resolution, std::ostream& out);

}  // namespace krail
