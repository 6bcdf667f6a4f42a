#include "krail/resolver.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "krail/delimited.hpp"
#include "krail/error.hpp"
#include "krail/kernels.hpp"
#include "krail/text.hpp"

namespace krail {

std::string_view provenance_name(Provenance p) noexcept {
  return p == Provenance::ModelRank1 ? "ModelRank1" : "ExpertEdited";
}

ResolvedAttributeSet resolve_from_rank1(const CandidateAttributeSet& c) {
  if (c.pif.empty() || c.cfm.empty() || c.task_and_error_measure.empty() || c.pif_measure.empty() ||
      c.other_pifs_and_uncertainty.empty()) {
    throw Error(ErrorCode::NoValidCandidate, "candidate set has an empty dimension");
  }
  ResolvedAttributeSet out;
  out.pif = c.pif.front();
  out.cfms = c.cfm.front();
  out.task = c.task_and_error_measure.front();
  out.pif_measure = c.pif_measure.front();
  out.other_pifs = c.other_pifs_and_uncertainty.front();
  return out;
}

PreparedAttributes prepare(const ResolvedAttributeSet& a) {
  return {a.pif, a.cfms, text::token_set(a.task), text::token_set(a.pif_measure), text::token_set(a.other_pifs)};
}

double pif_term(const PifCode& entry, const PifCode& wanted) noexcept {
  if (entry == wanted) return 1.0;
  if (entry.same_major(wanted)) return 0.5;
  return 0.0;
}

double cfm_term(const CfmSet& entry, const CfmSet& wanted) noexcept {
  std::size_t common = 0;
  for (Cfm c : entry) common += wanted.count(c);
  const std::size_t uni = entry.size() + wanted.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

ScoreBreakdown match_score(const IdTableEntry& entry, const EntryFeatures& f, const PreparedAttributes& a,
                           const ScoreWeights& w) {
  ScoreBreakdown s;
  s.pif_term = pif_term(entry.pif, a.pif);
  s.cfm_term = cfm_term(entry.cfms, a.cfms);
  s.task_term = text::jaccard(f.task_tokens, a.task_tokens);
  s.pif_measure_term = text::jaccard(f.pif_measure_tokens, a.pif_measure_tokens);
  s.other_pifs_term = text::jaccard(f.other_pifs_tokens, a.other_pifs_tokens);
  s.total = w.pif * s.pif_term + w.cfm * s.cfm_term + w.task * s.task_term + w.pif_measure * s.pif_measure_term +
            w.other_pifs * s.other_pifs_term;
  return s;
}

ScoreBreakdown match_score(const IdTableEntry& entry, const ResolvedAttributeSet& attrs,
                           const ScoreWeights& weights) {
  const EntryFeatures f{text::token_set(entry.task_dimension_text()), text::token_set(entry.pif_measure),
                        text::token_set(entry.other_pifs_dimension_text())};
  return match_score(entry, f, prepare(attrs), weights);
}

namespace {

using ScoreKernel = void (*)(const KnowledgeGraph&, std::span<const std::size_t>, const PreparedAttributes&,
                             const ScoreWeights&, std::span<ScoreBreakdown>);

HepResolution resolve_with(ScoreKernel kernel, const KnowledgeGraph& graph, TableId table,
                           const ResolvedAttributeSet& attrs, const ScoreWeights& weights) {
  const auto& positions = graph.table_entries(table);
  if (positions.empty()) {
    throw Error(ErrorCode::EmptyTable, "no entries for table " + std::string(table_code(table)),
                std::string(table_code(table)));
  }
  std::vector<ScoreBreakdown> scores(positions.size());
  kernel(graph, positions, prepare(attrs), weights, scores);

  const auto& entries = graph.store().entries();
  std::vector<std::size_t> order(positions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a].total != scores[b].total) return scores[a].total > scores[b].total;
    return entries[positions[a]].entry_id < entries[positions[b]].entry_id;
  };
  const std::size_t k = std::min(kTopK, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);

  HepResolution out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& e = entries[positions[order[i]]];
    out.ranked_matches.push_back({e.entry_id, scores[order[i]].total, e.error_rate, scores[order[i]]});
  }
  out.base_hep = out.ranked_matches.front().error_rate;
  return out;
}

}  // namespace

HepResolution resolve_hep(const KnowledgeGraph& graph, TableId table, const ResolvedAttributeSet& attrs,
                          const ScoreWeights& weights) {
  return resolve_with(&kernels::score_entries, graph, table, attrs, weights);
}

HepResolution resolve_hep_serial(const KnowledgeGraph& graph, TableId table, const ResolvedAttributeSet& attrs,
                                 const ScoreWeights& weights) {
  return resolve_with(&kernels::score_entries_serial, graph, table, attrs, weights);
}

bool top5_contains(const HepResolution& resolution, std::string_view truth_entry_id) {
  const auto& m = resolution.ranked_matches;
  const std::size_t n = std::min(kTopK, m.size());
  return std::any_of(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(n),
                     [&](const RankedMatch& r) { return r.entry_id == truth_entry_id; });
}

void export_resolution(const HepResolution& resolution, std::ostream& out) {
  out << "rank,entry_id,score,error_rate,pif_term,cfm_term,task_term,pif_measure_term,other_pifs_term\n";
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  for (std::size_t i = 0; i < resolution.ranked_matches.size(); ++i) {
    const auto& m = resolution.ranked_matches[i];
    delimited::write_row(out, {std::to_string(i + 1), delimited::quote_if_needed(m.entry_id), num(m.score),
                               render_error_rate(m.error_rate), num(m.breakdown.pif_term),
                               num(m.breakdown.cfm_term), num(m.breakdown.task_term),
                               num(m.breakdown.pif_measure_term), num(m.breakdown.other_pifs_term)});
  }
}

}  // namespace krail
