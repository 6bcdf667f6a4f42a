#include "krail/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <utility>

#include "krail/error.hpp"
#include "krail/text.hpp"
#include "prompt_assets.hpp"

namespace krail {

ShotConfig ShotConfig::of(int k) {
  if (std::find(kLegalShotCounts.begin(), kLegalShotCounts.end(), k) == kLegalShotCounts.end()) {
    throw Error(ErrorCode::InvalidArgument, "shot count must be 0, 1, 3 or 5 (got " + std::to_string(k) + ")");
  }
  return ShotConfig(k);
}

std::string_view dimension_key(Dimension d) noexcept {
  switch (d) {
    case Dimension::Pif: return "pif";
    case Dimension::Cfm: return "cfm";
    case Dimension::TaskAndErrorMeasure: return "task_and_error_measure";
    case Dimension::PifMeasure: return "pif_measure";
    case Dimension::OtherPifsAndUncertainty: return "other_pifs_and_uncertainty";
  }
  return "?";
}

std::string_view dimension_header(Dimension d) noexcept {
  switch (d) {
    case Dimension::Pif: return "PIF";
    case Dimension::Cfm: return "CFM";
    case Dimension::TaskAndErrorMeasure: return "TASK_AND_ERROR_MEASURE";
    case Dimension::PifMeasure: return "PIF_MEASURE";
    case Dimension::OtherPifsAndUncertainty: return "OTHER_PIFS_AND_UNCERTAINTY";
  }
  return "?";
}

std::string_view dimension_title(Dimension d) noexcept {
  switch (d) {
    case Dimension::Pif: return "PIF";
    case Dimension::Cfm: return "CFM";
    case Dimension::TaskAndErrorMeasure: return "Task";
    case Dimension::PifMeasure: return "PIF Measure";
    case Dimension::OtherPifsAndUncertainty: return "Other PIFs";
  }
  return "?";
}

std::optional<Dimension> parse_dimension_key(std::string_view key) {
  for (Dimension d : kAllDimensions) {
    if (dimension_key(d) == key) return d;
  }
  return std::nullopt;
}

const std::vector<std::string>& CandidateAttributeSet::text_candidates(Dimension d) const {
  switch (d) {
    case Dimension::TaskAndErrorMeasure: return task_and_error_measure;
    case Dimension::PifMeasure: return pif_measure;
    case Dimension::OtherPifsAndUncertainty: return other_pifs_and_uncertainty;
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "not a text dimension: " + std::string(dimension_key(d)));
}

std::vector<std::string>& CandidateAttributeSet::text_candidates(Dimension d) {
  return const_cast<std::vector<std::string>&>(std::as_const(*this).text_candidates(d));
}

std::size_t CandidateAttributeSet::candidate_count(Dimension d) const {
  switch (d) {
    case Dimension::Pif: return pif.size();
    case Dimension::Cfm: return cfm.size();
    default: return text_candidates(d).size();
  }
}

bool CandidateAttributeSet::same_candidates(const CandidateAttributeSet& o) const {
  return pif == o.pif && cfm == o.cfm && task_and_error_measure == o.task_and_error_measure &&
         pif_measure == o.pif_measure && other_pifs_and_uncertainty == o.other_pifs_and_uncertainty;
}

// ---------------------------------------------------------------------------
// Few-shot selection and prompt assembly
// ---------------------------------------------------------------------------

FewShotExample render_few_shot(const IdTableEntry& e) {
  std::ostringstream out;
  out << "Task description: " << e.task_dimension_text() << "\n";
  out << "PIF:\nRANK 1: " << e.pif.to_string() << "\n";
  out << "CFM:\nRANK 1: " << render_cfm_set(e.cfms) << "\n";
  out << "TASK_AND_ERROR_MEASURE:\nRANK 1: " << e.task_dimension_text() << "\n";
  out << "PIF_MEASURE:\nRANK 1: " << e.pif_measure << "\n";
  const auto other = e.other_pifs_dimension_text();
  out << "OTHER_PIFS_AND_UNCERTAINTY:\nRANK 1: " << (other.empty() ? "None reported" : other) << "\n";
  out << "Base error rate: " << render_error_rate(e.error_rate) << "\n";
  return {e.entry_id, out.str()};
}

std::vector<FewShotExample> select_few_shots(const EntryStore& store, TableId table, ShotConfig shots,
                                             const std::optional<std::string>& exclude_reference) {
  std::vector<const IdTableEntry*> eligible;
  for (std::size_t i : store.by_table(table)) {
    const auto& e = store.entries()[i];
    if (exclude_reference && e.reference_id == *exclude_reference) continue;
    eligible.push_back(&e);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const IdTableEntry* a, const IdTableEntry* b) { return a->entry_id < b->entry_id; });
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(shots.k()), eligible.size());
  std::vector<FewShotExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(render_few_shot(*eligible[i]));
  return out;
}

std::string_view attribute_output_contract() { return assets::kAttributeOutputContract; }

std::string build_attribute_prompt(const CaseInput& c, const std::vector<AgentReport>& reports,
                                   std::string_view graph_context, const std::vector<FewShotExample>& shots) {
  std::ostringstream out;
  out << assets::kAttributeInstructions << "\n\n";
  out << "## KNOWLEDGE GRAPH CONTEXT\n" << graph_context << "\n\n";
  out << "## EXAMPLES\n";
  if (shots.empty()) out << "(none)\n";
  for (std::size_t i = 0; i < shots.size(); ++i) {
    out << kExampleBlockMarker << (i + 1) << " (entry " << shots[i].source_entry_id << ")\n"
        << shots[i].rendered_text << "\n";
  }
  out << "\n";
  if (!reports.empty()) {
    out << "## TASK DECOMPOSITION\n";
    for (const auto& r : reports) {
      out << "### " << agent_name(r.kind) << "\n" << render_agent_report(r);
    }
  }
  out << "## CASE\nTable: " << table_code(c.table) << " (" << table_title(c.table) << ")\n"
      << text::normalize_newlines(c.data_source_text) << "\n\n";
  out << "## OUTPUT FORMAT\n" << assets::kAttributeOutputContract << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Output parsing
// ---------------------------------------------------------------------------

namespace {

std::string_view strip_markup(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '-')) {
    s.remove_prefix(1);
    s = text::trim(s);
  }
  while (!s.empty() && s.back() == '*') s.remove_suffix(1);
  return text::trim(s);
}

std::optional<Dimension> dimension_header_line(std::string_view line) {
  auto s = strip_markup(line);
  if (s.empty() || s.back() != ':') return std::nullopt;
  s.remove_suffix(1);
  while (!s.empty() && (s.back() == '*' || s.back() == ' ')) s.remove_suffix(1);
  std::string key = text::to_upper(s);
  std::replace(key.begin(), key.end(), ' ', '_');
  for (Dimension d : kAllDimensions) {
    if (dimension_header(d) == key) return d;
  }
  return std::nullopt;
}

struct RankLine {
  unsigned rank;
  std::string value;
};

std::optional<RankLine> rank_line(std::string_view line) {
  auto s = strip_markup(line);
  if (s.size() < 5 || text::to_upper(s.substr(0, 4)) != "RANK") return std::nullopt;
  s.remove_prefix(4);
  s = text::trim(s);
  unsigned rank = 0;
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    rank = rank * 10 + static_cast<unsigned>(s[i] - '0');
    if (rank > 1000000) return std::nullopt;
    ++i;
  }
  if (i == 0) return std::nullopt;
  s.remove_prefix(i);
  s = text::trim(s);
  if (s.empty() || (s.front() != ':' && s.front() != '.' && s.front() != ')')) return std::nullopt;
  s.remove_prefix(1);
  return RankLine{rank, std::string(text::trim(s))};
}

}  // namespace

CandidateAttributeSet extract_attributes(std::string_view llm_text) {
  std::map<Dimension, std::vector<RankLine>> blocks;
  std::optional<Dimension> current;
  for (const auto& line : text::split_lines(llm_text)) {
    if (current) {
      if (auto r = rank_line(line)) {
        blocks[*current].push_back(std::move(*r));
        continue;
      }
    }
    if (auto d = dimension_header_line(line)) {
      current = *d;
      blocks[*d];
    }
  }

  CandidateAttributeSet out;
  for (Dimension d : kAllDimensions) {
    const std::string key(dimension_key(d));
    auto it = blocks.find(d);
    if (it == blocks.end()) {
      throw Error(ErrorCode::MissingDimension, "model output is missing the " + key + " block", key,
                  std::string(llm_text));
    }
    auto lines = it->second;
    std::stable_sort(lines.begin(), lines.end(),
                     [](const RankLine& a, const RankLine& b) { return a.rank < b.rank; });

    std::size_t accepted = 0;
    auto warn = [&](const std::string& w) { out.warnings.push_back(key + ": " + w); };
    for (const auto& l : lines) {
      bool kept = false;
      switch (d) {
        case Dimension::Pif: {
          auto code = try_parse_pif_code(l.value);
          if (!code) {
            warn("skipped malformed PIF code '" + l.value + "'");
          } else if (std::find(out.pif.begin(), out.pif.end(), *code) == out.pif.end()) {
            out.pif.push_back(*code);
            kept = true;
          }
          break;
        }
        case Dimension::Cfm: {
          auto set = parse_cfm_set(l.value);
          if (!set) {
            warn("skipped malformed CFM set '" + l.value + "'");
          } else if (std::find(out.cfm.begin(), out.cfm.end(), *set) == out.cfm.end()) {
            out.cfm.push_back(*set);
            kept = true;
          }
          break;
        }
        default: {
          auto& list = out.text_candidates(d);
          const auto tokens = text::word_tokens(l.value);
          if (tokens.empty()) {
            warn("skipped empty candidate");
          } else if (std::none_of(list.begin(), list.end(),
                                  [&](const std::string& s) { return text::word_tokens(s) == tokens; })) {
            list.push_back(l.value);
            kept = true;
          }
          break;
        }
      }
      if (kept) ++accepted;
    }
    if (accepted == 0) {
      throw Error(ErrorCode::NoValidCandidate, "no valid candidate in the " + key + " block", key,
                  std::string(llm_text));
    }
    if (accepted > kMaxCandidates) {
      warn(std::to_string(accepted) + " candidates, kept the first " + std::to_string(kMaxCandidates));
      switch (d) {
        case Dimension::Pif: out.pif.resize(kMaxCandidates); break;
        case Dimension::Cfm: out.cfm.resize(kMaxCandidates); break;
        default:
          out.text_candidates(d).resize(kMaxCandidates);
          break;
      }
    }
  }
  return out;
}

std::string render_candidates(const CandidateAttributeSet& set) {
  std::ostringstream out;
  out << "PIF:\n";
  for (std::size_t i = 0; i < set.pif.size(); ++i) out << "RANK " << i + 1 << ": " << set.pif[i].to_string() << "\n";
  out << "CFM:\n";
  for (std::size_t i = 0; i < set.cfm.size(); ++i) out << "RANK " << i + 1 << ": " << render_cfm_set(set.cfm[i]) << "\n";
  for (Dimension d : {Dimension::TaskAndErrorMeasure, Dimension::PifMeasure, Dimension::OtherPifsAndUncertainty}) {
    out << dimension_header(d) << ":\n";
    const auto& list = set.text_candidates(d);
    for (std::size_t i = 0; i < list.size(); ++i) out << "RANK " << i + 1 << ": " << list[i] << "\n";
  }
  return out.str();
}

}  // namespace krail
