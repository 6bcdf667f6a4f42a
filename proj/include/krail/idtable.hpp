#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace krail {

// ---------------------------------------------------------------------------
// Table and code vocabularies
// ---------------------------------------------------------------------------

/// The three base-HEP tables: scenario familiarity (SF), information
/// availability and reliability (IAR) and task complexity (TC).
enum class TableId { ScenarioFamiliarity, InfoAvailabilityReliability, TaskComplexity };

inline constexpr std::array<TableId, 3> kAllTables = {
    TableId::ScenarioFamiliarity, TableId::InfoAvailabilityReliability, TableId::TaskComplexity};

std::string_view table_code(TableId t) noexcept;   // "SF" | "IAR" | "TC"
std::string_view table_title(TableId t) noexcept;  // "scenario familiarity", ...
std::optional<TableId> parse_table_id(std::string_view code);

/// Cognitive failure modes: detection, understanding, decision-making,
/// action execution and interteam coordination.
enum class Cfm : std::uint8_t { D, U, DM, E, T };

inline constexpr std::array<Cfm, 5> kAllCfms = {Cfm::D, Cfm::U, Cfm::DM, Cfm::E, Cfm::T};

std::string_view cfm_code(Cfm c) noexcept;
std::string_view cfm_title(Cfm c) noexcept;
std::optional<Cfm> parse_cfm(std::string_view code);

using CfmSet = std::set<Cfm>;

/// Parses "D|U", "D / U", "D, U" and similar; nullopt on any unknown code or
/// an empty set.
std::optional<CfmSet> parse_cfm_set(std::string_view text);
std::string render_cfm_set(const CfmSet& set, std::string_view separator = "|");

/// Performance influencing factor code such as SF0, SF4 or SF3.3.
struct PifCode {
  std::string prefix;
  std::uint32_t major = 0;
  std::optional<std::uint32_t> minor;

  std::string to_string() const;
  bool same_major(const PifCode& other) const noexcept {
    return prefix == other.prefix && major == other.major;
  }

  friend bool operator==(const PifCode&, const PifCode&) = default;
  friend auto operator<=>(const PifCode&, const PifCode&) = default;
};

/// Grammar: `[A-Z]+ digits ("." digits)?`. Throws Error(MalformedPifCode).
PifCode parse_pif_code(std::string_view text);
std::optional<PifCode> try_parse_pif_code(std::string_view text) noexcept;

/// Decimal or scientific notation; result in (0, 1].
/// Throws Error(MalformedRate) or Error(RateOutOfRange).
double parse_error_rate(std::string_view text);

/// Scientific notation with two significant digits below 0.01 ("1.6E-3"),
/// shortest plain decimal otherwise ("0.25").
std::string render_error_rate(double rate);

// ---------------------------------------------------------------------------
// Entries and the store
// ---------------------------------------------------------------------------

struct IdTableEntry {
  std::string entry_id;
  TableId table = TableId::ScenarioFamiliarity;
  PifCode pif;
  CfmSet cfms;
  double error_rate = 0.0;
  std::string task;
  std::string error_measure;
  std::string pif_measure;
  std::string other_pifs;
  std::string uncertainty_note;
  std::string reference_id;

  /// Text of the "task (and error measure)" dimension.
  std::string task_dimension_text() const;
  /// Text of the "other PIFs (and uncertainty)" dimension.
  std::string other_pifs_dimension_text() const;

  friend bool operator==(const IdTableEntry&, const IdTableEntry&) = default;
};

/// One diagnostic per violated invariant; empty when the entry is valid.
std::vector<std::string> validate_entry(const IdTableEntry& entry);

inline constexpr std::string_view kIdTableHeader =
    "entry_id,table,pif,cfms,error_rate,task,error_measure,pif_measure,other_pifs,uncertainty,"
    "reference";

/// Immutable, indexed collection of entries. Entry order is load order.
class EntryStore {
 public:
  EntryStore() = default;
  /// Validates every entry and rejects duplicate ids (Error(DuplicateEntryId),
  /// Error(FieldError)).
  explicit EntryStore(std::vector<IdTableEntry> entries);

  const std::vector<IdTableEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const IdTableEntry* find(std::string_view entry_id) const;

  // Index lookups return positions into entries(), ascending.
  const std::vector<std::size_t>& by_table(TableId t) const;
  const std::vector<std::size_t>& by_pif(std::string_view canonical_pif) const;
  const std::vector<std::size_t>& by_cfm(Cfm c) const;

  std::vector<TableId> tables() const;

 private:
  std::vector<IdTableEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<TableId, std::vector<std::size_t>> by_table_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_pif_;
  std::map<Cfm, std::vector<std::size_t>> by_cfm_;
};

/// Reads the IDTABLE record format. Every error message carries the row.
EntryStore load_idtable(std::istream& source, std::optional<TableId> expected_table = std::nullopt);
EntryStore load_idtable_file(const std::filesystem::path& path,
                             std::optional<TableId> expected_table = std::nullopt);
/// Loads every *.csv in `dir` (sorted by file name) into one store.
EntryStore load_idtable_dir(const std::filesystem::path& dir);

void serialize_idtable(const EntryStore& store, std::ostream& out);
std::string serialize_idtable(const EntryStore& store);

}  // namespace krail
