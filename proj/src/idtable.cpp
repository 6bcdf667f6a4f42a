#include "krail/idtable.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "krail/delimited.hpp"
#include "krail/error.hpp"
#include "krail/text.hpp"

namespace krail {

std::string_view table_code(TableId t) noexcept {
  switch (t) {
    case TableId::ScenarioFamiliarity: return "SF";
    case TableId::InfoAvailabilityReliability: return "IAR";
    case TableId::TaskComplexity: return "TC";
  }
  return "?";
}

std::string_view table_title(TableId t) noexcept {
  switch (t) {
    case TableId::ScenarioFamiliarity: return "scenario familiarity";
    case TableId::InfoAvailabilityReliability: return "information availability and reliability";
    case TableId::TaskComplexity: return "task complexity";
  }
  return "?";
}

std::optional<TableId> parse_table_id(std::string_view code) {
  const std::string up = text::to_upper(text::trim(code));
  for (TableId t : kAllTables) {
    if (table_code(t) == up) return t;
  }
  return std::nullopt;
}

std::string_view cfm_code(Cfm c) noexcept {
  switch (c) {
    case Cfm::D: return "D";
    case Cfm::U: return "U";
    case Cfm::DM: return "DM";
    case Cfm::E: return "E";
    case Cfm::T: return "T";
  }
  return "?";
}

std::string_view cfm_title(Cfm c) noexcept {
  switch (c) {
    case Cfm::D: return "detection";
    case Cfm::U: return "understanding";
    case Cfm::DM: return "decision-making";
    case Cfm::E: return "action execution";
    case Cfm::T: return "interteam coordination";
  }
  return "?";
}

std::optional<Cfm> parse_cfm(std::string_view code) {
  const std::string up = text::to_upper(text::trim(code));
  for (Cfm c : kAllCfms) {
    if (cfm_code(c) == up) return c;
  }
  return std::nullopt;
}

std::optional<CfmSet> parse_cfm_set(std::string_view s) {
  CfmSet out;
  std::string cur;
  auto flush = [&]() -> bool {
    if (cur.empty()) return true;
    auto c = parse_cfm(cur);
    cur.clear();
    if (!c) return false;
    out.insert(*c);
    return true;
  };
  for (char ch : s) {
    if (ch == '|' || ch == '/' || ch == ',' || ch == ';' || ch == ' ' || ch == '\t') {
      if (!flush()) return std::nullopt;
    } else {
      cur.push_back(ch);
    }
  }
  if (!flush() || out.empty()) return std::nullopt;
  return out;
}

std::string render_cfm_set(const CfmSet& set, std::string_view separator) {
  std::string out;
  for (Cfm c : set) {
    if (!out.empty()) out.append(separator);
    out.append(cfm_code(c));
  }
  return out;
}

std::string PifCode::to_string() const {
  std::string out = prefix + std::to_string(major);
  if (minor) out += "." + std::to_string(*minor);
  return out;
}

std::optional<PifCode> try_parse_pif_code(std::string_view s) noexcept {
  try {
    s = text::trim(s);
    std::size_t i = 0;
    while (i < s.size() && s[i] >= 'A' && s[i] <= 'Z') ++i;
    if (i == 0) return std::nullopt;
    PifCode code;
    code.prefix = std::string(s.substr(0, i));
    auto parse_num = [&](std::uint32_t& out) -> bool {
      const char* first = s.data() + i;
      const char* last = s.data() + s.size();
      if (first == last || *first < '0' || *first > '9') return false;
      auto [ptr, ec] = std::from_chars(first, last, out);
      if (ec != std::errc{}) return false;
      i = static_cast<std::size_t>(ptr - s.data());
      return true;
    };
    if (!parse_num(code.major)) return std::nullopt;
    if (i < s.size()) {
      if (s[i] != '.') return std::nullopt;
      ++i;
      std::uint32_t minor = 0;
      if (!parse_num(minor)) return std::nullopt;
      code.minor = minor;
    }
    if (i != s.size()) return std::nullopt;
    return code;
  } catch (...) {
    return std::nullopt;
  }
}

PifCode parse_pif_code(std::string_view s) {
  auto code = try_parse_pif_code(s);
  if (!code) throw Error(ErrorCode::MalformedPifCode, "malformed PIF code '" + std::string(s) + "'");
  return *code;
}

double parse_error_rate(std::string_view s) {
  static const std::regex kGrammar(R"(^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?$)");
  const std::string t(text::trim(s));
  if (!std::regex_match(t, kGrammar)) {
    throw Error(ErrorCode::MalformedRate, "malformed error rate '" + t + "'");
  }
  std::string_view digits = t;
  if (digits.front() == '+') digits.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec == std::errc::result_out_of_range) {
    throw Error(ErrorCode::RateOutOfRange, "error rate '" + t + "' out of range (0, 1]");
  }
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw Error(ErrorCode::MalformedRate, "malformed error rate '" + t + "'");
  }
  if (!(value > 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::RateOutOfRange, "error rate '" + t + "' out of range (0, 1]");
  }
  return value;
}

std::string render_error_rate(double rate) {
  if (rate < 0.01) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1E", rate);
    const double rounded = std::strtod(buf, nullptr);
    if (rounded < 0.01) {
      std::string_view sci(buf);
      const auto e = sci.find('E');
      const int exponent = std::atoi(std::string(sci.substr(e + 1)).c_str());
      return std::string(sci.substr(0, e)) + "E" + std::to_string(exponent);
    }
    rate = rounded;
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, rate, std::chars_format::fixed);
  return std::string(buf, ptr);
}

std::string IdTableEntry::task_dimension_text() const {
  if (error_measure.empty()) return task;
  return task + " (" + error_measure + ")";
}

std::string IdTableEntry::other_pifs_dimension_text() const {
  if (uncertainty_note.empty()) return other_pifs;
  if (other_pifs.empty()) return "(" + uncertainty_note + ")";
  return other_pifs + " (" + uncertainty_note + ")";
}

std::vector<std::string> validate_entry(const IdTableEntry& e) {
  std::vector<std::string> out;
  if (text::trim(e.entry_id).empty()) out.emplace_back("entry_id empty");
  if (e.pif.prefix.empty() ||
      !std::all_of(e.pif.prefix.begin(), e.pif.prefix.end(), [](char c) { return c >= 'A' && c <= 'Z'; })) {
    out.emplace_back("pif prefix invalid");
  }
  if (e.cfms.empty()) out.emplace_back("cfms empty");
  if (!(e.error_rate > 0.0 && e.error_rate <= 1.0)) out.emplace_back("rate out of range");
  if (text::trim(e.task).empty()) out.emplace_back("task empty");
  if (text::trim(e.pif_measure).empty()) out.emplace_back("pif_measure empty");
  if (text::trim(e.reference_id).empty()) out.emplace_back("reference empty");
  return out;
}

// ---------------------------------------------------------------------------

namespace {
const std::vector<std::size_t> kNoPositions;

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.append(sep);
    out.append(v[i]);
  }
  return out;
}
}  // namespace

EntryStore::EntryStore(std::vector<IdTableEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (auto diags = validate_entry(e); !diags.empty()) {
      throw Error(ErrorCode::FieldError, "entry '" + e.entry_id + "': " + join(diags, "; "), e.entry_id);
    }
    if (!by_id_.emplace(e.entry_id, i).second) {
      throw Error(ErrorCode::DuplicateEntryId, "duplicate entry_id '" + e.entry_id + "'", e.entry_id);
    }
    by_table_[e.table].push_back(i);
    by_pif_[e.pif.to_string()].push_back(i);
    for (Cfm c : e.cfms) by_cfm_[c].push_back(i);
  }
}

const IdTableEntry* EntryStore::find(std::string_view entry_id) const {
  auto it = by_id_.find(entry_id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const std::vector<std::size_t>& EntryStore::by_table(TableId t) const {
  auto it = by_table_.find(t);
  return it == by_table_.end() ? kNoPositions : it->second;
}

const std::vector<std::size_t>& EntryStore::by_pif(std::string_view canonical_pif) const {
  auto it = by_pif_.find(canonical_pif);
  return it == by_pif_.end() ? kNoPositions : it->second;
}

const std::vector<std::size_t>& EntryStore::by_cfm(Cfm c) const {
  auto it = by_cfm_.find(c);
  return it == by_cfm_.end() ? kNoPositions : it->second;
}

std::vector<TableId> EntryStore::tables() const {
  std::vector<TableId> out;
  for (const auto& [t, _] : by_table_) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kColumns = 11;

[[noreturn]] void field_error(std::size_t row, std::string_view column, const std::string& why) {
  throw Error(ErrorCode::FieldError,
              "row " + std::to_string(row) + ", column " + std::string(column) + ": " + why,
              std::string(column));
}

IdTableEntry parse_row(const delimited::Record& rec, std::optional<TableId> expected) {
  const auto& f = rec.fields;
  IdTableEntry e;
  e.entry_id = f[0];
  if (e.entry_id.empty()) field_error(rec.row, "entry_id", "empty");

  auto table = parse_table_id(f[1]);
  if (!table) field_error(rec.row, "table", "unknown table '" + f[1] + "'");
  e.table = *table;
  if (expected && *expected != e.table) {
    throw Error(ErrorCode::TableMismatch,
                "row " + std::to_string(rec.row) + ": table " + std::string(table_code(e.table)) +
                    " does not match expected " + std::string(table_code(*expected)),
                e.entry_id);
  }

  auto pif = try_parse_pif_code(f[2]);
  if (!pif) field_error(rec.row, "pif", "malformed PIF code '" + f[2] + "'");
  e.pif = *pif;

  auto cfms = parse_cfm_set(f[3]);
  if (!cfms) field_error(rec.row, "cfms", "malformed CFM set '" + f[3] + "'");
  e.cfms = *cfms;

  try {
    e.error_rate = parse_error_rate(f[4]);
  } catch (const Error& err) {
    field_error(rec.row, "error_rate", err.what());
  }

  e.task = f[5];
  e.error_measure = f[6];
  e.pif_measure = f[7];
  e.other_pifs = f[8];
  e.uncertainty_note = f[9];
  e.reference_id = f[10];

  for (const auto& d : validate_entry(e)) field_error(rec.row, "entry", d);
  return e;
}

}  // namespace

EntryStore load_idtable(std::istream& source, std::optional<TableId> expected_table) {
  delimited::Reader reader(source);
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::FormatError, "row 1: missing header");
  if (join(header->fields, ",") != kIdTableHeader) {
    throw Error(ErrorCode::FormatError,
                "row " + std::to_string(header->row) + ": header must be exactly '" +
                    std::string(kIdTableHeader) + "'");
  }

  std::vector<IdTableEntry> entries;
  std::map<std::string, std::size_t, std::less<>> seen;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != kColumns) {
      throw Error(ErrorCode::FormatError, "row " + std::to_string(rec->row) + ": expected " +
                                              std::to_string(kColumns) + " fields, got " +
                                              std::to_string(rec->fields.size()));
    }
    IdTableEntry e = parse_row(*rec, expected_table);
    if (auto [it, inserted] = seen.emplace(e.entry_id, rec->row); !inserted) {
      throw Error(ErrorCode::DuplicateEntryId,
                  "row " + std::to_string(rec->row) + ": duplicate entry_id '" + e.entry_id +
                      "' (first seen at row " + std::to_string(it->second) + ")",
                  e.entry_id);
    }
    entries.push_back(std::move(e));
  }
  return EntryStore(std::move(entries));
}

EntryStore load_idtable_file(const std::filesystem::path& path, std::optional<TableId> expected_table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open " + path.string());
  try {
    return load_idtable(in, expected_table);
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.what(), e.subject());
  }
}

EntryStore load_idtable_dir(const std::filesystem::path& dir) {
  if (std::filesystem::is_regular_file(dir)) return load_idtable_file(dir);
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::FormatError, "data path does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& de : std::filesystem::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".csv") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::FormatError, "no IDTABLE files in " + dir.string());
  std::vector<IdTableEntry> all;
  for (const auto& f : files) {
    auto store = load_idtable_file(f);
    all.insert(all.end(), store.entries().begin(), store.entries().end());
  }
  return EntryStore(std::move(all));
}

void serialize_idtable(const EntryStore& store, std::ostream& out) {
  out << kIdTableHeader << '\n';
  auto free_text = [](const std::string& s) { return s.empty() ? std::string() : delimited::quote(s); };
  for (const auto& e : store.entries()) {
    delimited::write_row(out, {
                                  delimited::quote_if_needed(e.entry_id),
                                  std::string(table_code(e.table)),
                                  e.pif.to_string(),
                                  render_cfm_set(e.cfms),
                                  render_error_rate(e.error_rate),
                                  free_text(e.task),
                                  free_text(e.error_measure),
                                  free_text(e.pif_measure),
                                  free_text(e.other_pifs),
                                  free_text(e.uncertainty_note),
                                  delimited::quote_if_needed(e.reference_id),
                              });
  }
}

std::string serialize_idtable(const EntryStore& store) {
  std::ostringstream out;
  serialize_idtable(store, out);
  return out.str();
}

}  // namespace krail
