#include "krail/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "krail/error.hpp"

namespace krail {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedPifCode: return "MalformedPifCode";
    case ErrorCode::MalformedRate: return "MalformedRate";
    case ErrorCode::RateOutOfRange: return "RateOutOfRange";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::FieldError: return "FieldError";
    case ErrorCode::DuplicateEntryId: return "DuplicateEntryId";
    case ErrorCode::TableMismatch: return "TableMismatch";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::ProviderRefusal: return "ProviderRefusal";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::EmptySection: return "EmptySection";
    case ErrorCode::MissingDimension: return "MissingDimension";
    case ErrorCode::NoValidCandidate: return "NoValidCandidate";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::InvalidCase: return "InvalidCase";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::MalformedEdit: return "MalformedEdit";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_word(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> token_set(std::string_view s) {
  auto tokens = word_tokens(s);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::string normalize_newlines(std::string_view s) {
  std::string unified;
  unified.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r') {
      unified.push_back('\n');
      if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
    } else {
      unified.push_back(s[i]);
    }
  }
  std::string out;
  out.reserve(unified.size());
  std::size_t start = 0;
  while (start <= unified.size()) {
    std::size_t end = unified.find('\n', start);
    if (end == std::string::npos) end = unified.size();
    std::string_view line(unified.data() + start, end - start);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);
    out.append(line);
    if (end == unified.size()) break;
    out.push_back('\n');
    start = end + 1;
  }
  while (!out.empty() && is_space(out.back())) out.pop_back();
  return out;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    std::string_view line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

}  // namespace text
}  // namespace krail
