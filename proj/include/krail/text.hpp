#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace krail::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// Lowercased alphanumeric word tokens in order of appearance; every other
/// character acts as a separator.
std::vector<std::string> word_tokens(std::string_view s);

/// Sorted, de-duplicated word tokens. Used for Jaccard similarity.
std::vector<std::string> token_set(std::string_view s);

/// |a ∩ b| / |a ∪ b| over sorted unique token vectors; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// CRLF and lone CR become LF; trailing whitespace is removed from every line
/// and from the end of the text.
std::string normalize_newlines(std::string_view s);

std::uint64_t fnv1a64(std::string_view s) noexcept;
std::string hex64(std::uint64_t v);
inline std::string digest(std::string_view s) { return hex64(fnv1a64(s)); }

std::vector<std::string> split_lines(std::string_view s);

}  // namespace krail::text
