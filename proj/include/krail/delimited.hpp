#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace krail::delimited {

struct Record {
  std::size_t row = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// Comma-delimited reader. Quoted fields may contain commas, newlines and
/// doubled quotes; unquoted fields are whitespace-trimmed. A UTF-8 BOM and
/// blank lines are skipped. Throws Error(FormatError) on an unterminated quote
/// or stray characters after a closing quote.
class Reader {
 public:
  explicit Reader(std::istream& in);

  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  bool bom_checked_ = false;
};

std::vector<Record> read_all(std::istream& in);

/// Quote `value` with doubled inner quotes.
std::string quote(std::string_view value);

/// Quote only when the value contains a delimiter, quote, newline or
/// leading/trailing whitespace.
std::string quote_if_needed(std::string_view value);

void write_row(std::ostream& out, const std::vector<std::string>& rendered_fields);

}  // namespace krail::delimited
