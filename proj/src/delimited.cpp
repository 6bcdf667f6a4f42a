#include "krail/delimited.hpp"

#include "krail/error.hpp"
#include "krail/text.hpp"

namespace krail::delimited {

Reader::Reader(std::istream& in) : in_(in) {}

std::optional<Record> Reader::next() {
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (!bom_checked_) {
      bom_checked_ = true;
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!text::trim(line).empty()) break;
  }

  Record rec;
  rec.row = line_;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool after_quote = false;
  std::size_t i = 0;

  auto finish_field = [&] {
    if (quoted) {
      rec.fields.push_back(std::move(field));
    } else {
      rec.fields.emplace_back(text::trim(field));
    }
    field.clear();
    quoted = false;
    after_quote = false;
  };

  while (true) {
    if (i >= line.size()) {
      if (in_quotes) {
        std::string more;
        if (!std::getline(in_, more)) {
          throw Error(ErrorCode::FormatError,
                      "row " + std::to_string(rec.row) + ": unterminated quoted field");
        }
        ++line_;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      finish_field();
      break;
    }
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == ',') {
      finish_field();
    } else if (after_quote) {
      if (c != ' ' && c != '\t') {
        throw Error(ErrorCode::FormatError,
                    "row " + std::to_string(rec.row) + ": unexpected character after closing quote");
      }
    } else if (c == '"' && text::trim(field).empty()) {
      field.clear();
      quoted = true;
      in_quotes = true;
    } else {
      field.push_back(c);
    }
    ++i;
  }
  return rec;
}

std::vector<Record> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Record> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

std::string quote(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string quote_if_needed(std::string_view value) {
  const bool needs = value.find_first_of(",\"\n\r") != std::string_view::npos ||
                     (!value.empty() && (text::trim(value).size() != value.size()));
  return needs ? quote(value) : std::string(value);
}

void write_row(std::ostream& out, const std::vector<std::string>& rendered_fields) {
  for (std::size_t i = 0; i < rendered_fields.size(); ++i) {
    if (i) out << ',';
    out << rendered_fields[i];
  }
  out << '\n';
}

}  // namespace krail::delimited
