#include "recsim/csv.hpp"

#include "recsim/error.hpp"

namespace recsim::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row cur;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t line = 1;
  cur.line = 1;

  auto end_field = [&] {
    cur.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    if (row_has_content) {
      end_field();
      rows.push_back(std::move(cur));
    }
    cur = Row{};
    field.clear();
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        row_has_content = true;
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        cur.line = line;
        break;
      default:
        row_has_content = true;
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("csv", cur.line, "", "unterminated quoted field");
  end_row();
  return rows;
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(fields[i]);
  }
  return out;
}

}  // namespace recsim::csv
