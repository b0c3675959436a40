#include "hqc/csv.hpp"

#include "hqc/error.hpp"

namespace hqc::csv {

std::optional<Record> Reader::next() {
  Record rec;
  rec.line = line_;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any = false;

  for (int ch = in_.get(); ch != EOF; ch = in_.get()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw ParseError(line_, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        rec.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        [[fallthrough]];
      case '\n':
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      default:
        if (field_was_quoted) {
          throw ParseError(line_, "characters after closing quote");
        }
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError(rec.line, "unterminated quoted field");
  if (!any) return std::nullopt;
  rec.fields.push_back(std::move(field));
  return rec;
}

std::vector<Record> read_all(std::istream& in) {
  Reader reader(in);
  std::vector<Record> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

std::string quote(std::string_view field) {
  if (!needs_quoting(field)) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += quote(fields[i]);
  }
  return line;
}

}  // namespace hqc::csv
