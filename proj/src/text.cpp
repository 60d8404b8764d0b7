#include "cnas/text.hpp"

#include <charconv>
#include <cstdlib>
#include <system_error>

namespace cnas {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double_strict(const std::string& token,
                           const std::string& context) {
  double v = 0.0;
  const char* first = token.c_str();
  const char* last = first + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError(context + ": bad numeric value '" + token + "'");
  return v;
}

long long parse_int_strict(const std::string& token,
                           const std::string& context) {
  long long v = 0;
  const char* first = token.c_str();
  const char* last = first + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ParseError(context + ": bad integer '" + token + "'");
  return v;
}

std::string csv_quote(const std::string& field) {
  std::string out;
  out.reserve(field.size() + 2);
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& context) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw ParseError(context + ": unterminated quote in '" + line + "'");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace cnas
