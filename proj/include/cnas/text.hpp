#pragma once

#include <string>
#include <vector>

#include "cnas/errors.hpp"

namespace cnas {

// Shortest decimal string that parses back to the same double. Used for all
// CSV output so emitted bytes are a pure function of the values.
std::string format_double(double v);

// Strict full-token double parse; ParseError names the context on failure.
double parse_double_strict(const std::string& token, const std::string& context);

long long parse_int_strict(const std::string& token, const std::string& context);

// RFC-4180-style quoting; always applied to fields that may contain commas.
std::string csv_quote(const std::string& field);

// Splits one CSV line honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& context);

}  // namespace cnas
