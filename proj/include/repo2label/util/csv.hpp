#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repo2label::csv {

/// RFC 4180-style parse: quoted fields with "" escapes, \r\n or \n row ends.
/// Throws repo2label::FormatError (with the 1-based row number) on unbalanced
/// quotes or stray characters after a closing quote.
std::vector<std::vector<std::string>> parse(std::string_view content);

/// Quote a single field for CSV output when needed.
std::string quote(std::string_view field);

std::string write_row(const std::vector<std::string>& fields);

} // namespace repo2label::csv
