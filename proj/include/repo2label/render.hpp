#pragma once

#include <string>

#include "repo2label/merge.hpp"

namespace repo2label {

/// Canonical machine-readable JSON document. Fixed key order, 2-space
/// indent, trailing newline; identical labels render to identical bytes.
std::string render_machine(const RepositoryLabel& label);

/// Inverse of render_machine. Throws LabelParseError when the document does
/// not match the schema; render_machine(parse_machine(s)) == s for any s
/// this function accepts.
RepositoryLabel parse_machine(const std::string& json_text);

/// Self-contained HTML card view. Evidence lists are capped at
/// kHtmlEvidenceCap entries per field with a pointer to the machine output.
std::string render_html(const RepositoryLabel& label);

/// Summary tables, one per section.
std::string render_markdown(const RepositoryLabel& label);

inline constexpr std::size_t kHtmlEvidenceCap = 50;

std::string html_escape(std::string_view text);

/// Human rendering of a merged value: Yes/No, joined free text, or an
/// em dash when a free-text union is empty.
std::string display_value(const FieldValue& value);

} // namespace repo2label
