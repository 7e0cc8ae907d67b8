#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repo2label::text {

/// Decode bytes as UTF-8, replacing every invalid sequence with U+FFFD.
/// Never fails; the result is always valid UTF-8.
std::string lossy_utf8(std::string_view bytes);

/// True if the content looks like binary data (NUL byte within the first
/// 8 KiB, the same sniff git uses).
bool looks_binary(std::string_view bytes);

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

/// Split on '\n'; a trailing newline does not produce an empty tail line.
std::vector<std::string_view> split_lines(std::string_view s);

std::vector<std::string> split(std::string_view s, std::string_view sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapse every run of spaces/tabs into a single space.
std::string collapse_spaces_tabs(std::string_view s);

/// Collapse all internal whitespace (spaces, tabs, newlines) to single
/// spaces and trim; used for value matching in the eval harness.
std::string collapse_ws(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Case-insensitive ASCII equality.
bool iequals(std::string_view a, std::string_view b);

} // namespace repo2label::text
