#pragma once

#include <string>
#include <string_view>

namespace repo2label::hash {

/// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

/// Decode standard base64 (whitespace tolerated). Throws std::invalid_argument
/// on malformed input.
std::string base64_decode(std::string_view data);

} // namespace repo2label::hash
