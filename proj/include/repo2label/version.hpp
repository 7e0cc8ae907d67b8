#pragma once

#include <string_view>

namespace repo2label {

inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace repo2label
