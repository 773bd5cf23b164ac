#pragma once

#include <string_view>

namespace ddident {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace ddident
