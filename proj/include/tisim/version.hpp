#pragma once

namespace tisim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tisim
