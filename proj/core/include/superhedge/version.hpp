#pragma once

namespace superhedge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace superhedge
