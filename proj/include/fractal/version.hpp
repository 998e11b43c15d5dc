#pragma once

namespace fractal {

inline constexpr const char* kToolName = "fractal";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace fractal
