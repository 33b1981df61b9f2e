#pragma once

namespace cadeval {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cadeval
