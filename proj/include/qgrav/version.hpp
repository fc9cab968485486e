#pragma once

namespace qgrav {

inline constexpr const char* kToolVersion = "qgrav 0.1.0";

}  // namespace qgrav
