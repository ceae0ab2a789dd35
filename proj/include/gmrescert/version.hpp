#pragma once

namespace gmrescert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gmrescert
