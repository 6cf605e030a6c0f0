#pragma once

namespace birkhoff {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace birkhoff
