#pragma once

namespace hadaq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hadaq
