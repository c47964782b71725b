#pragma once

namespace periodic {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace periodic
