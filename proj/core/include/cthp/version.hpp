#pragma once

namespace cthp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cthp
