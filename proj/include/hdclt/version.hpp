#pragma once

namespace hdclt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hdclt
