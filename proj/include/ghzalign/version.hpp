#pragma once

namespace ghzalign {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ghzalign
