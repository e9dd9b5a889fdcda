#pragma once

namespace topictraj {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace topictraj
