#pragma once

namespace scoreforge {

inline constexpr const char* kScoreForgeVersion = "0.1.0";
inline constexpr int kKbSchemaVersion = 1;

}  // namespace scoreforge
