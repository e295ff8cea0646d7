#pragma once

#include <optional>
#include <set>
#include <string>

namespace scoreforge {

// Rule-based answer extraction. Scans for the last bracketed span, half-width
// [] or full-width 【】, whose interior consists solely of option letters,
// separators, and optional per-letter echoes of the option text ("A: mess
// tin"). Returns the letter set, or nothing when no such span exists. Never
// throws; arbitrary byte input is fine.
std::optional<std::set<char>> extract_answer(const std::string& response);

}  // namespace scoreforge
