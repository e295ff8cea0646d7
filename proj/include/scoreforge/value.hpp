#pragma once

#include <string>
#include <variant>

#include "json.hpp"

namespace scoreforge {

// A typed property value: enumerated symbol, number, or boolean.
using Value = std::variant<bool, double, std::string>;

// Canonical text for a numeric value: integral numbers print without a
// fractional part so fact keys and rendered text stay stable.
std::string format_number(double v);

// Stable text form used in fact keys and dataset records.
std::string value_key(const Value& v);

bool value_is_number(const Value& v);
double value_number(const Value& v);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

}  // namespace scoreforge
