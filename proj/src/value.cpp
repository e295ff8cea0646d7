#include "scoreforge/value.hpp"

#include <cmath>
#include <cstdio>

#include "scoreforge/errors.hpp"

namespace scoreforge {

std::string format_number(double v) {
  double r = std::round(v);
  if (std::fabs(v - r) < 1e-9 && std::fabs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(r));
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string value_key(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<double>(v)) return format_number(std::get<double>(v));
  return std::get<std::string>(v);
}

bool value_is_number(const Value& v) { return std::holds_alternative<double>(v); }

double value_number(const Value& v) {
  if (!value_is_number(v)) throw SchemaError("expected a numeric value");
  return std::get<double>(v);
}

nlohmann::json value_to_json(const Value& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw SchemaError("value must be a string, number, or boolean");
}

}  // namespace scoreforge
