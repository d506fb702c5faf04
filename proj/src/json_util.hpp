#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "irdecide/error.hpp"

namespace irdecide::detail {

// JSON has no infinities; they travel as the strings "inf" / "-inf".
inline nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

inline double to_number(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InputError("expected a number, got `" + s + "`");
  }
  if (!j.is_number()) throw InputError("expected a number");
  return j.get<double>();
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace irdecide::detail
