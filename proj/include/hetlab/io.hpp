#pragma once

#include <string>

#include "json.hpp"

#include "hetlab/common.hpp"

namespace hetlab {

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string fmt17(double x);

nlohmann::json to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hetlab
