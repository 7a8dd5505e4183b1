#pragma once

// JSON helpers shared by the core translation units; not installed.

#include <string>

#include <json.hpp>

#include "sentinel/errors.hpp"
#include "sentinel/geometry.hpp"

namespace sentinel::detail {

using nlohmann::json;

inline json bbox_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

inline BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("bbox must be [x1,y1,x2,y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json point_to_json(const Point2& p) { return json::array({p.x, p.y}); }

inline Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("point must be [x,y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace sentinel::detail
