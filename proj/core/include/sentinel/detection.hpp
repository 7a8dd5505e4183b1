#pragma once

#include <optional>
#include <string>

#include "sentinel/geometry.hpp"

namespace sentinel {

// Plate box and recognized text attached to a vehicle detection by the
// upstream detector/OCR wrapper.
struct PlatePayload {
  BBox bbox;
  std::string text;
  double text_score = 0.0;

  friend bool operator==(const PlatePayload&, const PlatePayload&) = default;
};

struct Detection {
  std::string cls;
  double score = 0.0;
  BBox bbox;
  std::optional<PlatePayload> plate;

  friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace sentinel
