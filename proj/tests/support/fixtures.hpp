#pragma once

#include <vector>

#include "sentinel/detection.hpp"
#include "sentinel/scenario.hpp"

namespace sentinel::testing {

// Two equal boxes travelling in opposite directions on rows 30 px apart.
// While they overlap horizontally the detector confidence dips to 0.3,
// below the high threshold. Detection 0 is always the left-to-right box.
struct CrossingFrame {
  std::vector<Detection> detections;
  bool dipped = false;
};

inline std::vector<CrossingFrame> crossing_fixture() {
  std::vector<CrossingFrame> frames;
  const double size = 60.0;
  for (int f = 0; f < 60; ++f) {
    const double xa = 100.0 + 6.0 * f;
    const double xb = 454.0 - 6.0 * f;
    CrossingFrame cf;
    cf.dipped = std::abs(xa - xb) < size;
    const double score = cf.dipped ? 0.3 : 0.9;
    cf.detections.push_back({"car", score, {xa, 100.0, xa + size, 100.0 + size}, std::nullopt});
    cf.detections.push_back({"car", score, {xb, 130.0, xb + size, 130.0 + size}, std::nullopt});
    frames.push_back(std::move(cf));
  }
  return frames;
}

inline ScenarioSpec noiseless(ScenarioSpec spec) {
  spec.noise = ScenarioNoise{};
  return spec;
}

}  // namespace sentinel::testing
