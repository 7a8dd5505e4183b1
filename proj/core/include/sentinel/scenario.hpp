#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/speed.hpp"
#include "sentinel/stream.hpp"
#include "sentinel/truth.hpp"

namespace sentinel {

struct ScenarioVehicle {
  std::int64_t entry_frame = 0;
  double speed_kmh = 0.0;
  double lane_offset_m = 0.0;  // x position inside the target rectangle
  std::string plate;
};

struct ScenarioNoise {
  double bbox_jitter_px = 0.0;  // Gaussian sigma per box coordinate
  double drop_probability = 0.0;
  double score_min = 0.9;
  double score_max = 0.9;
  double ocr_error_probability = 0.0;  // chance a plate read has one confused character
};

// Box height grows linearly with the anchor's image row: h = h0 + k * y.
struct BoxModel {
  double h0 = 27.0;
  double k = 0.122;
  double aspect = 1.2;         // width / height
  double plate_width = 0.30;   // fractions of the vehicle box
  double plate_height = 0.12;
  double plate_score = 0.95;
};

struct ScenarioSpec {
  Calibration calibration;
  std::vector<ScenarioVehicle> vehicles;
  ScenarioNoise noise;
  BoxModel box;
  std::int64_t duration_frames = 0;
  std::int64_t start_timestamp_ms = 1717200000000;  // 2024-06-01T00:00:00Z
  std::string vehicle_class = "car";
};

// Throws SpecError on non-positive speeds, a drop probability outside
// [0, 1), an inverted score range, or lanes outside the rectangle.
void validate(const ScenarioSpec& spec);

struct Scenario {
  std::vector<FrameRecord> frames;
  std::vector<TruthVehicle> truth;
};

// Each vehicle's metric anchor starts on the far edge (y = 0) at its entry
// frame and advances speed / 3.6 / fps meters per frame until it passes the
// near edge. Anchors are mapped back to pixels through the inverse
// homography; noise is then applied. Deterministic for a given seed.
Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed);

// JSON scenario description; see docs in the README.
ScenarioSpec scenario_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioSpec& spec);

// Plate text for the i-th synthetic vehicle under the default LLLDDDL
// grammar, e.g. "UAA001A".
std::string synthetic_plate(std::size_t index);

// Builds a multi-lane scene of `count` vehicles with speeds drawn uniformly
// from [min_kmh, max_kmh]. Entries are staggered so that no two vehicles
// ever share a lane at the same time.
ScenarioSpec make_traffic_scene(const Calibration& cal, std::size_t count, double min_kmh,
                                double max_kmh, std::uint64_t seed, int lanes = 4);

// Road calibration used by demos, tests and benchmarks: a 1920x1080 view of
// a 14 m wide, 40 m long stretch at 25 fps.
Calibration demo_calibration(double speed_limit_kmh = 50.0);

}  // namespace sentinel
