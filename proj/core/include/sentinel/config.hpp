#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/enforcement.hpp"
#include "sentinel/sms.hpp"
#include "sentinel/speed.hpp"
#include "sentinel/tracker.hpp"

namespace sentinel {

// Calibration file:
//   {"camera_id": ..., "location": ..., "fps": 25, "speed_limit_kmh": 50,
//    "source_px": [[ax,ay],[bx,by],[cx,cy],[dx,dy]],
//    "target_m": {"width": 14, "length": 60},
//    "homography": [[...],[...],[...]]}
std::string calibration_to_json(const Calibration& cal);
// The homography is re-solved from the corners; a stored matrix that
// disagrees beyond 1e-6 relative is rejected with ConfigError.
Calibration calibration_from_json(std::string_view text);
Calibration load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const Calibration& cal);

struct EngineConfig {
  std::filesystem::path calibration_path;
  std::filesystem::path registry_path;  // empty: no owner lookup
  std::filesystem::path output_dir = "out";
  TrackerParams tracker;
  // Window and min_samples default from the calibration fps when unset.
  std::size_t speed_window = 0;
  std::size_t speed_min_samples = 0;
  bool axis_only = false;
  SpeedPolicy policy = SpeedPolicy::Max;
  double roi_margin = 0.05;
  std::vector<std::string> vehicle_classes;  // empty: accept every class
  std::string plate_pattern = "LLLDDDL";
  std::string plate_alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  EnforcementParams enforcement;
  int gateway_attempts = 3;
  int gateway_retry_base_ms = 1000;
  int gateway_timeout_ms = 5000;

  SpeedParams speed_params(double fps) const;
  // Gateway URL and secrets always come from the environment.
  GatewayConfig gateway_from_env() const;
};

// Relative paths resolve against the config file's directory. Throws
// ConfigError for unknown keys, out-of-range values, or missing files.
EngineConfig load_engine_config(const std::filesystem::path& path);
EngineConfig engine_config_from_json(std::string_view text,
                                     const std::filesystem::path& base_dir = {});
std::string engine_config_to_json(const EngineConfig& cfg);

}  // namespace sentinel
