#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sentinel/geometry.hpp"

namespace sentinel {

// Pixel quad of the surveilled road stretch paired with its metric
// rectangle (0,0)-(width, length), plus the camera metadata enforcement
// needs.
class Calibration {
 public:
  // Solves the homography; throws DegenerateQuad or ConfigError.
  Calibration(Quad source, double target_width_m, double target_length_m, double fps,
              double speed_limit_kmh, std::string camera_id = "cam-0",
              std::string location = "");

  const Quad& source() const { return source_; }
  Quad target() const { return make_rectangle(width_, length_); }
  double target_width() const { return width_; }
  double target_length() const { return length_; }
  double fps() const { return fps_; }
  double speed_limit_kmh() const { return speed_limit_; }
  const std::string& camera_id() const { return camera_id_; }
  const std::string& location() const { return location_; }
  const Homography& homography() const { return h_; }
  const Homography& inverse() const { return h_inv_; }

  // Largest distance between a mapped source corner and its target corner.
  double max_corner_residual() const;

 private:
  Quad source_;
  double width_;
  double length_;
  double fps_;
  double speed_limit_;
  std::string camera_id_;
  std::string location_;
  Homography h_;
  Homography h_inv_;
};

struct AnchorSample {
  std::int64_t frame = 0;
  Point2 target;  // meters
};

enum class PushOutcome { Appended, OutsideRoi };

// Bounded double-ended queue of metric anchor positions for one track.
class AnchorHistory {
 public:
  explicit AnchorHistory(std::size_t capacity);

  // Projects the box anchor into target space and appends it unless it
  // falls outside the target rectangle grown by `roi_margin` of each
  // dimension. Throws NonMonotonicFrame when frame does not exceed the last
  // stored frame.
  PushOutcome push(std::int64_t frame, const BBox& box, const Calibration& cal,
                   double roi_margin = 0.05);

  const std::deque<AnchorSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return samples_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<AnchorSample> samples_;
};

struct SpeedSample {
  std::int64_t frame = 0;
  double speed_kmh = 0.0;

  friend bool operator==(const SpeedSample&, const SpeedSample&) = default;
};

struct SpeedParams {
  std::size_t window = 25;
  std::size_t min_samples = 12;
  // Use |dy| only instead of the Euclidean displacement.
  bool axis_only = false;

  // window = round(fps), min_samples = max(2, window / 2).
  static SpeedParams for_fps(double fps);
};

// Throws ConfigError unless 2 <= min_samples <= window.
void validate(const SpeedParams& p);

// Endpoint displacement of the window divided by its elapsed time, in km/h.
// nullopt until min_samples anchors are stored.
std::optional<SpeedSample> instantaneous_speed(const AnchorHistory& h, const Calibration& cal,
                                               const SpeedParams& params);

enum class SpeedPolicy { Max, Mode, Min, Median };

const char* to_string(SpeedPolicy p);
// Accepts max|mode|min|median; throws ConfigError otherwise.
SpeedPolicy parse_speed_policy(std::string_view s);

// Reduces a track's samples to one speed. Mode and Median work on values
// rounded to whole km/h and break ties toward the larger value. Throws
// EmptySamples.
double assign_speed(std::span<const SpeedSample> samples, SpeedPolicy policy);

}  // namespace sentinel
