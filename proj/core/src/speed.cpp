#include "sentinel/speed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sentinel/errors.hpp"

namespace sentinel {

Calibration::Calibration(Quad source, double target_width_m, double target_length_m, double fps,
                         double speed_limit_kmh, std::string camera_id, std::string location)
    : source_(source),
      width_(target_width_m),
      length_(target_length_m),
      fps_(fps),
      speed_limit_(speed_limit_kmh),
      camera_id_(std::move(camera_id)),
      location_(std::move(location)) {
  if (!(std::isfinite(fps_) && fps_ > 0.0)) throw ConfigError("fps must be positive");
  if (!(std::isfinite(width_) && width_ > 0.0 && std::isfinite(length_) && length_ > 0.0)) {
    throw ConfigError("target dimensions must be positive");
  }
  if (!(std::isfinite(speed_limit_) && speed_limit_ >= 0.0)) {
    throw ConfigError("speed limit must be non-negative");
  }
  h_ = estimate_homography(source_, target());
  h_inv_ = h_.inverse();
}

double Calibration::max_corner_residual() const {
  const Quad t = target();
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2 p = transform_point(h_, source_.corners[i]);
    worst = std::max(worst, std::hypot(p.x - t.corners[i].x, p.y - t.corners[i].y));
  }
  return worst;
}

AnchorHistory::AnchorHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("anchor history capacity must be positive");
}

PushOutcome AnchorHistory::push(std::int64_t frame, const BBox& box, const Calibration& cal,
                                double roi_margin) {
  if (!samples_.empty() && frame <= samples_.back().frame) {
    throw NonMonotonicFrame("anchor frame " + std::to_string(frame) +
                            " does not follow frame " + std::to_string(samples_.back().frame));
  }

  // Points behind the horizon project with the opposite sign of w'; they
  // must not wrap around into the rectangle.
  const Point2 anchor = anchor_of(box);
  const Eigen::Vector3d v = cal.homography().project(anchor);
  const Quad& src = cal.source();
  const Point2 centre{0.25 * (src.a().x + src.b().x + src.c().x + src.d().x),
                      0.25 * (src.a().y + src.b().y + src.c().y + src.d().y)};
  const double w_ref = cal.homography().project(centre).z();
  if (std::abs(v.z()) < 1e-12 || (v.z() > 0) != (w_ref > 0)) return PushOutcome::OutsideRoi;

  const Point2 p{v.x() / v.z(), v.y() / v.z()};
  const double mx = roi_margin * cal.target_width();
  const double my = roi_margin * cal.target_length();
  if (p.x < -mx || p.x > cal.target_width() + mx || p.y < -my ||
      p.y > cal.target_length() + my) {
    return PushOutcome::OutsideRoi;
  }

  samples_.push_back({frame, p});
  if (samples_.size() > capacity_) samples_.pop_front();
  return PushOutcome::Appended;
}

SpeedParams SpeedParams::for_fps(double fps) {
  SpeedParams p;
  p.window = static_cast<std::size_t>(std::max(2.0, std::round(fps)));
  p.min_samples = std::max<std::size_t>(2, p.window / 2);
  return p;
}

void validate(const SpeedParams& p) {
  if (p.min_samples < 2 || p.min_samples > p.window) {
    throw ConfigError("speed params need 2 <= min_samples <= window");
  }
}

std::optional<SpeedSample> instantaneous_speed(const AnchorHistory& h, const Calibration& cal,
                                               const SpeedParams& params) {
  if (h.size() < params.min_samples || h.size() < 2) return std::nullopt;
  const AnchorSample& first = h.samples().front();
  const AnchorSample& last = h.samples().back();
  const double dt = static_cast<double>(last.frame - first.frame) / cal.fps();
  const double dx = last.target.x - first.target.x;
  const double dy = last.target.y - first.target.y;
  const double dist = params.axis_only ? std::abs(dy) : std::hypot(dx, dy);
  return SpeedSample{last.frame, 3.6 * dist / dt};
}

const char* to_string(SpeedPolicy p) {
  switch (p) {
    case SpeedPolicy::Max: return "max";
    case SpeedPolicy::Mode: return "mode";
    case SpeedPolicy::Min: return "min";
    case SpeedPolicy::Median: return "median";
  }
  return "max";
}

SpeedPolicy parse_speed_policy(std::string_view s) {
  if (s == "max") return SpeedPolicy::Max;
  if (s == "mode") return SpeedPolicy::Mode;
  if (s == "min") return SpeedPolicy::Min;
  if (s == "median") return SpeedPolicy::Median;
  throw ConfigError("unknown speed policy '" + std::string(s) + "'");
}

double assign_speed(std::span<const SpeedSample> samples, SpeedPolicy policy) {
  if (samples.empty()) throw EmptySamples();
  auto by_speed = [](const SpeedSample& a, const SpeedSample& b) {
    return a.speed_kmh < b.speed_kmh;
  };
  switch (policy) {
    case SpeedPolicy::Max:
      return std::max_element(samples.begin(), samples.end(), by_speed)->speed_kmh;
    case SpeedPolicy::Min:
      return std::min_element(samples.begin(), samples.end(), by_speed)->speed_kmh;
    case SpeedPolicy::Mode: {
      std::map<double, std::size_t> counts;
      for (const auto& s : samples) ++counts[std::round(s.speed_kmh)];
      double best = 0.0;
      std::size_t best_count = 0;
      // Ascending keys with >= keeps the larger value on ties.
      for (const auto& [value, n] : counts) {
        if (n >= best_count) {
          best = value;
          best_count = n;
        }
      }
      return best;
    }
    case SpeedPolicy::Median: {
      std::vector<double> rounded;
      rounded.reserve(samples.size());
      for (const auto& s : samples) rounded.push_back(std::round(s.speed_kmh));
      std::sort(rounded.begin(), rounded.end());
      return rounded[rounded.size() / 2];
    }
  }
  return 0.0;
}

}  // namespace sentinel
