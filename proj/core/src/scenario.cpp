#include "sentinel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "json_io.hpp"
#include "sentinel/config.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using detail::json;

namespace {

// Look-alike substitutions an OCR model plausibly makes.
char confuse(char c, std::mt19937_64& rng) {
  switch (c) {
    case '0': return 'O';
    case '1': return 'I';
    case '2': return 'Z';
    case '5': return 'S';
    case '8': return 'B';
    default: break;
  }
  if (c >= '0' && c <= '9') {
    std::uniform_int_distribution<int> d(1, 9);
    return static_cast<char>('0' + (c - '0' + d(rng)) % 10);
  }
  std::uniform_int_distribution<int> d(1, 25);
  return static_cast<char>('A' + (c - 'A' + d(rng)) % 26);
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  const auto& n = spec.noise;
  if (spec.duration_frames <= 0) throw SpecError("duration_frames must be positive");
  if (!(n.bbox_jitter_px >= 0.0)) throw SpecError("bbox jitter must be non-negative");
  if (!(n.drop_probability >= 0.0 && n.drop_probability < 1.0)) {
    throw SpecError("drop probability must be in [0, 1)");
  }
  if (!(n.score_min >= 0.0 && n.score_min <= n.score_max && n.score_max <= 1.0)) {
    throw SpecError("score range must satisfy 0 <= min <= max <= 1");
  }
  if (!(n.ocr_error_probability >= 0.0 && n.ocr_error_probability <= 1.0)) {
    throw SpecError("ocr error probability must be in [0, 1]");
  }
  if (!(spec.box.aspect > 0.0 && spec.box.plate_width > 0.0 && spec.box.plate_width <= 1.0 &&
        spec.box.plate_height > 0.0 && spec.box.plate_height <= 1.0)) {
    throw SpecError("box model fractions out of range");
  }
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    const auto& v = spec.vehicles[i];
    if (!(v.speed_kmh > 0.0 && std::isfinite(v.speed_kmh))) {
      throw SpecError(fmt::format("vehicle {} has non-positive speed", i));
    }
    if (v.entry_frame < 0) throw SpecError(fmt::format("vehicle {} has negative entry", i));
    if (v.lane_offset_m < 0.0 || v.lane_offset_m > spec.calibration.target_width()) {
      throw SpecError(fmt::format("vehicle {} lane offset is outside the road", i));
    }
  }
}

Scenario generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  validate(spec);
  const Calibration& cal = spec.calibration;
  const Homography& to_pixels = cal.inverse();
  const double fps = cal.fps();
  const auto& noise = spec.noise;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, noise.bbox_jitter_px > 0.0 ? noise.bbox_jitter_px
                                                                           : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scenario out;
  out.truth.resize(spec.vehicles.size());
  std::vector<bool> seen(spec.vehicles.size(), false);

  for (std::int64_t f = 0; f < spec.duration_frames; ++f) {
    FrameRecord rec;
    rec.frame_index = f;
    rec.timestamp_ms =
        spec.start_timestamp_ms + std::llround(static_cast<double>(f) * 1000.0 / fps);

    for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
      const auto& v = spec.vehicles[i];
      if (f < v.entry_frame) continue;
      const double y = static_cast<double>(f - v.entry_frame) * v.speed_kmh / 3.6 / fps;
      if (y > cal.target_length()) continue;

      auto& t = out.truth[i];
      if (!seen[i]) {
        seen[i] = true;
        t.vehicle_id = static_cast<int>(i) + 1;
        t.plate = v.plate;
        t.commanded_speed_kmh = v.speed_kmh;
        t.entry_frame = f;
        t.entry_timestamp_ms = rec.timestamp_ms;
        t.lane_offset_m = v.lane_offset_m;
      }
      t.exit_frame = f;
      t.exit_timestamp_ms = rec.timestamp_ms;

      const Point2 anchor = transform_point(to_pixels, {v.lane_offset_m, y});
      const double h = spec.box.h0 + spec.box.k * anchor.y;
      const double w = spec.box.aspect * h;
      BBox box{anchor.x - 0.5 * w, anchor.y - h, anchor.x + 0.5 * w, anchor.y};

      if (noise.bbox_jitter_px > 0.0) {
        box.x1 += jitter(rng);
        box.y1 += jitter(rng);
        box.x2 += jitter(rng);
        box.y2 += jitter(rng);
        if (box.x2 <= box.x1 + 1.0) box.x2 = box.x1 + 1.0;
        if (box.y2 <= box.y1 + 1.0) box.y2 = box.y1 + 1.0;
      }
      if (noise.drop_probability > 0.0 && unit(rng) < noise.drop_probability) continue;

      Detection d;
      d.cls = spec.vehicle_class;
      d.score = noise.score_min == noise.score_max
                    ? noise.score_min
                    : noise.score_min + (noise.score_max - noise.score_min) * unit(rng);
      d.bbox = box;

      if (!v.plate.empty()) {
        const double pw = spec.box.plate_width * box.width();
        const double ph = spec.box.plate_height * box.height();
        const double cx = 0.5 * (box.x1 + box.x2);
        const double bottom = box.y2 - 0.1 * box.height();
        PlatePayload p;
        p.bbox = {cx - 0.5 * pw, bottom - ph, cx + 0.5 * pw, bottom};
        p.text = v.plate;
        p.text_score = spec.box.plate_score;
        if (noise.ocr_error_probability > 0.0 && unit(rng) < noise.ocr_error_probability) {
          std::uniform_int_distribution<std::size_t> pos(0, p.text.size() - 1);
          auto& c = p.text[pos(rng)];
          c = confuse(c, rng);
        }
        d.plate = std::move(p);
      }
      rec.detections.push_back(std::move(d));
    }
    out.frames.push_back(std::move(rec));
  }

  // Vehicles that never entered within the duration keep their spec data.
  for (std::size_t i = 0; i < spec.vehicles.size(); ++i) {
    if (seen[i]) continue;
    auto& t = out.truth[i];
    t.vehicle_id = static_cast<int>(i) + 1;
    t.plate = spec.vehicles[i].plate;
    t.commanded_speed_kmh = spec.vehicles[i].speed_kmh;
    t.entry_frame = t.exit_frame = -1;
    t.lane_offset_m = spec.vehicles[i].lane_offset_m;
  }
  return out;
}

ScenarioSpec scenario_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const json& jc = j.at("calibration");
    ScenarioSpec spec{calibration_from_json(jc.dump()), {}, {}, {}, 0};
    spec.duration_frames = j.at("duration_frames").get<std::int64_t>();
    spec.start_timestamp_ms = j.value("start_timestamp_ms", spec.start_timestamp_ms);
    spec.vehicle_class = j.value("vehicle_class", spec.vehicle_class);
    if (auto it = j.find("noise"); it != j.end()) {
      auto& n = spec.noise;
      n.bbox_jitter_px = it->value("bbox_jitter_px", n.bbox_jitter_px);
      n.drop_probability = it->value("drop_probability", n.drop_probability);
      n.score_min = it->value("score_min", n.score_min);
      n.score_max = it->value("score_max", n.score_max);
      n.ocr_error_probability = it->value("ocr_error_probability", n.ocr_error_probability);
    }
    if (auto it = j.find("box_model"); it != j.end()) {
      auto& b = spec.box;
      b.h0 = it->value("h0", b.h0);
      b.k = it->value("k", b.k);
      b.aspect = it->value("aspect", b.aspect);
      b.plate_width = it->value("plate_width", b.plate_width);
      b.plate_height = it->value("plate_height", b.plate_height);
      b.plate_score = it->value("plate_score", b.plate_score);
    }
    for (const auto& jv : j.at("vehicles")) {
      ScenarioVehicle v;
      v.entry_frame = jv.at("entry_frame").get<std::int64_t>();
      v.speed_kmh = jv.at("speed_kmh").get<double>();
      v.lane_offset_m = jv.at("lane_offset_m").get<double>();
      v.plate = jv.value("plate", "");
      spec.vehicles.push_back(std::move(v));
    }
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw SpecError(std::string("scenario: ") + e.what());
  } catch (const ConfigError& e) {
    throw SpecError(std::string("scenario calibration: ") + e.what());
  } catch (const DegenerateQuad& e) {
    throw SpecError(std::string("scenario calibration: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json vehicles = json::array();
  for (const auto& v : spec.vehicles) {
    vehicles.push_back({{"entry_frame", v.entry_frame},
                        {"speed_kmh", v.speed_kmh},
                        {"lane_offset_m", v.lane_offset_m},
                        {"plate", v.plate}});
  }
  const auto& n = spec.noise;
  const auto& b = spec.box;
  json j = {{"calibration", json::parse(calibration_to_json(spec.calibration))},
            {"duration_frames", spec.duration_frames},
            {"start_timestamp_ms", spec.start_timestamp_ms},
            {"vehicle_class", spec.vehicle_class},
            {"noise",
             {{"bbox_jitter_px", n.bbox_jitter_px},
              {"drop_probability", n.drop_probability},
              {"score_min", n.score_min},
              {"score_max", n.score_max},
              {"ocr_error_probability", n.ocr_error_probability}}},
            {"box_model",
             {{"h0", b.h0},
              {"k", b.k},
              {"aspect", b.aspect},
              {"plate_width", b.plate_width},
              {"plate_height", b.plate_height},
              {"plate_score", b.plate_score}}},
            {"vehicles", vehicles}};
  return j.dump(2);
}

std::string synthetic_plate(std::size_t index) {
  const char series = static_cast<char>('A' + (index / 999) % 26);
  const char suffix = static_cast<char>('A' + index % 26);
  return fmt::format("UA{}{:03d}{}", series, index % 999 + 1, suffix);
}

ScenarioSpec make_traffic_scene(const Calibration& cal, std::size_t count, double min_kmh,
                                double max_kmh, std::uint64_t seed, int lanes) {
  if (lanes < 1) throw SpecError("lanes must be positive");
  if (!(min_kmh > 0.0 && min_kmh <= max_kmh)) throw SpecError("bad speed range");
  ScenarioSpec spec{cal, {}, {}, {}, 0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed(min_kmh, max_kmh);

  const double lane_width = cal.target_width() / lanes;
  const std::int64_t stagger = static_cast<std::int64_t>(std::ceil(cal.fps() * 0.6));
  std::vector<std::int64_t> lane_free(static_cast<std::size_t>(lanes), 0);
  std::int64_t next_entry = 0;
  std::int64_t last_exit = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto lane = static_cast<std::size_t>(i % static_cast<std::size_t>(lanes));
    ScenarioVehicle v;
    v.speed_kmh = std::round(speed(rng) * 10.0) / 10.0;
    v.lane_offset_m = (static_cast<double>(lane) + 0.5) * lane_width;
    v.plate = synthetic_plate(i);
    v.entry_frame = std::max(next_entry, lane_free[lane]);
    const auto crossing = static_cast<std::int64_t>(
        std::ceil(cal.target_length() / (v.speed_kmh / 3.6) * cal.fps()));
    lane_free[lane] = v.entry_frame + crossing + stagger;
    next_entry = v.entry_frame + stagger;
    last_exit = std::max(last_exit, v.entry_frame + crossing);
    spec.vehicles.push_back(std::move(v));
  }
  spec.duration_frames = last_exit + 2 * stagger;
  return spec;
}

Calibration demo_calibration(double speed_limit_kmh) {
  const Quad source{{Point2{660.0, 300.0}, Point2{1260.0, 300.0}, Point2{1660.0, 1000.0},
                     Point2{260.0, 1000.0}}};
  return Calibration(source, 14.0, 40.0, 25.0, speed_limit_kmh, "cam-demo",
                     "Demo Road, Kampala");
}

}  // namespace sentinel
