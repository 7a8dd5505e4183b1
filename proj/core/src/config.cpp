#include "sentinel/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/plate.hpp"

namespace sentinel {

using detail::json;

namespace {

std::string read_text(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + std::string(what) + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    std::string_view section) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(section));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

}  // namespace

std::string calibration_to_json(const Calibration& cal) {
  json src = json::array();
  for (const auto& p : cal.source().corners) src.push_back(detail::point_to_json(p));
  json h = json::array();
  for (int r = 0; r < 3; ++r) {
    h.push_back(json::array({cal.homography()(r, 0), cal.homography()(r, 1),
                             cal.homography()(r, 2)}));
  }
  json j = {{"camera_id", cal.camera_id()},
            {"location", cal.location()},
            {"fps", cal.fps()},
            {"speed_limit_kmh", cal.speed_limit_kmh()},
            {"source_px", src},
            {"target_m", {{"width", cal.target_width()}, {"length", cal.target_length()}}},
            {"homography", h}};
  return j.dump(2);
}

Calibration calibration_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
  try {
    const auto& src = j.at("source_px");
    if (!src.is_array() || src.size() != 4) {
      throw ConfigError("calibration source_px needs exactly four [x,y] points");
    }
    Quad q;
    for (std::size_t i = 0; i < 4; ++i) q.corners[i] = detail::point_from_json(src[i]);
    Calibration cal(q, j.at("target_m").at("width").get<double>(),
                    j.at("target_m").at("length").get<double>(), j.at("fps").get<double>(),
                    j.at("speed_limit_kmh").get<double>(), j.value("camera_id", "cam-0"),
                    j.value("location", ""));
    if (auto it = j.find("homography"); it != j.end() && !it->is_null()) {
      const Eigen::Matrix3d& h = cal.homography().matrix();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const double stored = it->at(r).at(c).get<double>();
          if (std::abs(stored - h(r, c)) > 1e-6 * std::max(1.0, std::abs(h(r, c)))) {
            throw ConfigError("stored homography does not match the source corners");
          }
        }
      }
    }
    return cal;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("calibration: ") + e.what());
  }
}

Calibration load_calibration(const std::filesystem::path& path) {
  return calibration_from_json(read_text(path, "calibration"));
}

void save_calibration(const std::filesystem::path& path, const Calibration& cal) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write calibration " + path.string());
  out << calibration_to_json(cal) << '\n';
}

SpeedParams EngineConfig::speed_params(double fps) const {
  SpeedParams p = SpeedParams::for_fps(fps);
  if (speed_window) p.window = speed_window;
  if (speed_min_samples) {
    p.min_samples = speed_min_samples;
  } else if (speed_window) {
    p.min_samples = std::max<std::size_t>(2, speed_window / 2);
  }
  p.axis_only = axis_only;
  validate(p);
  return p;
}

GatewayConfig EngineConfig::gateway_from_env() const {
  GatewayConfig g = GatewayConfig::from_env();
  g.attempts = gateway_attempts;
  g.retry_base = std::chrono::milliseconds(gateway_retry_base_ms);
  g.timeout = std::chrono::milliseconds(gateway_timeout_ms);
  return g;
}

EngineConfig engine_config_from_json(std::string_view text, const std::filesystem::path& base) {
  EngineConfig cfg;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"calibration", "registry", "output_dir", "tracker", "speed", "plate",
                    "enforcement", "gateway", "vehicle_classes"},
                   "config");
    cfg.calibration_path = resolve(base, j.at("calibration").get<std::string>());
    cfg.registry_path = resolve(base, j.value("registry", ""));
    cfg.output_dir = resolve(base, j.value("output_dir", "out"));
    cfg.vehicle_classes = j.value("vehicle_classes", std::vector<std::string>{});

    if (auto it = j.find("tracker"); it != j.end()) {
      reject_unknown(*it,
                     {"high_thresh", "low_thresh", "high_max_cost", "low_max_cost",
                      "tentative_max_cost", "min_hits", "track_buffer", "mode"},
                     "tracker");
      auto& t = cfg.tracker;
      t.high_thresh = it->value("high_thresh", t.high_thresh);
      t.low_thresh = it->value("low_thresh", t.low_thresh);
      t.high_max_cost = it->value("high_max_cost", t.high_max_cost);
      t.low_max_cost = it->value("low_max_cost", t.low_max_cost);
      t.tentative_max_cost = it->value("tentative_max_cost", t.tentative_max_cost);
      t.min_hits = it->value("min_hits", t.min_hits);
      t.track_buffer = it->value("track_buffer", t.track_buffer);
      const std::string mode = it->value("mode", "bytetrack");
      if (mode != "bytetrack" && mode != "sort") {
        throw ConfigError("tracker mode must be bytetrack or sort");
      }
      t.sort_mode = mode == "sort";
    }
    validate(cfg.tracker);

    if (auto it = j.find("speed"); it != j.end()) {
      reject_unknown(*it, {"window", "min_samples", "policy", "axis_only", "roi_margin"},
                     "speed");
      cfg.speed_window = it->value("window", cfg.speed_window);
      cfg.speed_min_samples = it->value("min_samples", cfg.speed_min_samples);
      cfg.policy = parse_speed_policy(it->value("policy", "max"));
      cfg.axis_only = it->value("axis_only", cfg.axis_only);
      cfg.roi_margin = it->value("roi_margin", cfg.roi_margin);
      if (!(cfg.roi_margin >= 0.0 && cfg.roi_margin <= 0.5)) {
        throw ConfigError("roi_margin must be in [0, 0.5]");
      }
    }

    if (auto it = j.find("plate"); it != j.end()) {
      reject_unknown(*it, {"grammar", "alphabet"}, "plate");
      cfg.plate_pattern = it->value("grammar", cfg.plate_pattern);
      cfg.plate_alphabet = it->value("alphabet", cfg.plate_alphabet);
    }
    PlateGrammar check(cfg.plate_pattern, cfg.plate_alphabet);

    if (auto it = j.find("enforcement"); it != j.end()) {
      reject_unknown(*it, {"margin_kmh", "cooldown_s"}, "enforcement");
      cfg.enforcement.margin_kmh = it->value("margin_kmh", cfg.enforcement.margin_kmh);
      cfg.enforcement.cooldown_s = it->value("cooldown_s", cfg.enforcement.cooldown_s);
      if (!(cfg.enforcement.margin_kmh >= 0.0)) throw ConfigError("margin_kmh must be >= 0");
      if (cfg.enforcement.cooldown_s <= 0) throw ConfigError("cooldown_s must be positive");
    }

    if (auto it = j.find("gateway"); it != j.end()) {
      reject_unknown(*it, {"attempts", "retry_base_ms", "timeout_ms"}, "gateway");
      cfg.gateway_attempts = it->value("attempts", cfg.gateway_attempts);
      cfg.gateway_retry_base_ms = it->value("retry_base_ms", cfg.gateway_retry_base_ms);
      cfg.gateway_timeout_ms = it->value("timeout_ms", cfg.gateway_timeout_ms);
      if (cfg.gateway_attempts < 1 || cfg.gateway_retry_base_ms < 0 ||
          cfg.gateway_timeout_ms <= 0) {
        throw ConfigError("gateway settings out of range");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  EngineConfig cfg = engine_config_from_json(read_text(path, "config"), path.parent_path());
  if (!std::filesystem::exists(cfg.calibration_path)) {
    throw ConfigError("calibration file not found: " + cfg.calibration_path.string());
  }
  if (!cfg.registry_path.empty() && !std::filesystem::exists(cfg.registry_path)) {
    throw ConfigError("registry file not found: " + cfg.registry_path.string());
  }
  return cfg;
}

std::string engine_config_to_json(const EngineConfig& cfg) {
  const auto& t = cfg.tracker;
  json j = {
      {"calibration", cfg.calibration_path.string()},
      {"registry", cfg.registry_path.string()},
      {"output_dir", cfg.output_dir.string()},
      {"vehicle_classes", cfg.vehicle_classes},
      {"tracker",
       {{"high_thresh", t.high_thresh},
        {"low_thresh", t.low_thresh},
        {"high_max_cost", t.high_max_cost},
        {"low_max_cost", t.low_max_cost},
        {"tentative_max_cost", t.tentative_max_cost},
        {"min_hits", t.min_hits},
        {"track_buffer", t.track_buffer},
        {"mode", t.sort_mode ? "sort" : "bytetrack"}}},
      {"speed",
       {{"window", cfg.speed_window},
        {"min_samples", cfg.speed_min_samples},
        {"policy", to_string(cfg.policy)},
        {"axis_only", cfg.axis_only},
        {"roi_margin", cfg.roi_margin}}},
      {"plate", {{"grammar", cfg.plate_pattern}, {"alphabet", cfg.plate_alphabet}}},
      {"enforcement",
       {{"margin_kmh", cfg.enforcement.margin_kmh}, {"cooldown_s", cfg.enforcement.cooldown_s}}},
      {"gateway",
       {{"attempts", cfg.gateway_attempts},
        {"retry_base_ms", cfg.gateway_retry_base_ms},
        {"timeout_ms", cfg.gateway_timeout_ms}}}};
  return j.dump(2);
}

}  // namespace sentinel
