#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/enforcement.hpp"
#include "sentinel/plate.hpp"
#include "sentinel/speed.hpp"

namespace sentinel {

// Everything the engine knows about one finished track.
struct TrackReport {
  TrackId track_id = kNoTrack;
  std::string cls;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;
  std::int64_t first_timestamp_ms = 0;
  std::int64_t last_timestamp_ms = 0;
  std::size_t detections = 0;
  std::optional<PlateIdentity> plate;
  std::vector<SpeedSample> samples;
  std::optional<double> assigned_speed_kmh;  // present iff samples non-empty
  std::string policy;
  bool violation = false;
  std::optional<std::string> ticket_id;
  std::optional<RegistryEntry> owner;
};

std::string to_json_line(const TrackReport& r);
TrackReport report_from_json_line(std::string_view line, std::size_t line_no = 0);

std::vector<TrackReport> read_reports(const std::filesystem::path& path);

}  // namespace sentinel
