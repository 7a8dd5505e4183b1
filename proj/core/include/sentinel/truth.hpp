#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sentinel {

// Ground truth row written by the scenario generator.
struct TruthVehicle {
  int vehicle_id = 0;
  std::string plate;
  double commanded_speed_kmh = 0.0;
  std::int64_t entry_frame = 0;
  std::int64_t exit_frame = 0;
  std::int64_t entry_timestamp_ms = 0;
  std::int64_t exit_timestamp_ms = 0;
  double lane_offset_m = 0.0;

  friend bool operator==(const TruthVehicle&, const TruthVehicle&) = default;
};

// Speed-gun measurement exported by the officer.
struct GunRecord {
  std::string serial;
  std::int64_t timestamp_ms = 0;
  double measured_distance_m = 0.0;
  double measured_speed_kmh = 0.0;
  int n_frames = 0;  // clip length, always below 8

  friend bool operator==(const GunRecord&, const GunRecord&) = default;
};

void write_truth(std::ostream& out, std::span<const TruthVehicle> rows);
std::vector<TruthVehicle> read_truth(std::istream& in);

void write_gun_records(std::ostream& out, std::span<const GunRecord> rows);
// Throws ParseError on bad numbers or a record violating the invariants.
std::vector<GunRecord> read_gun_records(std::istream& in);

enum class TruthKind { Synthetic, Gun };

// Sniffs the header line of a truth CSV.
TruthKind detect_truth_kind(const std::filesystem::path& path);

}  // namespace sentinel
