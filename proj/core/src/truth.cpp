#include "sentinel/truth.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

constexpr std::array<std::string_view, 8> kTruthColumns = {
    "vehicle_id",         "plate",         "commanded_speed_kmh", "entry_frame",
    "exit_frame",         "entry_timestamp_ms", "exit_timestamp_ms", "lane_offset_m"};

constexpr std::array<std::string_view, 5> kGunColumns = {
    "serial", "timestamp_ms", "measured_distance_m", "measured_speed_kmh", "n_frames"};

template <typename T>
T parse_number(const std::string& s, std::size_t line, std::string_view column) {
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "column " + std::string(column) + ": not a number '" + s + "'");
  }
  return value;
}

}  // namespace

void write_truth(std::ostream& out, std::span<const TruthVehicle> rows) {
  const std::vector<std::string> header(kTruthColumns.begin(), kTruthColumns.end());
  csv::write_record(out, header);
  for (const auto& r : rows) {
    const std::vector<std::string> rec{
        std::to_string(r.vehicle_id),      r.plate,
        fmt::format("{}", r.commanded_speed_kmh), std::to_string(r.entry_frame),
        std::to_string(r.exit_frame),      std::to_string(r.entry_timestamp_ms),
        std::to_string(r.exit_timestamp_ms), fmt::format("{}", r.lane_offset_m)};
    csv::write_record(out, rec);
  }
}

std::vector<TruthVehicle> read_truth(std::istream& in) {
  csv::Table t(in, kTruthColumns);
  std::array<std::size_t, kTruthColumns.size()> c{};
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = t.column(kTruthColumns[i]);
  std::vector<TruthVehicle> rows;
  while (auto rec = t.next()) {
    const auto& r = *rec;
    const std::size_t ln = t.line();
    TruthVehicle v;
    v.vehicle_id = parse_number<int>(r[c[0]], ln, kTruthColumns[0]);
    v.plate = r[c[1]];
    v.commanded_speed_kmh = parse_number<double>(r[c[2]], ln, kTruthColumns[2]);
    v.entry_frame = parse_number<std::int64_t>(r[c[3]], ln, kTruthColumns[3]);
    v.exit_frame = parse_number<std::int64_t>(r[c[4]], ln, kTruthColumns[4]);
    v.entry_timestamp_ms = parse_number<std::int64_t>(r[c[5]], ln, kTruthColumns[5]);
    v.exit_timestamp_ms = parse_number<std::int64_t>(r[c[6]], ln, kTruthColumns[6]);
    v.lane_offset_m = parse_number<double>(r[c[7]], ln, kTruthColumns[7]);
    rows.push_back(std::move(v));
  }
  return rows;
}

void write_gun_records(std::ostream& out, std::span<const GunRecord> rows) {
  const std::vector<std::string> header(kGunColumns.begin(), kGunColumns.end());
  csv::write_record(out, header);
  for (const auto& r : rows) {
    const std::vector<std::string> rec{r.serial, std::to_string(r.timestamp_ms),
                                       fmt::format("{}", r.measured_distance_m),
                                       fmt::format("{}", r.measured_speed_kmh),
                                       std::to_string(r.n_frames)};
    csv::write_record(out, rec);
  }
}

std::vector<GunRecord> read_gun_records(std::istream& in) {
  csv::Table t(in, kGunColumns);
  std::array<std::size_t, kGunColumns.size()> c{};
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = t.column(kGunColumns[i]);
  std::vector<GunRecord> rows;
  while (auto rec = t.next()) {
    const auto& r = *rec;
    const std::size_t ln = t.line();
    GunRecord g;
    g.serial = r[c[0]];
    g.timestamp_ms = parse_number<std::int64_t>(r[c[1]], ln, kGunColumns[1]);
    g.measured_distance_m = parse_number<double>(r[c[2]], ln, kGunColumns[2]);
    g.measured_speed_kmh = parse_number<double>(r[c[3]], ln, kGunColumns[3]);
    g.n_frames = parse_number<int>(r[c[4]], ln, kGunColumns[4]);
    if (g.measured_speed_kmh < 0.0) throw ParseError(ln, "measured speed is negative");
    if (g.n_frames < 0 || g.n_frames >= 8) throw ParseError(ln, "n_frames must be in [0, 8)");
    rows.push_back(std::move(g));
  }
  return rows;
}

TruthKind detect_truth_kind(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open truth file " + path.string());
  std::size_t line = 0;
  auto header = csv::read_record(in, line);
  if (!header) throw ParseError(1, "missing header line");
  for (const auto& h : *header) {
    if (h == "vehicle_id") return TruthKind::Synthetic;
    if (h == "serial") return TruthKind::Gun;
  }
  throw ParseError(1, "header matches neither a synthetic truth table nor a gun export");
}

}  // namespace sentinel
