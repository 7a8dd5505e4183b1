#include "sentinel/report.hpp"

#include <fstream>

#include "json_io.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using detail::json;

std::string to_json_line(const TrackReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back(json::array({s.frame, s.speed_kmh}));
  json plate = nullptr;
  if (r.plate) {
    plate = {{"text", r.plate->text},
             {"confidence", r.plate->confidence},
             {"votes", r.plate->votes}};
  }
  json owner = nullptr;
  if (r.owner) {
    owner = {{"plate", r.owner->plate},
             {"owner_name", r.owner->owner_name},
             {"phone", r.owner->phone},
             {"email", r.owner->email},
             {"vehicle_details", r.owner->vehicle_details}};
  }
  json j = {{"track_id", r.track_id},
            {"class", r.cls},
            {"first_frame", r.first_frame},
            {"last_frame", r.last_frame},
            {"first_timestamp_ms", r.first_timestamp_ms},
            {"last_timestamp_ms", r.last_timestamp_ms},
            {"detections", r.detections},
            {"plate", plate},
            {"samples", samples},
            {"assigned_speed_kmh",
             r.assigned_speed_kmh ? json(*r.assigned_speed_kmh) : json(nullptr)},
            {"policy", r.policy},
            {"violation", r.violation},
            {"ticket_id", r.ticket_id ? json(*r.ticket_id) : json(nullptr)},
            {"owner", owner}};
  return j.dump();
}

TrackReport report_from_json_line(std::string_view line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    TrackReport r;
    r.track_id = j.at("track_id").get<TrackId>();
    r.cls = j.at("class").get<std::string>();
    r.first_frame = j.at("first_frame").get<std::int64_t>();
    r.last_frame = j.at("last_frame").get<std::int64_t>();
    r.first_timestamp_ms = j.at("first_timestamp_ms").get<std::int64_t>();
    r.last_timestamp_ms = j.at("last_timestamp_ms").get<std::int64_t>();
    r.detections = j.value("detections", std::size_t{0});
    if (const auto& p = j.at("plate"); !p.is_null()) {
      r.plate = PlateIdentity{p.at("text").get<std::string>(), p.at("confidence").get<double>(),
                              p.at("votes").get<std::size_t>()};
    }
    for (const auto& s : j.at("samples")) {
      r.samples.push_back({s.at(0).get<std::int64_t>(), s.at(1).get<double>()});
    }
    if (const auto& a = j.at("assigned_speed_kmh"); !a.is_null()) {
      r.assigned_speed_kmh = a.get<double>();
    }
    r.policy = j.value("policy", "");
    r.violation = j.value("violation", false);
    if (auto it = j.find("ticket_id"); it != j.end() && !it->is_null()) {
      r.ticket_id = it->get<std::string>();
    }
    if (auto it = j.find("owner"); it != j.end() && !it->is_null()) {
      r.owner = RegistryEntry{it->at("plate").get<std::string>(),
                              it->at("owner_name").get<std::string>(),
                              it->at("phone").get<std::string>(),
                              it->at("email").get<std::string>(),
                              it->at("vehicle_details").get<std::string>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad track report: ") + e.what());
  }
}

std::vector<TrackReport> read_reports(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open reports " + path.string());
  std::vector<TrackReport> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(report_from_json_line(line, n));
  }
  return out;
}

}  // namespace sentinel
