#include "sentinel/enforcement.hpp"

#include <array>
#include <cinttypes>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kRegistryColumns = {
    "plate", "owner_name", "phone", "email", "vehicle_details"};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

json owner_to_json(const RegistryEntry& e) {
  return {{"plate", e.plate},
          {"owner_name", e.owner_name},
          {"phone", e.phone},
          {"email", e.email},
          {"vehicle_details", e.vehicle_details}};
}

RegistryEntry owner_from_json(const json& j) {
  return {j.at("plate").get<std::string>(), j.at("owner_name").get<std::string>(),
          j.at("phone").get<std::string>(), j.at("email").get<std::string>(),
          j.at("vehicle_details").get<std::string>()};
}

}  // namespace

bool detect_violation(double speed_kmh, double speed_limit_kmh, double margin_kmh) {
  return speed_kmh > speed_limit_kmh + margin_kmh;
}

Registry::Registry(std::vector<RegistryEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.plate.empty()) throw ConfigError("registry entry with empty plate");
    if (e.phone.empty()) throw ConfigError("registry entry for " + e.plate + " has no phone");
    if (!index_.emplace(e.plate, i).second) {
      throw ConfigError("duplicate registry plate " + e.plate);
    }
  }
}

Registry Registry::read(std::istream& in) {
  csv::Table table(in, kRegistryColumns);
  std::array<std::size_t, 5> col{};
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = table.column(kRegistryColumns[i]);
  std::vector<RegistryEntry> entries;
  while (auto rec = table.next()) {
    entries.push_back({(*rec)[col[0]], (*rec)[col[1]], (*rec)[col[2]], (*rec)[col[3]],
                       (*rec)[col[4]]});
  }
  return Registry(std::move(entries));
}

Registry Registry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open registry " + path.string());
  return read(in);
}

void Registry::write(std::ostream& out) const {
  const std::vector<std::string> header(kRegistryColumns.begin(), kRegistryColumns.end());
  csv::write_record(out, header);
  for (const auto& e : entries_) {
    const std::vector<std::string> row{e.plate, e.owner_name, e.phone, e.email,
                                       e.vehicle_details};
    csv::write_record(out, row);
  }
}

void Registry::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write registry " + path.string());
  write(out);
}

std::optional<RegistryEntry> Registry::lookup(std::string_view plate) const {
  auto it = index_.find(plate);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second];
}

RegistryStore::RegistryStore(std::filesystem::path path)
    : path_(std::move(path)),
      current_(std::make_shared<const Registry>(Registry::load(path_))) {}

std::shared_ptr<const Registry> RegistryStore::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

void RegistryStore::reload() {
  auto fresh = std::make_shared<const Registry>(Registry::load(path_));
  std::lock_guard lock(mu_);
  current_ = std::move(fresh);
}

const char* to_string(DeliveryState s) {
  switch (s) {
    case DeliveryState::Pending: return "pending";
    case DeliveryState::Sent: return "sent";
    case DeliveryState::Failed: return "failed";
    case DeliveryState::Suppressed: return "suppressed";
  }
  return "pending";
}

DeliveryState parse_delivery_state(std::string_view s) {
  if (s == "pending") return DeliveryState::Pending;
  if (s == "sent") return DeliveryState::Sent;
  if (s == "failed") return DeliveryState::Failed;
  if (s == "suppressed") return DeliveryState::Suppressed;
  throw ParseError(0, "unknown delivery state '" + std::string(s) + "'");
}

std::string make_ticket_id(std::string_view plate, std::string_view camera_id,
                           std::int64_t timestamp_ms, std::int64_t cooldown_s) {
  if (cooldown_s <= 0) throw ConfigError("ticket cooldown must be positive");
  const std::int64_t bucket = floor_div(timestamp_ms, cooldown_s * 1000);
  const std::string key =
      fmt::format("{}\x1f{}\x1f{}", plate, camera_id, bucket);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("T{:016x}", h);
}

ViolationTicket TicketBook::make_ticket(const ViolationInput& in) {
  ViolationTicket t;
  t.ticket_id = make_ticket_id(in.plate, in.camera_id, in.timestamp_ms, params_.cooldown_s);
  t.plate = in.plate;
  t.track_id = in.track_id;
  t.estimated_speed_kmh = in.estimated_speed_kmh;
  t.speed_limit_kmh = in.speed_limit_kmh;
  t.policy = in.policy;
  t.camera_id = in.camera_id;
  t.location = in.location;
  t.timestamp_ms = in.timestamp_ms;
  t.owner = in.owner;

  if (seen(t.ticket_id)) {
    t.delivery_state = DeliveryState::Suppressed;
    t.detail = "duplicate within cooldown";
  } else if (!t.owner) {
    t.delivery_state = DeliveryState::Suppressed;
    t.detail = "plate not in registry";
    remember(t.ticket_id);
  } else {
    t.delivery_state = DeliveryState::Pending;
    remember(t.ticket_id);
  }
  return t;
}

std::string format_utc(std::int64_t epoch_ms) {
  const std::int64_t secs = floor_div(epoch_ms, 1000);
  const auto tt = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string render_ticket_message(const ViolationTicket& t) {
  auto render = [&](std::string_view location) {
    return fmt::format(
        "TRAFFIC TICKET {}: Vehicle {} recorded at {:.0f} km/h in a {:.0f} km/h zone at {}, {}. ",
        t.ticket_id, t.plate, t.estimated_speed_kmh, t.speed_limit_kmh, location,
        format_utc(t.timestamp_ms));
  };
  std::string msg = render(t.location);
  if (msg.size() > kMaxSmsChars) {
    const std::size_t over = msg.size() - kMaxSmsChars;
    const std::size_t keep = t.location.size() > over + 3 ? t.location.size() - over - 3 : 0;
    msg = render(t.location.substr(0, keep) + "...");
    if (msg.size() > kMaxSmsChars) msg.resize(kMaxSmsChars);
  }
  return msg;
}

std::string to_json_line(const ViolationTicket& t) {
  json j = {{"ticket_id", t.ticket_id},
            {"plate", t.plate},
            {"track_id", t.track_id},
            {"estimated_speed_kmh", t.estimated_speed_kmh},
            {"speed_limit_kmh", t.speed_limit_kmh},
            {"policy", t.policy},
            {"camera_id", t.camera_id},
            {"location", t.location},
            {"timestamp_ms", t.timestamp_ms},
            {"timestamp", format_utc(t.timestamp_ms)},
            {"owner", t.owner ? owner_to_json(*t.owner) : json(nullptr)},
            {"delivery_state", to_string(t.delivery_state)},
            {"message_id", t.message_id},
            {"detail", t.detail},
            {"attempts", t.attempts}};
  return j.dump();
}

ViolationTicket ticket_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    ViolationTicket t;
    t.ticket_id = j.at("ticket_id").get<std::string>();
    t.plate = j.at("plate").get<std::string>();
    t.track_id = j.at("track_id").get<TrackId>();
    t.estimated_speed_kmh = j.at("estimated_speed_kmh").get<double>();
    t.speed_limit_kmh = j.at("speed_limit_kmh").get<double>();
    t.policy = j.at("policy").get<std::string>();
    t.camera_id = j.at("camera_id").get<std::string>();
    t.location = j.at("location").get<std::string>();
    t.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    if (!j.at("owner").is_null()) t.owner = owner_from_json(j.at("owner"));
    t.delivery_state = parse_delivery_state(j.at("delivery_state").get<std::string>());
    t.message_id = j.value("message_id", "");
    t.detail = j.value("detail", "");
    t.attempts = j.value("attempts", 0);
    return t;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad ticket record: ") + e.what());
  }
}

void TicketLog::append(const ViolationTicket& t) {
  const std::string line = to_json_line(t) + "\n";
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw ConfigError("cannot append to ticket log " + path_.string());
  out << line;
  out.flush();
}

std::vector<ViolationTicket> TicketLog::read_all() const {
  std::lock_guard lock(mu_);
  std::vector<ViolationTicket> out;
  std::ifstream in(path_, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(ticket_from_json_line(line));
    } catch (const ParseError& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

std::vector<ViolationTicket> TicketLog::current() const {
  std::vector<ViolationTicket> latest;
  std::unordered_map<std::string, std::size_t> pos;
  for (auto& t : read_all()) {
    auto it = pos.find(t.ticket_id);
    if (it == pos.end()) {
      pos.emplace(t.ticket_id, latest.size());
      latest.push_back(std::move(t));
    } else if (t.delivery_state != DeliveryState::Suppressed ||
               latest[it->second].delivery_state == DeliveryState::Suppressed) {
      // A repeat that was suppressed never overrides the original record.
      latest[it->second] = std::move(t);
    }
  }
  return latest;
}

}  // namespace sentinel
