#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/tracker.hpp"

namespace sentinel {

// Strictly above limit + margin.
bool detect_violation(double speed_kmh, double speed_limit_kmh, double margin_kmh);

struct RegistryEntry {
  std::string plate;
  std::string owner_name;
  std::string phone;
  std::string email;
  std::string vehicle_details;

  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
};

// Vehicle-owner table keyed by normalized plate, persisted as CSV with the
// header plate,owner_name,phone,email,vehicle_details.
class Registry {
 public:
  Registry() = default;
  // Throws ConfigError on a duplicate plate or empty phone.
  explicit Registry(std::vector<RegistryEntry> entries);

  // Throws ParseError / ConfigError.
  static Registry read(std::istream& in);
  static Registry load(const std::filesystem::path& path);

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  // Exact match on the normalized plate.
  std::optional<RegistryEntry> lookup(std::string_view plate) const;

  const std::vector<RegistryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<RegistryEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Registry file handle whose contents can be reloaded while readers hold
// the previous snapshot.
class RegistryStore {
 public:
  explicit RegistryStore(std::filesystem::path path);

  std::shared_ptr<const Registry> snapshot() const;
  void reload();

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::shared_ptr<const Registry> current_;
};

enum class DeliveryState { Pending, Sent, Failed, Suppressed };

const char* to_string(DeliveryState s);
DeliveryState parse_delivery_state(std::string_view s);

struct EnforcementParams {
  double margin_kmh = 10.0;
  std::int64_t cooldown_s = 600;
};

struct ViolationTicket {
  std::string ticket_id;
  std::string plate;
  TrackId track_id = kNoTrack;
  double estimated_speed_kmh = 0.0;
  double speed_limit_kmh = 0.0;
  std::string policy;
  std::string camera_id;
  std::string location;
  std::int64_t timestamp_ms = 0;  // UTC epoch
  std::optional<RegistryEntry> owner;
  DeliveryState delivery_state = DeliveryState::Pending;
  std::string message_id;
  std::string detail;
  int attempts = 0;

  friend bool operator==(const ViolationTicket&, const ViolationTicket&) = default;
};

struct ViolationInput {
  std::string plate;
  TrackId track_id = kNoTrack;
  double estimated_speed_kmh = 0.0;
  double speed_limit_kmh = 0.0;
  std::string policy;
  std::string camera_id;
  std::string location;
  std::int64_t timestamp_ms = 0;
  std::optional<RegistryEntry> owner;
};

// "T" followed by the 16 hex digits of FNV-1a over plate, camera and
// cooldown bucket. Floor division keeps pre-epoch times in their bucket.
std::string make_ticket_id(std::string_view plate, std::string_view camera_id,
                           std::int64_t timestamp_ms, std::int64_t cooldown_s);

// Issues tickets and remembers ids so repeats inside a cooldown bucket come
// back Suppressed. Tickets for plates without a registry owner are also
// Suppressed, but still returned for the audit log.
class TicketBook {
 public:
  explicit TicketBook(EnforcementParams params = {}) : params_(params) {}

  ViolationTicket make_ticket(const ViolationInput& in);

  void remember(const std::string& ticket_id) { issued_.insert(ticket_id); }
  bool seen(const std::string& ticket_id) const { return issued_.contains(ticket_id); }

 private:
  EnforcementParams params_;
  std::set<std::string> issued_;
};

// "2024-06-01T00:00:00Z" style UTC rendering of epoch milliseconds.
std::string format_utc(std::int64_t epoch_ms);

// SMS body for a ticket, cut to 459 characters by shortening the location.
std::string render_ticket_message(const ViolationTicket& t);

inline constexpr std::size_t kMaxSmsChars = 459;

std::string to_json_line(const ViolationTicket& t);
// Throws ParseError (line 0) on malformed input.
ViolationTicket ticket_from_json_line(std::string_view line);

// Append-only ticket record file. Every state change is a new line; the
// last line for an id is its current state.
class TicketLog {
 public:
  explicit TicketLog(std::filesystem::path path) : path_(std::move(path)) {}

  // Thread-safe.
  void append(const ViolationTicket& t);

  std::vector<ViolationTicket> read_all() const;
  // Latest record per ticket id, in order of first appearance.
  std::vector<ViolationTicket> current() const;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
};

}  // namespace sentinel
