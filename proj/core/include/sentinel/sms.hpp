#pragma once

#include <chrono>
#include <functional>
#include <string>

#include "sentinel/enforcement.hpp"

namespace sentinel {

// Connection settings for a messaging gateway speaking the Africa's Talking
// bulk SMS wire format: POST {base_url}{path}, form fields username, to,
// message; headers apiKey and Accept: application/json.
struct GatewayConfig {
  std::string base_url;
  std::string username;
  std::string api_key;
  std::string path = "/version1/messaging";
  int attempts = 3;
  std::chrono::milliseconds retry_base{1000};
  std::chrono::milliseconds timeout{5000};

  // Reads SENTINEL_SMS_URL, SENTINEL_SMS_USER and SENTINEL_SMS_KEY. Throws
  // ConfigError when the URL is unset.
  static GatewayConfig from_env();
};

struct SmsRequest {
  std::string phone;
  std::string message;
  std::string idempotency_key;
};

struct SmsResult {
  std::string message_id;
  std::string status;
  std::string cost;
  int attempts = 0;
};

// Stateless per call; safe to share across threads.
class SmsClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit SmsClient(GatewayConfig config, Sleeper sleeper = {});

  // Retries transport errors and 5xx answers with exponential backoff
  // (retry_base, 2x, 4x, ...) reusing the idempotency key. Throws
  // GatewayRejected when the gateway refuses the message (4xx or a
  // per-recipient status other than Success; never retried) and
  // TransportFailed once the attempts are exhausted.
  SmsResult send(const SmsRequest& req) const;

  const GatewayConfig& config() const { return config_; }

 private:
  GatewayConfig config_;
  Sleeper sleep_;
};

// Sends a Pending or Failed ticket to its owner's phone and records the
// outcome on the ticket. Suppressed and Sent tickets are left untouched and
// nothing is transmitted. Returns true when the ticket ends up Sent.
bool deliver(ViolationTicket& ticket, const SmsClient& client);

}  // namespace sentinel
