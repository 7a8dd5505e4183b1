#include "sentinel/sms.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

struct Attempt {
  enum class Kind { Ok, Retryable, Rejected } kind;
  SmsResult result;
  std::string why;
};

Attempt parse_response(const httplib::Result& res) {
  if (!res) {
    return {Attempt::Kind::Retryable, {}, "transport: " + httplib::to_string(res.error())};
  }
  if (res->status >= 500) {
    return {Attempt::Kind::Retryable, {}, "HTTP " + std::to_string(res->status)};
  }
  if (res->status >= 400) {
    return {Attempt::Kind::Rejected, {}, "HTTP " + std::to_string(res->status)};
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    const auto& recipients = body.at("SMSMessageData").at("Recipients");
    if (!recipients.is_array() || recipients.empty()) {
      const std::string msg = body.at("SMSMessageData").value("Message", "no recipients");
      return {Attempt::Kind::Rejected, {}, msg};
    }
    const auto& r = recipients.front();
    SmsResult out;
    out.status = r.value("status", "");
    out.message_id = r.value("messageId", "");
    out.cost = r.value("cost", "");
    if (out.status != "Success") return {Attempt::Kind::Rejected, out, out.status};
    return {Attempt::Kind::Ok, out, {}};
  } catch (const nlohmann::json::exception&) {
    return {Attempt::Kind::Rejected, {}, "malformed gateway response"};
  }
}

}  // namespace

GatewayConfig GatewayConfig::from_env() {
  GatewayConfig c;
  c.base_url = env_or_empty("SENTINEL_SMS_URL");
  c.username = env_or_empty("SENTINEL_SMS_USER");
  c.api_key = env_or_empty("SENTINEL_SMS_KEY");
  if (c.base_url.empty()) throw ConfigError("SENTINEL_SMS_URL is not set");
  return c;
}

SmsClient::SmsClient(GatewayConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (config_.base_url.empty()) throw ConfigError("gateway base URL is empty");
  if (config_.attempts < 1) throw ConfigError("gateway attempts must be at least 1");
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

SmsResult SmsClient::send(const SmsRequest& req) const {
  if (req.phone.empty()) throw GatewayRejected("empty recipient");
  if (req.message.empty() || req.message.size() > kMaxSmsChars) {
    throw GatewayRejected("message length out of range");
  }

  httplib::Headers headers = {{"apiKey", config_.api_key},
                              {"Accept", "application/json"},
                              {"Idempotency-Key", req.idempotency_key}};
  httplib::Params form = {
      {"username", config_.username}, {"to", req.phone}, {"message", req.message}};

  std::string last_error;
  for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
    httplib::Client cli(config_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());

    Attempt a = parse_response(cli.Post(config_.path, headers, form));
    if (a.kind == Attempt::Kind::Ok) {
      a.result.attempts = attempt;
      return a.result;
    }
    if (a.kind == Attempt::Kind::Rejected) throw GatewayRejected(a.why);
    last_error = a.why;
    if (attempt < config_.attempts) sleep_(config_.retry_base * (1 << (attempt - 1)));
  }
  throw TransportFailed("gave up after " + std::to_string(config_.attempts) +
                        " attempts: " + last_error);
}

bool deliver(ViolationTicket& ticket, const SmsClient& client) {
  if (ticket.delivery_state == DeliveryState::Suppressed ||
      ticket.delivery_state == DeliveryState::Sent) {
    return ticket.delivery_state == DeliveryState::Sent;
  }
  if (!ticket.owner) {
    ticket.delivery_state = DeliveryState::Suppressed;
    ticket.detail = "plate not in registry";
    return false;
  }
  SmsRequest req{ticket.owner->phone, render_ticket_message(ticket), ticket.ticket_id};
  try {
    const SmsResult r = client.send(req);
    ticket.delivery_state = DeliveryState::Sent;
    ticket.message_id = r.message_id;
    ticket.detail = r.status;
    ticket.attempts += r.attempts;
    return true;
  } catch (const GatewayRejected& e) {
    ticket.delivery_state = DeliveryState::Failed;
    ticket.detail = e.status();
    ticket.attempts += 1;
  } catch (const TransportFailed& e) {
    ticket.delivery_state = DeliveryState::Failed;
    ticket.detail = e.what();
    ticket.attempts += client.config().attempts;
  }
  return false;
}

}  // namespace sentinel
