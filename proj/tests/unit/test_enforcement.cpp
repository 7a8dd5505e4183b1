#include <doctest.h>

#include <chrono>
#include <set>
#include <sstream>
#include <thread>

#include "mock_gateway.hpp"
#include "sentinel/enforcement.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/plate.hpp"
#include "sentinel/sms.hpp"
#include "temp_dir.hpp"

using namespace sentinel;
using sentinel::testing::MockGateway;
using sentinel::testing::TempDir;
using namespace std::chrono_literals;

namespace {

const RegistryEntry kUserA{"ABC123A", "User A", "+256700000001", "user.a@example.org",
                           "Toyota Premio, silver"};

Registry sample_registry() {
  return Registry({kUserA, {"UAA002B", "Grace, \"G\" Namukasa", "+256700000002", "", "Honda Fit\nblue"}});
}

ViolationInput violation(std::string plate, std::int64_t ts_ms) {
  ViolationInput in;
  in.plate = std::move(plate);
  in.track_id = 4;
  in.estimated_speed_kmh = 72.4;
  in.speed_limit_kmh = 50.0;
  in.policy = "max";
  in.camera_id = "cam-demo";
  in.location = "Demo Road, Kampala";
  in.timestamp_ms = ts_ms;
  in.owner = kUserA;
  return in;
}

GatewayConfig gateway(const std::string& url) {
  GatewayConfig g;
  g.base_url = url;
  g.username = "sandbox";
  g.api_key = "test-key";
  g.timeout = 2000ms;
  return g;
}

struct SleepLog {
  std::vector<std::chrono::milliseconds> calls;
  SmsClient::Sleeper fn() {
    return [this](std::chrono::milliseconds d) { calls.push_back(d); };
  }
};

}  // namespace

TEST_CASE("violation boundary is strict") {
  CHECK_FALSE(detect_violation(49, 50, 0));
  CHECK(detect_violation(61, 50, 10));
  CHECK_FALSE(detect_violation(60, 50, 10));
  CHECK(detect_violation(50.001, 50, 0));
}

TEST_CASE("registry lookup") {
  const Registry r = sample_registry();
  CHECK(r.lookup("ABC123A") == kUserA);
  CHECK_FALSE(r.lookup("XYZ999Z"));
  const auto norm = normalize_plate("abc123a", PlateGrammar{});
  CHECK(r.lookup(*norm.text) == kUserA);
  CHECK_THROWS_AS(Registry({kUserA, kUserA}), ConfigError);
  CHECK_THROWS_AS(Registry({{"ABC123B", "x", "", "", ""}}), ConfigError);
}

TEST_CASE("registry round trip keeps every field") {
  const Registry r = sample_registry();
  std::stringstream ss;
  r.write(ss);
  const Registry back = Registry::read(ss);
  CHECK(back.entries() == r.entries());

  TempDir dir;
  r.save(dir / "registry.csv");
  CHECK(Registry::load(dir / "registry.csv").entries() == r.entries());
}

TEST_CASE("registry parsing errors") {
  std::stringstream missing("plate,owner_name,phone\nABC123A,A,1\n");
  CHECK_THROWS_AS(Registry::read(missing), ParseError);
  std::stringstream ragged("plate,owner_name,phone,email,vehicle_details\nABC123A,A\n");
  CHECK_THROWS_AS(Registry::read(ragged), ParseError);
  std::stringstream reordered(
      "phone,plate,vehicle_details,email,owner_name\r\n+256700000001,ABC123A,Car,,User A\r\n");
  CHECK(Registry::read(reordered).lookup("ABC123A")->owner_name == "User A");
}

TEST_CASE("registry store swaps snapshots") {
  TempDir dir;
  Registry({kUserA}).save(dir / "r.csv");
  RegistryStore store(dir / "r.csv");
  const auto before = store.snapshot();
  sample_registry().save(dir / "r.csv");
  store.reload();
  CHECK(before->size() == 1);
  CHECK(store.snapshot()->size() == 2);
}

TEST_CASE("ticket ids") {
  // FNV-1a 64 over "ABC123A\x1f" "cam-demo\x1f" "2862000", computed offline.
  CHECK(make_ticket_id("ABC123A", "cam-demo", 1717200000000, 600) == "T53a90b4923121c25");
  CHECK(make_ticket_id("ABC123A", "cam-demo", -1, 600) == "Tb3bcf11f310670e7");

  const std::int64_t t0 = 1717200000000;
  CHECK(make_ticket_id("ABC123A", "cam-demo", t0, 600) ==
        make_ticket_id("ABC123A", "cam-demo", t0 + 3 * 60'000, 600));
  CHECK(make_ticket_id("ABC123A", "cam-demo", t0, 600) !=
        make_ticket_id("ABC123A", "cam-demo", t0 + 15 * 60'000, 600));
  CHECK(make_ticket_id("ABC123A", "cam-demo", t0, 600) !=
        make_ticket_id("ABC123B", "cam-demo", t0, 600));
  CHECK(make_ticket_id("ABC123A", "cam-demo", t0, 600) !=
        make_ticket_id("ABC123A", "cam-2", t0, 600));
  CHECK_THROWS_AS(make_ticket_id("ABC123A", "cam-demo", t0, 0), ConfigError);
}

TEST_CASE("ticket book suppresses repeats and unknown owners") {
  TicketBook book;
  const std::int64_t t0 = 1717200000000;
  const auto first = book.make_ticket(violation("ABC123A", t0));
  CHECK(first.delivery_state == DeliveryState::Pending);
  const auto again = book.make_ticket(violation("ABC123A", t0 + 3 * 60'000));
  CHECK(again.ticket_id == first.ticket_id);
  CHECK(again.delivery_state == DeliveryState::Suppressed);
  const auto later = book.make_ticket(violation("ABC123A", t0 + 15 * 60'000));
  CHECK(later.delivery_state == DeliveryState::Pending);

  auto stranger = violation("XYZ999Z", t0);
  stranger.owner.reset();
  const auto s = book.make_ticket(stranger);
  CHECK(s.delivery_state == DeliveryState::Suppressed);
  CHECK(s.detail == "plate not in registry");

  TicketBook fresh;
  CHECK(fresh.make_ticket(violation("ABC123A", t0)) == first);
}

TEST_CASE("message rendering") {
  TicketBook book;
  auto t = book.make_ticket(violation("ABC123A", 1717200000000));
  CHECK(format_utc(1717200000000) == "2024-06-01T00:00:00Z");
  CHECK(format_utc(-1) == "1969-12-31T23:59:59Z");
  CHECK(render_ticket_message(t) ==
        "TRAFFIC TICKET T53a90b4923121c25: Vehicle ABC123A recorded at 72 km/h in a 50 km/h zone "
        "at Demo Road, Kampala, 2024-06-01T00:00:00Z. ");
  t.location = std::string(1000, 'x');
  const std::string long_msg = render_ticket_message(t);
  CHECK(long_msg.size() <= kMaxSmsChars);
  CHECK(long_msg.find("...") != std::string::npos);
  CHECK(long_msg.ends_with("2024-06-01T00:00:00Z. "));
}

TEST_CASE("ticket json round trip") {
  TicketBook book;
  auto t = book.make_ticket(violation("ABC123A", 1717200000000));
  t.message_id = "ATXid_1";
  t.attempts = 2;
  CHECK(ticket_from_json_line(to_json_line(t)) == t);
  t.owner.reset();
  t.delivery_state = DeliveryState::Suppressed;
  CHECK(ticket_from_json_line(to_json_line(t)) == t);
  CHECK_THROWS_AS(ticket_from_json_line("{not json"), ParseError);
  for (auto s : {DeliveryState::Pending, DeliveryState::Sent, DeliveryState::Failed, DeliveryState::Suppressed}) {
    CHECK(parse_delivery_state(to_string(s)) == s);
  }
}

TEST_CASE("ticket log keeps the latest state per id") {
  TempDir dir;
  TicketLog log(dir / "tickets.jsonl");
  CHECK(log.current().empty());
  TicketBook book;
  auto a = book.make_ticket(violation("ABC123A", 1717200000000));
  auto b = book.make_ticket(violation("UAA002B", 1717200000000));
  log.append(a);
  log.append(b);
  a.delivery_state = DeliveryState::Sent;
  log.append(a);
  // A later duplicate must not mask the delivered original.
  auto dup = a;
  dup.delivery_state = DeliveryState::Suppressed;
  dup.detail = "duplicate within cooldown";
  log.append(dup);

  CHECK(log.read_all().size() == 4);
  const auto cur = log.current();
  REQUIRE(cur.size() == 2);
  CHECK(cur[0].ticket_id == a.ticket_id);
  CHECK(cur[0].delivery_state == DeliveryState::Sent);
  CHECK(cur[1].delivery_state == DeliveryState::Pending);
}

TEST_CASE("concurrent appends produce whole lines") {
  TempDir dir;
  TicketLog log(dir / "tickets.jsonl");
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&log, t] {
      for (int i = 0; i < 50; ++i) {
        auto in = violation("ABC123A", 1717200000000 + static_cast<std::int64_t>(t * 50 + i) * 700'000);
        ViolationTicket tk = TicketBook{}.make_ticket(in);
        log.append(tk);
      }
    });
  }
  for (auto& th : threads) th.join();
  const auto all = log.read_all();
  CHECK(all.size() == 400);
  std::set<std::string> ids;
  for (const auto& t : all) ids.insert(t.ticket_id);
  CHECK(ids.size() == 400);
}

TEST_SUITE("sms") {
  TEST_CASE("happy path speaks the gateway wire format") {
    MockGateway gw;
    const SmsClient client(gateway(gw.base_url()));
    const auto r = client.send({"+256700000001", "hello", "T1"});
    CHECK(r.status == "Success");
    CHECK(r.message_id == "ATXid_1");
    CHECK(r.attempts == 1);
    const auto reqs = gw.requests();
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].path == "/version1/messaging");
    CHECK(reqs[0].headers.at("apiKey") == "test-key");
    CHECK(reqs[0].headers.at("Accept") == "application/json");
    CHECK(reqs[0].headers.at("Idempotency-Key") == "T1");
    CHECK(reqs[0].form.at("username") == "sandbox");
    CHECK(reqs[0].form.at("to") == "+256700000001");
    CHECK(reqs[0].form.at("message") == "hello");
  }

  TEST_CASE("server errors are retried with backoff and the same key") {
    MockGateway gw;
    gw.fail_next(2, 500);
    SleepLog sleeps;
    const SmsClient client(gateway(gw.base_url()), sleeps.fn());
    const auto r = client.send({"+256700000001", "hello", "T2"});
    CHECK(r.attempts == 3);
    CHECK(sleeps.calls == std::vector<std::chrono::milliseconds>{1000ms, 2000ms});
    for (const auto& req : gw.requests()) CHECK(req.headers.at("Idempotency-Key") == "T2");
  }

  TEST_CASE("recipient rejection is not retried") {
    MockGateway gw;
    gw.reject_next("InvalidPhoneNumber");
    SleepLog sleeps;
    const SmsClient client(gateway(gw.base_url()), sleeps.fn());
    try {
      client.send({"+256", "hello", "T3"});
      FAIL("expected GatewayRejected");
    } catch (const GatewayRejected& e) {
      CHECK(e.status() == "InvalidPhoneNumber");
    }
    CHECK(gw.requests().size() == 1);
    CHECK(sleeps.calls.empty());
  }

  TEST_CASE("client errors are not retried") {
    MockGateway gw;
    gw.script({401, "{\"error\":\"auth\"}"});
    const SmsClient client(gateway(gw.base_url()), SleepLog{}.fn());
    CHECK_THROWS_AS(client.send({"+256700000001", "hello", "T4"}), GatewayRejected);
    CHECK(gw.requests().size() == 1);
  }

  TEST_CASE("a dead gateway exhausts the attempts") {
    SleepLog sleeps;
    const SmsClient client(gateway("http://127.0.0.1:" + std::to_string(sentinel::testing::closed_port())),
                           sleeps.fn());
    CHECK_THROWS_AS(client.send({"+256700000001", "hello", "T5"}), TransportFailed);
    CHECK(sleeps.calls.size() == 2);
  }

  TEST_CASE("request validation") {
    const SmsClient client(gateway("http://127.0.0.1:1"), SleepLog{}.fn());
    CHECK_THROWS_AS(client.send({"", "hello", "k"}), GatewayRejected);
    CHECK_THROWS_AS(client.send({"+256700000001", std::string(kMaxSmsChars + 1, 'x'), "k"}), GatewayRejected);
    CHECK_THROWS_AS(SmsClient(gateway("")), ConfigError);
  }

  TEST_CASE("delivery updates the ticket") {
    MockGateway gw;
    const SmsClient client(gateway(gw.base_url()), SleepLog{}.fn());
    TicketBook book;
    auto t = book.make_ticket(violation("ABC123A", 1717200000000));
    CHECK(deliver(t, client));
    CHECK(t.delivery_state == DeliveryState::Sent);
    CHECK(t.message_id == "ATXid_1");
    CHECK(t.attempts == 1);
    CHECK(gw.requests()[0].form.at("message") == render_ticket_message(t));
    // Already sent: nothing goes out.
    CHECK(deliver(t, client));
    CHECK(gw.requests().size() == 1);
  }

  TEST_CASE("suppressed tickets are never transmitted") {
    MockGateway gw;
    const SmsClient client(gateway(gw.base_url()), SleepLog{}.fn());
    TicketBook book;
    const auto first = book.make_ticket(violation("ABC123A", 1717200000000));
    auto dup = book.make_ticket(violation("ABC123A", 1717200000000));
    CHECK_FALSE(deliver(dup, client));
    CHECK(dup.delivery_state == DeliveryState::Suppressed);

    auto orphan = first;
    orphan.owner.reset();
    CHECK_FALSE(deliver(orphan, client));
    CHECK(orphan.delivery_state == DeliveryState::Suppressed);
    CHECK(gw.requests().empty());
  }

  TEST_CASE("failures are recorded on the ticket") {
    MockGateway gw;
    gw.reject_next("InsufficientBalance");
    const SmsClient client(gateway(gw.base_url()), SleepLog{}.fn());
    auto t = TicketBook{}.make_ticket(violation("ABC123A", 1717200000000));
    CHECK_FALSE(deliver(t, client));
    CHECK(t.delivery_state == DeliveryState::Failed);
    CHECK(t.detail == "InsufficientBalance");
    // A failed ticket can be retried.
    CHECK(deliver(t, client));
    CHECK(t.delivery_state == DeliveryState::Sent);
  }

  TEST_CASE("configuration from the environment") {
    ::setenv("SENTINEL_SMS_URL", "http://example.invalid", 1);
    ::setenv("SENTINEL_SMS_USER", "u", 1);
    ::setenv("SENTINEL_SMS_KEY", "k", 1);
    const auto c = GatewayConfig::from_env();
    CHECK(c.base_url == "http://example.invalid");
    CHECK(c.username == "u");
    CHECK(c.api_key == "k");
    ::unsetenv("SENTINEL_SMS_URL");
    CHECK_THROWS_AS(GatewayConfig::from_env(), ConfigError);
  }
}
