#include "sentinel_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "sentinel/config.hpp"
#include "sentinel/csv.hpp"
#include "sentinel/engine.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/sms.hpp"

namespace sentinel::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | mode);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

// "x,y;x,y;x,y;x,y" in A, B, C, D order.
Quad parse_quad(const std::string& text) {
  std::vector<double> v;
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream ss(cleaned);
  double x = 0.0;
  while (ss >> x) v.push_back(x);
  if (v.size() != 8 || !ss.eof()) {
    throw ConfigError("--quad needs four x,y points separated by ';'");
  }
  return Quad{{Point2{v[0], v[1]}, Point2{v[2], v[3]}, Point2{v[4], v[5]}, Point2{v[6], v[7]}}};
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOpts {
  std::string quad;
  double width = 0.0;
  double length = 0.0;
  double fps = 25.0;
  double limit = 50.0;
  std::string camera_id = "cam-0";
  std::string location;
  std::string output;
};

int cmd_calibrate(const CalibrateOpts& o, std::ostream& out) {
  const Calibration cal(parse_quad(o.quad), o.width, o.length, o.fps, o.limit, o.camera_id,
                        o.location);
  save_calibration(o.output, cal);
  const Quad target = cal.target();
  fmt::print(out, "corner  source(px)            target(m)       residual(m)\n");
  const char* names[] = {"A", "B", "C", "D"};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2 s = cal.source().corners[i];
    const Point2 m = transform_point(cal.homography(), s);
    const Point2 t = target.corners[i];
    fmt::print(out, "{:<7} ({:>8.2f},{:>8.2f})  ({:>6.2f},{:>6.2f})  {:.3e}\n", names[i], s.x, s.y,
               t.x, t.y, std::hypot(m.x - t.x, m.y - t.y));
  }
  fmt::print(out, "wrote {}\n", o.output);
  return kExitOk;
}

// ---------------------------------------------------------------------- run

struct RunOpts {
  std::string config;
  std::string stream;
  std::string output_dir;
  bool send = false;
};

struct TicketSendOpts {
  std::string log;
  std::string registry;
  std::string config;
  bool retry_failed = false;
  std::optional<int> attempts;
  std::optional<int> retry_base_ms;
};

int cmd_ticket_send(const TicketSendOpts& o, std::ostream& out);

int cmd_run(const RunOpts& o, std::ostream& out) {
  EngineConfig cfg = load_engine_config(o.config);
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  const Calibration cal = load_calibration(cfg.calibration_path);
  std::shared_ptr<const Registry> registry;
  if (!cfg.registry_path.empty()) {
    registry = std::make_shared<const Registry>(Registry::load(cfg.registry_path));
  }

  fs::create_directories(cfg.output_dir);
  auto reports_out = open_out(cfg.output_dir / "reports.jsonl");
  auto annotations_out = open_out(cfg.output_dir / "annotations.jsonl");
  TicketLog log(cfg.output_dir / "tickets.jsonl");
  const auto previous = log.current();

  std::vector<TrackReport> reports;
  std::size_t tickets = 0;
  EngineSinks sinks;
  sinks.on_frame = [&](const FrameAnnotation& a) { annotations_out << to_json_line(a) << '\n'; };
  sinks.on_report = [&](const TrackReport& r) {
    reports_out << to_json_line(r) << '\n';
    reports.push_back(r);
  };
  sinks.on_ticket = [&](const ViolationTicket& t) {
    log.append(t);
    ++tickets;
  };

  Engine engine(cfg, cal, registry, std::move(sinks));
  for (const auto& t : previous) engine.remember_ticket(t.ticket_id);

  std::ifstream in(o.stream, std::ios::binary);
  if (!in) throw ConfigError("cannot open stream " + o.stream);
  StreamReader reader(in);
  while (auto frame = reader.next()) engine.process(*frame);
  engine.finish();

  fmt::print(out, "{:>6}  {:<9} {:>7} {:>7}  {:>10}  {:<9} {}\n", "track", "plate", "frames",
             "samples", "speed", "violation", "ticket");
  for (const auto& r : reports) {
    fmt::print(out, "{:>6}  {:<9} {:>7} {:>7}  {:>10}  {:<9} {}\n", r.track_id,
               r.plate ? r.plate->text : "-", r.last_frame - r.first_frame + 1, r.samples.size(),
               r.assigned_speed_kmh ? fmt::format("{:.1f} km/h", *r.assigned_speed_kmh) : "-",
               r.violation ? "yes" : "no", r.ticket_id.value_or("-"));
  }
  fmt::print(out, "{} frames, {} tracks, {} ticket records -> {}\n", engine.frames_processed(),
             reports.size(), tickets, cfg.output_dir.string());
  if (!o.send) return kExitOk;
  TicketSendOpts send;
  send.log = log.path().string();
  send.config = o.config;
  return cmd_ticket_send(send, out);
}

// ----------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string spec;
  std::uint64_t seed = 1;
  std::string stream_out;
  std::string truth_out;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  const ScenarioSpec spec = scenario_from_json(slurp(o.spec));
  const Scenario sc = generate_scenario(spec, o.seed);
  {
    auto s = open_out(o.stream_out);
    write_stream(s, sc.frames);
  }
  {
    auto t = open_out(o.truth_out);
    write_truth(t, sc.truth);
  }
  std::size_t dets = 0;
  for (const auto& f : sc.frames) dets += f.detections.size();
  fmt::print(out, "{} frames, {} detections, {} vehicles -> {}, {}\n", sc.frames.size(), dets,
             sc.truth.size(), o.stream_out, o.truth_out);
  return kExitOk;
}

// --------------------------------------------------------------------- eval

struct EvalOpts {
  std::string mode;
  std::string reports;
  std::string truth;
  std::string predictions;
  std::string pairs;
  std::string output;
  double tolerance = 10.0;
  std::int64_t window_ms = 0;
  std::optional<double> min_within;
  std::optional<double> max_mae;
  std::optional<double> min_map;
  std::optional<double> max_cer;
};

std::vector<GroundTruthBox> read_gt_boxes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::vector<GroundTruthBox> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto& b = j.at("bbox");
      out.push_back({j.at("image").get<std::string>(), j.value("class", "plate"),
                     BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                          b.at(3).get<double>()}});
    } catch (const json::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

std::vector<PredictedBox> read_pred_boxes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::vector<PredictedBox> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto& b = j.at("bbox");
      out.push_back({j.at("image").get<std::string>(), j.value("class", "plate"),
                     BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                          b.at(3).get<double>()},
                     j.at("score").get<double>()});
    } catch (const json::exception& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_cer_pairs(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  const std::string_view cols[] = {"predicted", "truth"};
  csv::Table t(in, cols);
  const std::size_t pc = t.column("predicted");
  const std::size_t tc = t.column("truth");
  std::vector<std::pair<std::string, std::string>> out;
  while (auto rec = t.next()) out.emplace_back((*rec)[pc], (*rec)[tc]);
  return out;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) return;
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
  bool pass = true;
  auto check = [&](bool ok, const std::string& what) {
    fmt::print(out, "{} {}\n", ok ? "PASS" : "FAIL", what);
    pass = pass && ok;
  };

  if (o.mode == "speeds") {
    const auto reports = read_reports(o.reports);
    SpeedEvaluation ev;
    if (detect_truth_kind(o.truth) == TruthKind::Synthetic) {
      std::ifstream in(o.truth);
      ev = evaluate_speeds(reports, read_truth(in), o.tolerance);
    } else {
      std::ifstream in(o.truth);
      ev = evaluate_speeds(reports, read_gun_records(in), o.tolerance, o.window_ms);
    }
    fmt::print(out, "{:<10} {:>6} {:>10} {:>10} {:>8}  {}\n", "truth", "track", "estimated",
               "truth", "error", "within");
    json rows = json::array();
    for (const auto& m : ev.matches) {
      fmt::print(out, "{:<10} {:>6} {:>10.1f} {:>10.1f} {:>+8.1f}  {}\n", m.truth_key,
                 m.track_id, m.estimated_kmh, m.truth_kmh, m.error_kmh, m.within ? "yes" : "no");
      rows.push_back({{"truth", m.truth_key},
                      {"track_id", m.track_id},
                      {"estimated_kmh", m.estimated_kmh},
                      {"truth_kmh", m.truth_kmh},
                      {"error_kmh", m.error_kmh},
                      {"within", m.within}});
    }
    fmt::print(out,
               "matched {}  unmatched {}  ambiguous {}\nMAE {:.3f} km/h  max |error| {:.3f} km/h"
               "  within ±{:g} km/h: {:.4f}\n",
               ev.matches.size(), ev.unmatched.size(), ev.ambiguous.size(), ev.mae_kmh,
               ev.max_abs_error_kmh, ev.tolerance_kmh, ev.fraction_within);
    write_json(o.output, {{"mode", "speeds"},
                          {"mae_kmh", ev.mae_kmh},
                          {"max_abs_error_kmh", ev.max_abs_error_kmh},
                          {"fraction_within", ev.fraction_within},
                          {"tolerance_kmh", ev.tolerance_kmh},
                          {"unmatched", ev.unmatched},
                          {"ambiguous", ev.ambiguous},
                          {"vehicles", rows}});
    if (o.min_within) {
      check(ev.fraction_within >= *o.min_within,
            fmt::format("fraction within {:.4f} >= {:.4f}", ev.fraction_within, *o.min_within));
    }
    if (o.max_mae) {
      check(ev.mae_kmh <= *o.max_mae, fmt::format("MAE {:.3f} <= {:.3f}", ev.mae_kmh, *o.max_mae));
    }
  } else if (o.mode == "map50") {
    const double m = map50(read_gt_boxes(o.truth), read_pred_boxes(o.predictions));
    fmt::print(out, "mAP50 {:.4f}\n", m);
    write_json(o.output, {{"mode", "map50"}, {"map50", m}});
    if (o.min_map) check(m >= *o.min_map, fmt::format("mAP50 {:.4f} >= {:.4f}", m, *o.min_map));
  } else if (o.mode == "cer") {
    const auto pairs = read_cer_pairs(o.pairs);
    const double c = cer_batch(pairs);
    fmt::print(out, "pairs {}  mean CER {:.4f}\n", pairs.size(), c);
    write_json(o.output, {{"mode", "cer"}, {"pairs", pairs.size()}, {"cer", c}});
    if (o.max_cer) check(c <= *o.max_cer, fmt::format("CER {:.4f} <= {:.4f}", c, *o.max_cer));
  } else {
    throw ConfigError("unknown eval mode '" + o.mode + "'");
  }
  return pass ? kExitOk : kExitThreshold;
}

// -------------------------------------------------------------- ticket send

int cmd_ticket_send(const TicketSendOpts& o, std::ostream& out) {
  if (!fs::exists(o.log)) throw ConfigError("ticket log not found: " + o.log);
  GatewayConfig gw;
  if (!o.config.empty()) {
    gw = load_engine_config(o.config).gateway_from_env();
  } else {
    gw = GatewayConfig::from_env();
  }
  if (o.attempts) gw.attempts = *o.attempts;
  if (o.retry_base_ms) gw.retry_base = std::chrono::milliseconds(*o.retry_base_ms);
  std::shared_ptr<const Registry> registry;
  if (!o.registry.empty()) registry = std::make_shared<const Registry>(Registry::load(o.registry));

  const SmsClient client(gw);
  TicketLog log(o.log);
  std::size_t sent = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  for (auto t : log.current()) {
    const bool eligible = t.delivery_state == DeliveryState::Pending ||
                          (o.retry_failed && t.delivery_state == DeliveryState::Failed);
    if (!eligible) {
      ++skipped;
      continue;
    }
    if (registry) t.owner = registry->lookup(t.plate);
    deliver(t, client);
    log.append(t);
    if (t.delivery_state == DeliveryState::Sent) {
      ++sent;
    } else if (t.delivery_state == DeliveryState::Failed) {
      ++failed;
    }
    fmt::print(out, "{} {} -> {} {}\n", t.ticket_id, t.plate, to_string(t.delivery_state),
               t.detail);
  }
  fmt::print(out, "sent {}  failed {}  skipped {}\n", sent, failed, skipped);
  return failed ? kExitThreshold : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sentinel - traffic speed enforcement engine"};
  app.require_subcommand(1);

  CalibrateOpts cal;
  auto* c = app.add_subcommand("calibrate", "Solve and store the road-plane homography");
  c->add_option("--quad", cal.quad, "Pixel corners A;B;C;D as 'x,y;x,y;x,y;x,y'")->required();
  c->add_option("--width", cal.width, "Target rectangle width in meters")->required();
  c->add_option("--length", cal.length, "Target rectangle length in meters")->required();
  c->add_option("--fps", cal.fps, "Video frame rate")->capture_default_str();
  c->add_option("--limit", cal.limit, "Speed limit in km/h")->capture_default_str();
  c->add_option("--camera-id", cal.camera_id, "Camera identifier")->capture_default_str();
  c->add_option("--location", cal.location, "Human-readable location");
  c->add_option("-o,--output", cal.output, "Calibration file to write")->required();

  RunOpts run_opts;
  auto* r = app.add_subcommand("run", "Process a detection stream end to end");
  r->add_option("--config", run_opts.config, "Engine config file")->required();
  r->add_option("--stream", run_opts.stream, "Detection stream (.jsonl)")->required();
  r->add_option("--out", run_opts.output_dir, "Override the config's output directory");
  r->add_flag("--send", run_opts.send, "Deliver pending tickets once the stream is done");

  SimulateOpts sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic stream and truth table");
  s->add_option("--spec", sim.spec, "Scenario spec (.json)")->required();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--stream", sim.stream_out, "Stream file to write")->required();
  s->add_option("--truth", sim.truth_out, "Truth table to write")->required();

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "Score reports, detections or plate reads");
  e->add_option("--mode", ev.mode, "speeds | map50 | cer")
      ->required()
      ->check(CLI::IsMember({"speeds", "map50", "cer"}));
  e->add_option("--reports", ev.reports, "Track reports (speeds mode)");
  e->add_option("--truth", ev.truth, "Truth table, gun export, or ground-truth boxes");
  e->add_option("--predictions", ev.predictions, "Predicted boxes (map50 mode)");
  e->add_option("--pairs", ev.pairs, "predicted,truth CSV (cer mode)");
  e->add_option("--tolerance", ev.tolerance, "Speed tolerance in km/h")->capture_default_str();
  e->add_option("--window-ms", ev.window_ms, "Gun timestamp matching slack")->capture_default_str();
  e->add_option("-o,--output", ev.output, "Write the metrics report as JSON");
  e->add_option("--min-within", ev.min_within, "Fail unless this fraction is within tolerance");
  e->add_option("--max-mae", ev.max_mae, "Fail if MAE exceeds this");
  e->add_option("--min-map", ev.min_map, "Fail if mAP50 is below this");
  e->add_option("--max-cer", ev.max_cer, "Fail if mean CER exceeds this");

  TicketSendOpts ts;
  auto* t = app.add_subcommand("ticket", "Ticket operations");
  t->require_subcommand(1);
  auto* tsend = t->add_subcommand("send", "Deliver pending tickets over SMS");
  tsend->add_option("--log", ts.log, "Ticket log (.jsonl)")->required();
  tsend->add_option("--registry", ts.registry, "Registry CSV used to refresh owners");
  tsend->add_option("--config", ts.config, "Engine config for gateway retry settings");
  tsend->add_flag("--retry-failed", ts.retry_failed, "Also resend Failed tickets");
  tsend->add_option("--attempts", ts.attempts, "Override the attempt budget");
  tsend->add_option("--retry-base-ms", ts.retry_base_ms, "Override the backoff base");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c->parsed()) return cmd_calibrate(cal, out);
    if (r->parsed()) return cmd_run(run_opts, out);
    if (s->parsed()) return cmd_simulate(sim, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (tsend->parsed()) return cmd_ticket_send(ts, out);
  } catch (const Error& ex) {
    fmt::print(err, "error: {}\n", ex.what());
    return kExitInput;
  } catch (const fs::filesystem_error& ex) {
    fmt::print(err, "error: {}\n", ex.what());
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace sentinel::cli
