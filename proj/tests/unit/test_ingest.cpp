#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "sentinel/csv.hpp"
#include "sentinel/errors.hpp"
#include "sentinel/metrics.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel/stream.hpp"
#include "sentinel/truth.hpp"
#include "temp_dir.hpp"

using namespace sentinel;
using sentinel::testing::Gen;
using sentinel::testing::TempDir;

namespace {

const std::filesystem::path kFixtures = SENTINEL_FIXTURE_DIR;

std::vector<FrameRecord> read_all(const std::string& text) {
  std::istringstream in(text);
  StreamReader r(in);
  std::vector<FrameRecord> out;
  while (auto f = r.next()) out.push_back(*f);
  return out;
}

TrackReport report(TrackId id, double speed, std::int64_t first_ts, std::int64_t last_ts,
                   std::string plate = "") {
  TrackReport r;
  r.track_id = id;
  r.cls = "car";
  r.first_timestamp_ms = first_ts;
  r.last_timestamp_ms = last_ts;
  r.samples = {{0, speed}};
  r.assigned_speed_kmh = speed;
  r.policy = "max";
  if (!plate.empty()) r.plate = PlateIdentity{plate, 1.0, 1};
  return r;
}

GroundTruthBox gt(std::string image, BBox b) { return {std::move(image), "plate", b}; }
PredictedBox pred(std::string image, BBox b, double s) { return {std::move(image), "plate", b, s}; }

}  // namespace

TEST_SUITE("stream") {
  TEST_CASE("golden two-line file") {
    const auto frames = read_stream_file(kFixtures / "golden_stream.jsonl");
    REQUIRE(frames.size() == 2);
    const auto& f0 = frames[0];
    CHECK(f0.frame_index == 0);
    CHECK(f0.timestamp_ms == 1717200000000);
    REQUIRE(f0.detections.size() == 2);
    CHECK(f0.detections[0].cls == "car");
    CHECK(f0.detections[0].score == 0.91);
    CHECK(f0.detections[0].bbox == BBox{812.5, 402.0, 903.25, 478.0});
    REQUIRE(f0.detections[0].plate);
    CHECK(f0.detections[0].plate->bbox == BBox{845.0, 460.0, 872.5, 469.0});
    CHECK(f0.detections[0].plate->text == "ABC123A");
    CHECK(f0.detections[0].plate->text_score == 0.88);
    CHECK(f0.detections[1].cls == "truck");
    CHECK_FALSE(f0.detections[1].plate);
    CHECK(frames[1].frame_index == 1);
    CHECK(frames[1].timestamp_ms == 1717200000040);
    CHECK_FALSE(frames[1].detections[0].plate);
  }

  TEST_CASE("empty input yields nothing") {
    CHECK(read_all("").empty());
    CHECK(read_all("\n\n").empty());
  }

  TEST_CASE("frame order is enforced") {
    const std::string text =
        "{\"frame\":5,\"timestamp_ms\":100,\"detections\":[]}\n"
        "{\"frame\":3,\"timestamp_ms\":200,\"detections\":[]}\n";
    try {
      read_all(text);
      FAIL("expected MonotonicityViolation");
    } catch (const MonotonicityViolation& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(read_all("{\"frame\":1,\"timestamp_ms\":100,\"detections\":[]}\n"
                             "{\"frame\":2,\"timestamp_ms\":99,\"detections\":[]}\n"),
                    MonotonicityViolation);
    CHECK(read_all("{\"frame\":1,\"timestamp_ms\":100,\"detections\":[]}\n"
                   "{\"frame\":2,\"timestamp_ms\":100,\"detections\":[]}\n")
              .size() == 2);
  }

  TEST_CASE("malformed lines name their line number") {
    const char* bad[] = {
        "{\"frame\":0,\"timestamp_ms\":0,\"detections\":[{\"class\":\"car\",\"score\":1.5,\"bbox\":[0,0,1,1]}]}",
        "{\"frame\":0,\"timestamp_ms\":0,\"detections\":[{\"class\":\"car\",\"score\":0.5,\"bbox\":[2,0,1,1]}]}",
        "{\"frame\":0,\"timestamp_ms\":0,\"detections\":[{\"class\":\"car\",\"score\":0.5,\"bbox\":[0,0,1]}]}",
        "{\"frame\":0,\"detections\":[]}",
        "{\"frame\":0,",
    };
    for (const char* line : bad) {
      try {
        read_all(std::string("\n") + line + "\n");
        FAIL("expected ParseError for " << line);
      } catch (const ParseError& e) {
        CHECK(e.line() == 2);
      }
    }
  }

  TEST_CASE("generated streams round trip") {
    const auto spec = make_traffic_scene(demo_calibration(), 6, 30, 90, 5);
    auto noisy = spec;
    noisy.noise.bbox_jitter_px = 2.0;
    noisy.noise.ocr_error_probability = 0.3;
    noisy.noise.score_min = 0.2;
    const auto sc = generate_scenario(noisy, 9);
    std::ostringstream out;
    write_stream(out, sc.frames);
    CHECK(read_all(out.str()) == sc.frames);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("quoting") {
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    std::istringstream in("a,\"b,\"\"c\"\"\nd\",e\r\nx,y,z\n");
    std::size_t line = 0;
    auto r = csv::read_record(in, line);
    CHECK(*r == csv::Record{"a", "b,\"c\"\nd", "e"});
    CHECK(line == 2);
    CHECK(*csv::read_record(in, line) == csv::Record{"x", "y", "z"});
    CHECK_FALSE(csv::read_record(in, line));
    std::istringstream open("a,\"b\n");
    std::size_t l2 = 0;
    CHECK_THROWS_AS(csv::read_record(open, l2), ParseError);
  }
}

TEST_SUITE("truth") {
  TEST_CASE("gun export parsing") {
    std::ifstream in(kFixtures / "gun_records.csv");
    const auto recs = read_gun_records(in);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0] == GunRecord{"TC001234", 1717200001000, 38.4, 42.0, 6});
    CHECK(detect_truth_kind(kFixtures / "gun_records.csv") == TruthKind::Gun);

    std::istringstream long_clip(
        "serial,timestamp_ms,measured_distance_m,measured_speed_kmh,n_frames\nX,1,2,3,8\n");
    CHECK_THROWS_AS(read_gun_records(long_clip), ParseError);
    std::istringstream negative(
        "serial,timestamp_ms,measured_distance_m,measured_speed_kmh,n_frames\nX,1,2,-3,4\n");
    CHECK_THROWS_AS(read_gun_records(negative), ParseError);
    std::istringstream junk(
        "serial,timestamp_ms,measured_distance_m,measured_speed_kmh,n_frames\nX,soon,2,3,4\n");
    CHECK_THROWS_AS(read_gun_records(junk), ParseError);
  }

  TEST_CASE("synthetic truth round trip") {
    const auto sc = generate_scenario(make_traffic_scene(demo_calibration(), 10, 30, 90, 2), 1);
    CHECK(sc.truth.size() == 10);
    std::stringstream ss;
    write_truth(ss, sc.truth);
    CHECK(read_truth(ss) == sc.truth);

    TempDir dir;
    std::ofstream(dir / "t.csv") << ss.str();
    CHECK(detect_truth_kind(dir / "t.csv") == TruthKind::Synthetic);
    sentinel::testing::write_file(dir / "other.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(detect_truth_kind(dir / "other.csv"), ParseError);
  }
}

TEST_SUITE("scenario") {
  TEST_CASE("45 km/h over 25 m takes 50 frames") {
    const Quad px{{Point2{0, 0}, Point2{100, 0}, Point2{100, 500}, Point2{0, 500}}};
    const Calibration cal(px, 10, 25, 25, 50);
    ScenarioSpec spec{cal, {{0, 45.0, 5.0, "ABC123A"}}, {}, {}, 80};
    const auto sc = generate_scenario(spec, 1);
    REQUIRE(sc.truth.size() == 1);
    CHECK(sc.truth[0].entry_frame == 0);
    CHECK(sc.truth[0].exit_frame == 50);
    for (std::int64_t f = 0; f <= 50; ++f) {
      const auto& d = sc.frames[static_cast<std::size_t>(f)].detections;
      REQUIRE(d.size() == 1);
      const Point2 m = transform_point(cal.homography(), anchor_of(d[0].bbox));
      CHECK(m.y == doctest::Approx(0.5 * static_cast<double>(f)).epsilon(1e-9).scale(1.0));
      CHECK(m.x == doctest::Approx(5.0));
    }
    CHECK(sc.frames[51].detections.empty());
    CHECK(sc.frames[1].timestamp_ms - sc.frames[0].timestamp_ms == 40);
  }

  TEST_CASE("noiseless output does not depend on the seed") {
    const auto spec = make_traffic_scene(demo_calibration(), 5, 30, 90, 3);
    std::ostringstream a, b;
    write_stream(a, generate_scenario(spec, 1).frames);
    write_stream(b, generate_scenario(spec, 99).frames);
    CHECK(a.str() == b.str());
  }

  TEST_CASE("a fixed seed reproduces noisy output") {
    auto spec = make_traffic_scene(demo_calibration(), 5, 30, 90, 3);
    spec.noise.bbox_jitter_px = 2.0;
    spec.noise.drop_probability = 0.1;
    std::ostringstream a, b, c;
    write_stream(a, generate_scenario(spec, 7).frames);
    write_stream(b, generate_scenario(spec, 7).frames);
    write_stream(c, generate_scenario(spec, 8).frames);
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
  }

  TEST_CASE("drop rate stays within the binomial bound") {
    auto spec = make_traffic_scene(demo_calibration(), 70, 30, 90, 4);
    REQUIRE(spec.duration_frames >= 1000);
    spec.duration_frames = 1000;
    auto count = [](const Scenario& s) {
      std::size_t n = 0;
      for (const auto& f : s.frames) n += f.detections.size();
      return n;
    };
    const double full = static_cast<double>(count(generate_scenario(spec, 1)));
    spec.noise.drop_probability = 0.2;
    const double kept = static_cast<double>(count(generate_scenario(spec, 1)));
    REQUIRE(full > 1000);
    const double rate = 1.0 - kept / full;
    CHECK(rate >= 0.16);
    CHECK(rate <= 0.24);
  }

  TEST_CASE("spec validation") {
    const Calibration cal = demo_calibration();
    CHECK_THROWS_AS(validate(ScenarioSpec{cal, {{0, 0.0, 5.0, ""}}, {}, {}, 10}), SpecError);
    CHECK_THROWS_AS(validate(ScenarioSpec{cal, {{0, 50.0, 20.0, ""}}, {}, {}, 10}), SpecError);
    CHECK_THROWS_AS(validate(ScenarioSpec{cal, {}, {}, {}, 0}), SpecError);
    ScenarioSpec s{cal, {}, {}, {}, 10};
    s.noise.drop_probability = 1.0;
    CHECK_THROWS_AS(validate(s), SpecError);
    s.noise = {};
    s.noise.score_min = 0.95;
    CHECK_THROWS_AS(validate(s), SpecError);
    CHECK_THROWS_AS(scenario_from_json("{\"duration_frames\": 10}"), SpecError);
  }

  TEST_CASE("spec json round trip") {
    auto spec = make_traffic_scene(demo_calibration(), 4, 30, 90, 6);
    spec.noise.bbox_jitter_px = 1.5;
    const auto back = scenario_from_json(scenario_to_json(spec));
    CHECK(scenario_to_json(back) == scenario_to_json(spec));
    CHECK(back.vehicles.size() == 4);
    CHECK(back.calibration.source() == spec.calibration.source());
  }

  TEST_CASE("synthetic plates follow the default grammar") {
    CHECK(synthetic_plate(0) == "UAA001A");
    CHECK(synthetic_plate(1) == "UAA002B");
    CHECK(synthetic_plate(999) == "UAB001L");
    for (std::size_t i = 0; i < 500; ++i) {
      const std::string p = synthetic_plate(i);
      CHECK(p.size() == 7);
      CHECK(std::isdigit(static_cast<unsigned char>(p[3])));
    }
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("gun anchor: 43 estimated against a 42 km/h gun reading") {
    const std::vector<TrackReport> reports{report(5, 43.0, 1717200000000, 1717200002000)};
    const std::vector<GunRecord> gun{{"TC001234", 1717200001000, 38.4, 42.0, 6}};
    const auto ev = evaluate_speeds(reports, gun);
    REQUIRE(ev.matches.size() == 1);
    CHECK(ev.matches[0].track_id == 5);
    CHECK(std::abs(ev.matches[0].error_kmh) == 1.0);
    CHECK(ev.matches[0].within);
    CHECK(ev.fraction_within == 1.0);
  }

  TEST_CASE("gun matching windows and ambiguity") {
    const std::vector<TrackReport> reports{report(1, 40, 1000, 2000), report(2, 60, 1800, 3000)};
    const std::vector<GunRecord> gun{{"a", 1500, 0, 41, 5}, {"b", 1900, 0, 58, 5}, {"c", 3100, 0, 58, 5}};
    const auto ev = evaluate_speeds(reports, gun);
    CHECK(ev.matches.size() == 1);
    CHECK(ev.ambiguous == std::vector<std::string>{"b"});
    CHECK(ev.unmatched == std::vector<std::string>{"c"});
    const auto wide = evaluate_speeds(reports, gun, 10.0, 200);
    CHECK(wide.unmatched.empty());
    CHECK(wide.matches.size() == 2);
  }

  TEST_CASE("synthetic matching by plate then by overlap") {
    std::vector<TrackReport> reports{report(1, 50, 0, 0, "UAA001A"), report(2, 70, 0, 0)};
    reports[1].first_frame = 100;
    reports[1].last_frame = 150;
    std::vector<TruthVehicle> truth(2);
    truth[0] = {1, "UAA001A", 48, 0, 60, 0, 0, 1.75};
    truth[1] = {2, "UAA002B", 71, 90, 160, 0, 0, 5.25};
    const auto ev = evaluate_speeds(reports, truth);
    REQUIRE(ev.matches.size() == 2);
    CHECK(ev.matches[0].track_id == 1);
    CHECK(ev.matches[1].track_id == 2);
    CHECK(ev.mae_kmh == doctest::Approx(1.5));
    CHECK(ev.max_abs_error_kmh == doctest::Approx(2.0));

    std::vector<TruthVehicle> shuffled{truth[1], truth[0]};
    CHECK(evaluate_speeds(reports, shuffled).mae_kmh == doctest::Approx(ev.mae_kmh));
  }

  TEST_CASE("perfect estimates and error cases") {
    std::vector<TrackReport> reports{report(1, 50, 0, 0, "UAA001A")};
    std::vector<TruthVehicle> truth{{1, "UAA001A", 50, 0, 10, 0, 0, 1}};
    const auto ev = evaluate_speeds(reports, truth);
    CHECK(ev.mae_kmh == 0.0);
    CHECK(ev.fraction_within == 1.0);
    CHECK_THROWS_AS(evaluate_speeds(reports, std::vector<TruthVehicle>{}), NoGroundTruth);
    std::vector<TruthVehicle> far{{1, "ZZZ999Z", 50, 500, 510, 0, 0, 1}};
    CHECK_THROWS_AS(evaluate_speeds(reports, far), NoMatches);
  }

  TEST_CASE("average precision fixtures") {
    const std::vector<GroundTruthBox> one{gt("a", {0, 0, 10, 10})};
    CHECK(map50(one, std::vector<PredictedBox>{pred("a", {0, 0, 10, 8}, 0.9)}) == 1.0);
    CHECK(map50(one, std::vector<PredictedBox>{pred("a", {0, 0, 10, 3}, 0.9)}) == 0.0);

    // Ranked TP, FP, TP against two boxes: PR points (P=1, R=1/2), (1/2, 1/2),
    // (2/3, 1). The envelope gives 1/2 * 1 + 1/2 * 2/3.
    const std::vector<GroundTruthBox> two{gt("a", {0, 0, 10, 10}), gt("a", {50, 50, 60, 60})};
    const std::vector<PredictedBox> three{pred("a", {0, 0, 10, 10}, 0.9), pred("a", {200, 200, 210, 210}, 0.8),
                                          pred("a", {50, 50, 60, 60}, 0.7)};
    CHECK(map50(two, three) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(map50({}, three), NoGroundTruth);
  }

  TEST_CASE("perfect predictions score exactly one") {
    Gen g(61);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<GroundTruthBox> truth;
      std::vector<PredictedBox> preds;
      for (int i = 0; i < g.integer(1, 20); ++i) {
        const std::string img = "img" + std::to_string(g.integer(0, 4));
        const std::string cls = g.coin() ? "plate" : "car";
        const BBox b = g.box(500, 5, 50);
        truth.push_back({img, cls, b});
        preds.push_back({img, cls, b, 1.0});
      }
      CHECK(map50(truth, preds) == 1.0);
    }
  }

  TEST_CASE("duplicates of a matched box are false positives") {
    const std::vector<GroundTruthBox> one{gt("a", {0, 0, 10, 10})};
    const std::vector<PredictedBox> dup{pred("a", {0, 0, 10, 10}, 0.9), pred("a", {0, 0, 10, 10}, 0.8)};
    CHECK(map50(one, dup) == 1.0);
    const std::vector<PredictedBox> dup_first{pred("a", {0, 0, 10, 10}, 0.7), pred("a", {1, 1, 11, 11}, 0.8)};
    CHECK(map50(one, dup_first) == 1.0);
    const std::vector<PredictedBox> other_image{pred("b", {0, 0, 10, 10}, 0.9)};
    CHECK(map50(one, other_image) == 0.0);
  }

  TEST_CASE("cer batch") {
    using P = std::pair<std::string, std::string>;
    CHECK(cer_batch(std::vector<P>{{"ABC123A", "ABC123A"}, {"UAA001A", "UAA001A"}}) == 0.0);
    CHECK(cer_batch(std::vector<P>{{"ABC123A", "ABC123A"}, {"UBA128C", "UBA123C"}}) ==
          doctest::Approx(1.0 / 14.0));
    CHECK_THROWS_AS(cer_batch(std::vector<P>{}), Error);
    CHECK_THROWS_AS(cer_batch(std::vector<P>{{"A", ""}}), EmptyTruth);

    Gen g(71);
    std::vector<P> pairs;
    double sum = 0.0;
    for (int i = 0; i < 100; ++i) {
      std::string truth = g.text(8, "ABCDEFGH0123456789");
      if (truth.empty()) truth = "A";
      const std::string predicted = g.text(9, "ABCDEFGH0123456789");
      sum += static_cast<double>(oracle::levenshtein(predicted, truth)) / static_cast<double>(truth.size());
      pairs.emplace_back(predicted, truth);
    }
    CHECK(cer_batch(pairs) == doctest::Approx(sum / 100.0).epsilon(1e-12));
  }
}
