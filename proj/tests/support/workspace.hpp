#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/enforcement.hpp"
#include "sentinel/scenario.hpp"
#include "sentinel_cli/cli.hpp"
#include "temp_dir.hpp"

namespace sentinel::testing {

inline const RegistryEntry kUserA{"ABC123A", "User A", "+256700000001", "user.a@example.org",
                                  "Toyota Premio, silver"};

// Calibration, registry, config and a stream laid out the way the CLI
// expects them.
struct Workspace {
  TempDir dir;

  std::filesystem::path calibration() const { return dir / "calibration.json"; }
  std::filesystem::path registry() const { return dir / "registry.csv"; }
  std::filesystem::path config() const { return dir / "config.json"; }
  std::filesystem::path stream() const { return dir / "stream.jsonl"; }
  std::filesystem::path truth() const { return dir / "truth.csv"; }
  std::filesystem::path out() const { return dir / "out"; }

  explicit Workspace(const std::string& extra_config = "") {
    save_calibration(calibration(), demo_calibration());
    Registry({kUserA, {"UAA002B", "Grace Namukasa", "+256700000002", "", "Honda Fit"}})
        .save(registry());
    write_file(config(), "{\"calibration\":\"calibration.json\",\"registry\":\"registry.csv\","
                         "\"output_dir\":\"out\",\"vehicle_classes\":[\"car\"],"
                         "\"gateway\":{\"attempts\":3,\"retry_base_ms\":1,\"timeout_ms\":2000}" +
                             extra_config + "}");
  }

  void write_scene(const ScenarioSpec& spec, std::uint64_t seed = 1) const {
    const Scenario sc = generate_scenario(spec, seed);
    std::ofstream s(stream(), std::ios::binary);
    write_stream(s, sc.frames);
    std::ofstream t(truth(), std::ios::binary);
    write_truth(t, sc.truth);
  }

  // One vehicle with the given plate at the given speed in the demo scene.
  void write_single(double speed_kmh, const std::string& plate = "ABC123A") const {
    ScenarioSpec spec{demo_calibration(), {{0, speed_kmh, 5.25, plate}}, {}, {}, 0};
    spec.duration_frames = static_cast<std::int64_t>(40.0 / (speed_kmh / 3.6) * 25.0) + 20;
    write_scene(spec);
  }
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace sentinel::testing
