#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/config.hpp"
#include "sentinel/enforcement.hpp"
#include "sentinel/plate.hpp"
#include "sentinel/report.hpp"
#include "sentinel/speed.hpp"
#include "sentinel/stream.hpp"
#include "sentinel/tracker.hpp"

namespace sentinel {

struct AnnotatedObject {
  TrackId track_id = kNoTrack;
  TrackStatus status = TrackStatus::Tentative;
  BBox bbox;
  std::optional<double> speed_kmh;  // sample emitted on this frame
  std::optional<std::string> plate;  // last valid plate read so far
};

// Per-frame overlay data standing in for a rendered output video.
struct FrameAnnotation {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<AnnotatedObject> objects;
};

std::string to_json_line(const FrameAnnotation& a);

struct EngineSinks {
  std::function<void(const FrameAnnotation&)> on_frame;
  std::function<void(const TrackReport&)> on_report;
  std::function<void(const ViolationTicket&)> on_ticket;
};

// Runs one stream through tracking, the speed and plate paths, and
// ticketing. Strictly sequential; use one instance per stream.
class Engine {
 public:
  // `registry` may be null, in which case every ticket is Suppressed.
  Engine(const EngineConfig& config, Calibration calibration,
         std::shared_ptr<const Registry> registry, EngineSinks sinks = {});

  // Throws PipelineError naming the frame and stage on any module failure.
  void process(const FrameRecord& frame);

  // Finalizes every remaining track, in id order.
  void finish();

  // Make repeat tickets found in an existing log collapse onto the original.
  void remember_ticket(const std::string& ticket_id) { book_.remember(ticket_id); }

  const Calibration& calibration() const { return calibration_; }
  std::size_t frames_processed() const { return frames_processed_; }

 private:
  struct TrackData {
    explicit TrackData(std::size_t window) : history(window) {}

    AnchorHistory history;
    std::vector<SpeedSample> samples;
    std::vector<PlateObservation> plates;
    std::optional<std::string> last_plate;
    std::string cls;
    std::int64_t first_frame = 0;
    std::int64_t last_frame = 0;
    std::int64_t first_ts = 0;
    std::int64_t last_ts = 0;
    std::size_t detections = 0;
  };

  void finalize(const Track& track);

  EngineConfig config_;
  Calibration calibration_;
  SpeedParams speed_params_;
  PlateGrammar grammar_;
  std::shared_ptr<const Registry> registry_;
  EngineSinks sinks_;
  Tracker tracker_;
  TicketBook book_;
  std::map<TrackId, TrackData> data_;
  std::optional<std::int64_t> last_frame_;
  std::size_t frames_processed_ = 0;
};

}  // namespace sentinel
