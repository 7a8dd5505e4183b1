#pragma once

#include <span>
#include <string>
#include <vector>

#include "sentinel/detection.hpp"
#include "sentinel/kalman.hpp"

namespace sentinel {

using TrackId = int;
inline constexpr TrackId kNoTrack = 0;

enum class TrackStatus { Tentative, Confirmed, Lost, Removed };

const char* to_string(TrackStatus s);

struct TrackerParams {
  double high_thresh = 0.5;
  double low_thresh = 0.1;
  // Gates on the 1 - IoU cost for each association stage.
  double high_max_cost = 0.8;
  double low_max_cost = 0.5;
  double tentative_max_cost = 0.7;
  int min_hits = 3;
  int track_buffer = 30;
  // Single-stage SORT-style association: high-score detections only.
  bool sort_mode = false;
  KalmanNoise noise;
};

// Throws ConfigError when thresholds or counts are out of range.
void validate(const TrackerParams& p);

struct Track {
  TrackId id = kNoTrack;
  KalmanState state;
  TrackStatus status = TrackStatus::Tentative;
  int frames_since_update = 0;
  int hits = 0;  // consecutive matches while tentative, total afterwards
  std::string cls;
  double last_score = 0.0;
  BBox last_bbox;
  bool ever_confirmed = false;
};

struct StepOutput {
  // One label per input detection, kNoTrack when the detection was dropped.
  std::vector<TrackId> labels;
  // Tracks that reached Removed during this step.
  std::vector<Track> removed;
};

// Two-stage high/low confidence tracker. One instance per stream; frames
// must be fed in order.
class Tracker {
 public:
  explicit Tracker(TrackerParams params = {});

  StepOutput step(std::span<const Detection> detections);

  // Live (non-removed) tracks in creation order.
  const std::vector<Track>& tracks() const { return tracks_; }

  // Marks every live track Removed and returns them; used at end of stream.
  std::vector<Track> flush();

  const TrackerParams& params() const { return params_; }

 private:
  void match(std::vector<std::size_t>& track_idx, std::vector<std::size_t>& det_idx,
             std::span<const Detection> detections, double max_cost,
             std::vector<TrackId>& labels);
  void apply_match(Track& t, const Detection& d);

  TrackerParams params_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
};

}  // namespace sentinel
