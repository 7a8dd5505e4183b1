#include "sentinel/tracker.hpp"

#include <algorithm>

#include "sentinel/assignment.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

const char* to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Lost: return "lost";
    case TrackStatus::Removed: return "removed";
  }
  return "unknown";
}

void validate(const TrackerParams& p) {
  if (!(p.low_thresh >= 0.0 && p.low_thresh <= p.high_thresh && p.high_thresh <= 1.0)) {
    throw ConfigError("tracker thresholds must satisfy 0 <= low <= high <= 1");
  }
  for (double gate : {p.high_max_cost, p.low_max_cost, p.tentative_max_cost}) {
    if (!(gate >= 0.0 && gate <= 1.0)) throw ConfigError("tracker cost gates must be in [0, 1]");
  }
  if (p.min_hits < 1) throw ConfigError("min_hits must be at least 1");
  if (p.track_buffer < 0) throw ConfigError("track_buffer must be non-negative");
}

Tracker::Tracker(TrackerParams params) : params_(params) { validate(params_); }

void Tracker::apply_match(Track& t, const Detection& d) {
  t.state = kalman_update(t.state, d.bbox, params_.noise);
  t.frames_since_update = 0;
  t.last_score = d.score;
  t.last_bbox = d.bbox;
  ++t.hits;
  switch (t.status) {
    case TrackStatus::Tentative:
      if (t.hits >= params_.min_hits) {
        t.status = TrackStatus::Confirmed;
        t.ever_confirmed = true;
      }
      break;
    case TrackStatus::Lost:
      t.status = TrackStatus::Confirmed;
      break;
    default:
      break;
  }
}

void Tracker::match(std::vector<std::size_t>& track_idx, std::vector<std::size_t>& det_idx,
                    std::span<const Detection> detections, double max_cost,
                    std::vector<TrackId>& labels) {
  CostMatrix cost(track_idx.size(), det_idx.size());
  for (std::size_t r = 0; r < track_idx.size(); ++r) {
    const BBox predicted = tracks_[track_idx[r]].state.bbox();
    for (std::size_t c = 0; c < det_idx.size(); ++c) {
      cost(r, c) = 1.0 - iou(predicted, detections[det_idx[c]].bbox);
    }
  }
  const AssignmentResult res = assign(cost, max_cost);
  for (const auto& [r, c] : res.pairs) {
    Track& t = tracks_[track_idx[r]];
    const std::size_t d = det_idx[c];
    apply_match(t, detections[d]);
    labels[d] = t.id;
  }
  std::vector<std::size_t> rest_tracks;
  std::vector<std::size_t> rest_dets;
  for (std::size_t r : res.unmatched_rows) rest_tracks.push_back(track_idx[r]);
  for (std::size_t c : res.unmatched_cols) rest_dets.push_back(det_idx[c]);
  track_idx = std::move(rest_tracks);
  det_idx = std::move(rest_dets);
}

StepOutput Tracker::step(std::span<const Detection> detections) {
  StepOutput out;
  out.labels.assign(detections.size(), kNoTrack);

  for (auto& t : tracks_) {
    if (t.status != TrackStatus::Confirmed && t.status != TrackStatus::Tentative) {
      t.state.mean(7) = 0.0;
    }
    t.state = kalman_predict(t.state, params_.noise);
  }

  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const double s = detections[i].score;
    if (s >= params_.high_thresh) {
      high.push_back(i);
    } else if (s >= params_.low_thresh) {
      low.push_back(i);
    }
  }

  std::vector<std::size_t> pool;
  std::vector<std::size_t> tentative;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (params_.sort_mode || tracks_[i].status != TrackStatus::Tentative) {
      pool.push_back(i);
    } else {
      tentative.push_back(i);
    }
  }

  // Stage 1: high-score detections against established tracks.
  match(pool, high, detections, params_.high_max_cost, out.labels);

  if (!params_.sort_mode) {
    // Stage 2: tracks still active last frame get a second chance on
    // low-score detections.
    std::vector<std::size_t> active;
    std::vector<std::size_t> lost;
    for (std::size_t i : pool) {
      (tracks_[i].status == TrackStatus::Confirmed ? active : lost).push_back(i);
    }
    match(active, low, detections, params_.low_max_cost, out.labels);
    pool = std::move(lost);
    pool.insert(pool.end(), active.begin(), active.end());

    // Tentative tracks only continue on high-score detections.
    match(tentative, high, detections, params_.tentative_max_cost, out.labels);
    pool.insert(pool.end(), tentative.begin(), tentative.end());
  }

  for (std::size_t i : pool) {
    Track& t = tracks_[i];
    ++t.frames_since_update;
    switch (t.status) {
      case TrackStatus::Tentative:
        t.status = TrackStatus::Removed;
        break;
      case TrackStatus::Confirmed:
        t.status = TrackStatus::Lost;
        break;
      default:
        break;
    }
    if (t.status == TrackStatus::Lost && t.frames_since_update > params_.track_buffer) {
      t.status = TrackStatus::Removed;
    }
  }

  for (std::size_t d : high) {
    Track t;
    t.id = next_id_++;
    t.state = kalman_initiate(detections[d].bbox, params_.noise);
    t.hits = 1;
    t.cls = detections[d].cls;
    t.last_score = detections[d].score;
    t.last_bbox = detections[d].bbox;
    if (params_.min_hits <= 1) {
      t.status = TrackStatus::Confirmed;
      t.ever_confirmed = true;
    }
    out.labels[d] = t.id;
    tracks_.push_back(std::move(t));
  }

  auto removed_begin = std::stable_partition(tracks_.begin(), tracks_.end(), [](const Track& t) {
    return t.status != TrackStatus::Removed;
  });
  out.removed.assign(std::make_move_iterator(removed_begin),
                     std::make_move_iterator(tracks_.end()));
  tracks_.erase(removed_begin, tracks_.end());
  return out;
}

std::vector<Track> Tracker::flush() {
  std::vector<Track> out = std::move(tracks_);
  tracks_.clear();
  for (auto& t : out) t.status = TrackStatus::Removed;
  return out;
}

}  // namespace sentinel
