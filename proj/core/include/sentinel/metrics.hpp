#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sentinel/geometry.hpp"
#include "sentinel/report.hpp"
#include "sentinel/truth.hpp"

namespace sentinel {

struct SpeedMatch {
  std::string truth_key;  // vehicle id or gun serial
  TrackId track_id = kNoTrack;
  double estimated_kmh = 0.0;
  double truth_kmh = 0.0;
  double error_kmh = 0.0;  // estimated - truth
  bool within = false;
};

struct SpeedEvaluation {
  double tolerance_kmh = 10.0;
  double mae_kmh = 0.0;
  double max_abs_error_kmh = 0.0;
  double fraction_within = 0.0;
  std::vector<SpeedMatch> matches;
  std::vector<std::string> unmatched;  // truth keys with no candidate track
  std::vector<std::string> ambiguous;  // truth keys with several candidates, left unresolved
};

// Synthetic truth: a track carrying the vehicle's plate is preferred (the
// one with most samples when several do); otherwise the track whose frame
// span overlaps the vehicle's the most. Only tracks with an assigned speed
// take part. Throws NoGroundTruth on empty truth and NoMatches when nothing
// pairs up.
SpeedEvaluation evaluate_speeds(std::span<const TrackReport> reports,
                                std::span<const TruthVehicle> truth,
                                double tolerance_kmh = 10.0);

// Gun truth: the track whose observation interval, widened by window_ms on
// both sides, contains the gun timestamp. Several such tracks make the
// record ambiguous.
SpeedEvaluation evaluate_speeds(std::span<const TrackReport> reports,
                                std::span<const GunRecord> truth, double tolerance_kmh = 10.0,
                                std::int64_t window_ms = 0);

struct GroundTruthBox {
  std::string image;
  std::string cls;
  BBox bbox;
};

struct PredictedBox {
  std::string image;
  std::string cls;
  BBox bbox;
  double score = 0.0;
};

// Mean over ground-truth classes of all-point interpolated average
// precision. Predictions are taken by descending score and greedily matched
// to the unmatched ground truth box of highest IoU in the same image and
// class. Throws NoGroundTruth.
double mean_average_precision(std::span<const GroundTruthBox> truth,
                              std::span<const PredictedBox> predictions,
                              double iou_threshold);

inline double map50(std::span<const GroundTruthBox> truth,
                    std::span<const PredictedBox> predictions) {
  return mean_average_precision(truth, predictions, 0.5);
}

// Mean of per-pair cer(predicted, truth). Throws Error on an empty list and
// EmptyTruth for an empty truth string.
double cer_batch(std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace sentinel
