#include "sentinel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

void summarize(SpeedEvaluation& ev) {
  if (ev.matches.empty()) throw NoMatches("no truth record matched a track with a speed");
  double sum = 0.0;
  std::size_t within = 0;
  for (auto& m : ev.matches) {
    const double e = std::abs(m.error_kmh);
    sum += e;
    ev.max_abs_error_kmh = std::max(ev.max_abs_error_kmh, e);
    if (m.within) ++within;
  }
  const auto n = static_cast<double>(ev.matches.size());
  ev.mae_kmh = sum / n;
  ev.fraction_within = static_cast<double>(within) / n;
}

SpeedMatch make_match(std::string key, const TrackReport& r, double truth, double tol) {
  SpeedMatch m;
  m.truth_key = std::move(key);
  m.track_id = r.track_id;
  m.estimated_kmh = *r.assigned_speed_kmh;
  m.truth_kmh = truth;
  m.error_kmh = m.estimated_kmh - truth;
  m.within = std::abs(m.error_kmh) <= tol;
  return m;
}

}  // namespace

SpeedEvaluation evaluate_speeds(std::span<const TrackReport> reports,
                                std::span<const TruthVehicle> truth, double tolerance_kmh) {
  if (truth.empty()) throw NoGroundTruth("truth table is empty");
  SpeedEvaluation ev;
  ev.tolerance_kmh = tolerance_kmh;
  for (const auto& t : truth) {
    const std::string key = std::to_string(t.vehicle_id);
    const TrackReport* best = nullptr;
    for (const auto& r : reports) {
      if (!r.assigned_speed_kmh || !r.plate || r.plate->text != t.plate || t.plate.empty()) {
        continue;
      }
      if (!best || r.samples.size() > best->samples.size()) best = &r;
    }
    if (!best) {
      std::int64_t best_overlap = 0;
      for (const auto& r : reports) {
        if (!r.assigned_speed_kmh) continue;
        const std::int64_t overlap = std::min(r.last_frame, t.exit_frame) -
                                     std::max(r.first_frame, t.entry_frame) + 1;
        if (overlap > best_overlap) {
          best_overlap = overlap;
          best = &r;
        }
      }
    }
    if (!best) {
      ev.unmatched.push_back(key);
      continue;
    }
    ev.matches.push_back(make_match(key, *best, t.commanded_speed_kmh, tolerance_kmh));
  }
  summarize(ev);
  return ev;
}

SpeedEvaluation evaluate_speeds(std::span<const TrackReport> reports,
                                std::span<const GunRecord> truth, double tolerance_kmh,
                                std::int64_t window_ms) {
  if (truth.empty()) throw NoGroundTruth("gun record table is empty");
  SpeedEvaluation ev;
  ev.tolerance_kmh = tolerance_kmh;
  for (const auto& g : truth) {
    std::vector<const TrackReport*> hits;
    for (const auto& r : reports) {
      if (!r.assigned_speed_kmh) continue;
      if (g.timestamp_ms >= r.first_timestamp_ms - window_ms &&
          g.timestamp_ms <= r.last_timestamp_ms + window_ms) {
        hits.push_back(&r);
      }
    }
    if (hits.empty()) {
      ev.unmatched.push_back(g.serial);
    } else if (hits.size() > 1) {
      ev.ambiguous.push_back(g.serial);
    } else {
      ev.matches.push_back(make_match(g.serial, *hits.front(), g.measured_speed_kmh,
                                      tolerance_kmh));
    }
  }
  summarize(ev);
  return ev;
}

double mean_average_precision(std::span<const GroundTruthBox> truth,
                              std::span<const PredictedBox> predictions,
                              double iou_threshold) {
  if (truth.empty()) throw NoGroundTruth("no ground-truth boxes");

  std::map<std::string, std::vector<std::size_t>> gt_by_class;
  for (std::size_t i = 0; i < truth.size(); ++i) gt_by_class[truth[i].cls].push_back(i);

  double ap_sum = 0.0;
  for (const auto& [cls, gt_idx] : gt_by_class) {
    std::vector<std::size_t> preds;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].cls == cls) preds.push_back(i);
    }
    std::stable_sort(preds.begin(), preds.end(), [&](std::size_t a, std::size_t b) {
      return predictions[a].score > predictions[b].score;
    });

    std::vector<char> used(truth.size(), 0);
    std::vector<double> recall;
    std::vector<double> precision;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
      const auto& p = predictions[preds[k]];
      double best_iou = iou_threshold;
      std::optional<std::size_t> best;
      for (std::size_t g : gt_idx) {
        if (used[g] || truth[g].image != p.image) continue;
        const double o = iou(truth[g].bbox, p.bbox);
        if (o >= best_iou) {
          if (!best || o > best_iou) {
            best_iou = o;
            best = g;
          }
        }
      }
      if (best) {
        used[*best] = 1;
        ++tp;
      }
      recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_idx.size()));
      precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    }

    // Precision envelope, then area under the recall steps.
    for (std::size_t k = precision.size(); k-- > 1;) {
      precision[k - 1] = std::max(precision[k - 1], precision[k]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
    ap_sum += ap;
  }
  return ap_sum / static_cast<double>(gt_by_class.size());
}

double cer_batch(std::span<const std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) throw Error("cer_batch needs at least one pair");
  double sum = 0.0;
  for (const auto& [pred, truth] : pairs) sum += cer(pred, truth);
  return sum / static_cast<double>(pairs.size());
}

}  // namespace sentinel
