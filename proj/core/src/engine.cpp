#include "sentinel/engine.hpp"

#include <algorithm>
#include <unordered_map>

#include "json_io.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using detail::json;

std::string to_json_line(const FrameAnnotation& a) {
  json objects = json::array();
  for (const auto& o : a.objects) {
    objects.push_back({{"track_id", o.track_id},
                       {"status", to_string(o.status)},
                       {"bbox", detail::bbox_to_json(o.bbox)},
                       {"speed_kmh", o.speed_kmh ? json(*o.speed_kmh) : json(nullptr)},
                       {"plate", o.plate ? json(*o.plate) : json(nullptr)}});
  }
  json j = {{"frame", a.frame_index}, {"timestamp_ms", a.timestamp_ms}, {"objects", objects}};
  return j.dump();
}

Engine::Engine(const EngineConfig& config, Calibration calibration,
               std::shared_ptr<const Registry> registry, EngineSinks sinks)
    : config_(config),
      calibration_(std::move(calibration)),
      speed_params_(config.speed_params(calibration_.fps())),
      grammar_(config.plate_pattern, config.plate_alphabet),
      registry_(std::move(registry)),
      sinks_(std::move(sinks)),
      tracker_(config.tracker),
      book_(config.enforcement) {}

void Engine::process(const FrameRecord& frame) {
  const std::int64_t f = frame.frame_index;
  if (last_frame_ && f <= *last_frame_) {
    throw PipelineError(f, "ingest", "frame index does not increase");
  }
  last_frame_ = f;
  ++frames_processed_;

  std::vector<Detection> dets;
  dets.reserve(frame.detections.size());
  for (const auto& d : frame.detections) {
    const auto& classes = config_.vehicle_classes;
    if (classes.empty() || std::find(classes.begin(), classes.end(), d.cls) != classes.end()) {
      dets.push_back(d);
    }
  }

  StepOutput step;
  try {
    step = tracker_.step(dets);
  } catch (const Error& e) {
    throw PipelineError(f, "tracking", e.what());
  }

  std::unordered_map<TrackId, TrackStatus> status;
  for (const auto& t : tracker_.tracks()) status.emplace(t.id, t.status);

  FrameAnnotation ann;
  ann.frame_index = f;
  ann.timestamp_ms = frame.timestamp_ms;
  std::vector<std::pair<TrackId, BBox>> vehicles;

  try {
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const TrackId id = step.labels[i];
      if (id == kNoTrack) continue;
      auto [it, fresh] = data_.try_emplace(id, speed_params_.window);
      TrackData& td = it->second;
      if (fresh) {
        td.cls = dets[i].cls;
        td.first_frame = f;
        td.first_ts = frame.timestamp_ms;
      }
      td.last_frame = f;
      td.last_ts = frame.timestamp_ms;
      ++td.detections;
      vehicles.emplace_back(id, dets[i].bbox);

      AnnotatedObject obj;
      obj.track_id = id;
      obj.bbox = dets[i].bbox;
      if (auto s = status.find(id); s != status.end()) obj.status = s->second;
      if (td.history.push(f, dets[i].bbox, calibration_, config_.roi_margin) ==
          PushOutcome::Appended) {
        if (auto sample = instantaneous_speed(td.history, calibration_, speed_params_)) {
          td.samples.push_back(*sample);
          obj.speed_kmh = sample->speed_kmh;
        }
      }
      ann.objects.push_back(std::move(obj));
    }
  } catch (const Error& e) {
    throw PipelineError(f, "speed", e.what());
  }

  for (const auto& d : dets) {
    if (!d.plate) continue;
    const auto owner = match_plate_to_vehicle(d.plate->bbox, vehicles);
    if (!owner) continue;
    TrackData& td = data_.at(*owner);
    td.plates.push_back({d.plate->bbox, d.plate->text, d.plate->text_score, f});
    if (auto check = normalize_plate(d.plate->text, grammar_); check.valid()) {
      td.last_plate = *check.text;
    }
  }
  for (auto& obj : ann.objects) obj.plate = data_.at(obj.track_id).last_plate;

  if (sinks_.on_frame) sinks_.on_frame(ann);

  for (const auto& t : step.removed) {
    try {
      finalize(t);
    } catch (const Error& e) {
      throw PipelineError(f, "reporting", e.what());
    }
  }
}

void Engine::finish() {
  auto rest = tracker_.flush();
  std::sort(rest.begin(), rest.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
  for (const auto& t : rest) {
    try {
      finalize(t);
    } catch (const Error& e) {
      throw PipelineError(last_frame_.value_or(0), "reporting", e.what());
    }
  }
}

void Engine::finalize(const Track& track) {
  auto it = data_.find(track.id);
  if (it == data_.end()) return;
  if (!track.ever_confirmed) {
    data_.erase(it);
    return;
  }
  TrackData& td = it->second;

  TrackReport r;
  r.track_id = track.id;
  r.cls = td.cls;
  r.first_frame = td.first_frame;
  r.last_frame = td.last_frame;
  r.first_timestamp_ms = td.first_ts;
  r.last_timestamp_ms = td.last_ts;
  r.detections = td.detections;
  r.plate = aggregate_identity(td.plates, grammar_);
  r.samples = std::move(td.samples);
  r.policy = to_string(config_.policy);
  if (!r.samples.empty()) {
    r.assigned_speed_kmh = assign_speed(r.samples, config_.policy);
    r.violation = detect_violation(*r.assigned_speed_kmh, calibration_.speed_limit_kmh(),
                                   config_.enforcement.margin_kmh);
  }
  if (r.plate && registry_) r.owner = registry_->lookup(r.plate->text);

  if (r.violation && r.plate) {
    ViolationInput in;
    in.plate = r.plate->text;
    in.track_id = r.track_id;
    in.estimated_speed_kmh = *r.assigned_speed_kmh;
    in.speed_limit_kmh = calibration_.speed_limit_kmh();
    in.policy = r.policy;
    in.camera_id = calibration_.camera_id();
    in.location = calibration_.location();
    in.timestamp_ms = r.last_timestamp_ms;
    in.owner = r.owner;
    const ViolationTicket ticket = book_.make_ticket(in);
    r.ticket_id = ticket.ticket_id;
    if (sinks_.on_ticket) sinks_.on_ticket(ticket);
  }

  data_.erase(it);
  if (sinks_.on_report) sinks_.on_report(r);
}

}  // namespace sentinel
