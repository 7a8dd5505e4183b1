#include "sentinel/stream.hpp"

#include <fstream>

#include "json_io.hpp"
#include "sentinel/errors.hpp"

namespace sentinel {

using detail::json;

std::string serialize_frame(const FrameRecord& f) {
  json dets = json::array();
  for (const auto& d : f.detections) {
    json jd = {{"class", d.cls}, {"score", d.score}, {"bbox", detail::bbox_to_json(d.bbox)}};
    if (d.plate) {
      jd["plate"] = {{"bbox", detail::bbox_to_json(d.plate->bbox)},
                     {"text", d.plate->text},
                     {"score", d.plate->text_score}};
    }
    dets.push_back(std::move(jd));
  }
  json j = {{"frame", f.frame_index}, {"timestamp_ms", f.timestamp_ms}, {"detections", dets}};
  return j.dump();
}

void write_stream(std::ostream& out, std::span<const FrameRecord> frames) {
  for (const auto& f : frames) out << serialize_frame(f) << '\n';
}

FrameRecord parse_frame_line(std::string_view text, std::size_t line_no) {
  FrameRecord f;
  try {
    const json j = json::parse(text);
    f.frame_index = j.at("frame").get<std::int64_t>();
    f.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    for (const auto& jd : j.at("detections")) {
      Detection d;
      d.cls = jd.at("class").get<std::string>();
      d.score = jd.at("score").get<double>();
      d.bbox = detail::bbox_from_json(jd.at("bbox"));
      if (!(d.score >= 0.0 && d.score <= 1.0)) throw std::invalid_argument("score outside [0,1]");
      if (!d.bbox.valid()) throw std::invalid_argument("bbox needs x1<x2, y1<y2, finite");
      if (auto it = jd.find("plate"); it != jd.end() && !it->is_null()) {
        PlatePayload p;
        p.bbox = detail::bbox_from_json(it->at("bbox"));
        p.text = it->at("text").get<std::string>();
        p.text_score = it->at("score").get<double>();
        if (!(p.text_score >= 0.0 && p.text_score <= 1.0)) {
          throw std::invalid_argument("plate score outside [0,1]");
        }
        if (!p.bbox.valid()) throw std::invalid_argument("invalid plate bbox");
        d.plate = std::move(p);
      }
      f.detections.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw ParseError(line_no, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
  return f;
}

std::optional<FrameRecord> StreamReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    FrameRecord f = parse_frame_line(text, line_);
    if (last_frame_ && f.frame_index <= *last_frame_) {
      throw MonotonicityViolation(line_, "frame " + std::to_string(f.frame_index) +
                                             " does not follow frame " +
                                             std::to_string(*last_frame_));
    }
    if (last_frame_ && f.timestamp_ms < last_ts_) {
      throw MonotonicityViolation(line_, "timestamp decreases");
    }
    last_frame_ = f.frame_index;
    last_ts_ = f.timestamp_ms;
    return f;
  }
  return std::nullopt;
}

std::vector<FrameRecord> read_stream_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open stream " + path.string());
  StreamReader reader(in);
  std::vector<FrameRecord> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace sentinel
