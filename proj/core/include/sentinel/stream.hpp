#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sentinel/detection.hpp"

namespace sentinel {

// One line of the detection stream:
//   {"frame":12,"timestamp_ms":1717200000480,"detections":[
//     {"class":"car","score":0.91,"bbox":[x1,y1,x2,y2],
//      "plate":{"bbox":[x1,y1,x2,y2],"text":"UAB123C","score":0.88}}]}
// "plate" may be absent or null.
struct FrameRecord {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  std::vector<Detection> detections;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

std::string serialize_frame(const FrameRecord& f);
void write_stream(std::ostream& out, std::span<const FrameRecord> frames);

// Pulls frames one line at a time. Blank lines are skipped. Throws
// ParseError for malformed lines and MonotonicityViolation when frame
// indices stop strictly increasing or timestamps decrease.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in) : in_(in) {}

  std::optional<FrameRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_frame_;
  std::int64_t last_ts_ = 0;
};

FrameRecord parse_frame_line(std::string_view text, std::size_t line_no);

std::vector<FrameRecord> read_stream_file(const std::filesystem::path& path);

}  // namespace sentinel
