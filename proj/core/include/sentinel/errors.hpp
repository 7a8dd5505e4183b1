#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sentinel {

// Root of every error the engine raises. Callers that only need a
// diagnostic can catch this; the CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateQuad : public Error {
 public:
  using Error::Error;
};

class PointAtInfinity : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class NonMonotonicFrame : public Error {
 public:
  using Error::Error;
};

class EmptySamples : public Error {
 public:
  EmptySamples() : Error("speed assignment needs at least one sample") {}
};

class EmptyTruth : public Error {
 public:
  EmptyTruth() : Error("character error rate is undefined for an empty truth string") {}
};

class NoMatches : public Error {
 public:
  using Error::Error;
};

class NoGroundTruth : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input on a given 1-based line of a line-oriented file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MonotonicityViolation : public ParseError {
 public:
  using ParseError::ParseError;
};

// The gateway answered, but refused the message (bad number, auth, quota).
class GatewayRejected : public Error {
 public:
  explicit GatewayRejected(std::string status)
      : Error("gateway rejected message: " + status), status_(std::move(status)) {}

  const std::string& status() const noexcept { return status_; }

 private:
  std::string status_;
};

// Connection failures and 5xx responses after the retry budget is spent.
class TransportFailed : public Error {
 public:
  using Error::Error;
};

// Wraps a module error with the frame and pipeline stage it came from.
class PipelineError : public Error {
 public:
  PipelineError(long long frame, const std::string& stage, const std::string& what)
      : Error("frame " + std::to_string(frame) + ", stage " + stage + ": " + what),
        frame_(frame),
        stage_(stage) {}

  long long frame() const noexcept { return frame_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  long long frame_;
  std::string stage_;
};

}  // namespace sentinel
