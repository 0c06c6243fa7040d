#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deixis {

enum class ErrorKind {
  EmptyTrajectory,
  NotResampled,
  ModelShapeError,
  SegmentTooShort,
  IncompleteTopology,
  StreamTooShort,
  WrongKind,
  TokenOverlap,
  GeneratorNeedsObjects,
  SessionMismatch,
  ParseError,
  TimeOrderError,
  InvalidArgument,
  IoError,
  MissingTrainingData,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type;
// kind() lets callers (the CLI in particular) map failures to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace deixis
