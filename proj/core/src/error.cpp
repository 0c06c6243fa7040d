#include "deixis/error.hpp"

namespace deixis {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorKind::NotResampled: return "NotResampled";
    case ErrorKind::ModelShapeError: return "ModelShapeError";
    case ErrorKind::SegmentTooShort: return "SegmentTooShort";
    case ErrorKind::IncompleteTopology: return "IncompleteTopology";
    case ErrorKind::StreamTooShort: return "StreamTooShort";
    case ErrorKind::WrongKind: return "WrongKind";
    case ErrorKind::TokenOverlap: return "TokenOverlap";
    case ErrorKind::GeneratorNeedsObjects: return "GeneratorNeedsObjects";
    case ErrorKind::SessionMismatch: return "SessionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TimeOrderError: return "TimeOrderError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::MissingTrainingData: return "MissingTrainingData";
  }
  return "Unknown";
}

}  // namespace deixis
