#include "trek/error.hpp"

namespace trek {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoFrames: return "NoFrames";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorKind::DuplicateTimestep: return "DuplicateTimestep";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::WriteError: return "WriteError";
    case ErrorKind::InvalidK: return "InvalidK";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::InsufficientMatches: return "InsufficientMatches";
    case ErrorKind::NoConsensus: return "NoConsensus";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotEssential: return "NotEssential";
    case ErrorKind::InsufficientFrames: return "InsufficientFrames";
    case ErrorKind::FrameTooSmall: return "FrameTooSmall";
    case ErrorKind::MissingPose: return "MissingPose";
    case ErrorKind::EmptyQuestion: return "EmptyQuestion";
    case ErrorKind::InvalidTruth: return "InvalidTruth";
    case ErrorKind::DetectorFailed: return "DetectorFailed";
    case ErrorKind::ConfigurationError: return "ConfigurationError";
    case ErrorKind::AlignmentError: return "AlignmentError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace trek
