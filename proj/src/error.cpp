#include "montage/error.hpp"

namespace montage {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::InvalidSubsetSize: return "InvalidSubsetSize";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnsupportedAudio: return "UnsupportedAudio";
    case ErrorCode::ClipOutOfRange: return "ClipOutOfRange";
    case ErrorCode::NoQualifyingClips: return "NoQualifyingClips";
    case ErrorCode::ToolchainUnavailable: return "ToolchainUnavailable";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace montage
