#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace montage {

enum class ErrorCode {
  InvalidArgument,
  // subtitle-core
  EmptyFile,
  MalformedTimestamp,
  // topic-model
  EmptyVocabulary,
  InvalidSubsetSize,
  CorruptModel,
  // audio-features
  ClipTooShort,
  TooFewFrames,
  ZeroVector,
  UnsupportedAudio,
  // scene-detect
  ClipOutOfRange,
  // composer
  NoQualifyingClips,
  // orchestration
  ToolchainUnavailable,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace montage
