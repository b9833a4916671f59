#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "montage/audio_features.hpp"

namespace montage {

/// RIFF/WAVE with integer PCM (8/16/24/32-bit) or IEEE float (32/64-bit)
/// samples. Multichannel input is down-mixed by averaging.
PcmClip parse_wav(std::string_view bytes);

enum class WavSampleFormat { Pcm16, Float32 };
std::string encode_wav(const PcmClip& clip, WavSampleFormat format = WavSampleFormat::Pcm16);

/// Raw sample records: a "sample_rate <hz>" line followed by whitespace
/// separated samples. Lines starting with '#' are comments.
PcmClip parse_raw_samples(std::string_view text);

/// Dispatches on the RIFF magic.
PcmClip read_audio(const std::filesystem::path& path);

}  // namespace montage
