#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "montage/subtitle.hpp"

namespace montage {

struct PcmClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  double sample_rate = 0.0;

  double duration_ms() const noexcept {
    return sample_rate > 0.0 ? 1000.0 * static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Samples covering `span`, clamped to the clip.
PcmClip slice(const PcmClip& clip, const TimeSpan& span);

inline constexpr std::size_t kLldCount = 16;
inline constexpr std::size_t kFunctionalCount = 12;
inline constexpr std::size_t kEmotionVectorSize = 2 * kLldCount * kFunctionalCount;  // 384
inline constexpr double kDefaultEmotionThreshold = 0.7;

// Contour order inside LldContours and the EmotionVector layout.
enum class Lld : std::size_t {
  RmsEnergy = 0,
  Mfcc1 = 1,  // Mfcc1 + i for MFCC i+1, up to MFCC 12 at index 12
  Zcr = 13,
  VoicingProb = 14,
  F0 = 15,
};

enum class Functional : std::size_t {
  Mean,
  StdDev,
  Kurtosis,
  Skewness,
  Min,
  Max,
  Range,
  MinPos,
  MaxPos,
  LinRegOffset,
  LinRegSlope,
  LinRegMse,
};

struct LldContours {
  std::array<std::vector<double>, kLldCount> series;

  std::size_t frames() const noexcept { return series[0].size(); }
  const std::vector<double>& operator[](Lld which) const { return series[static_cast<std::size_t>(which)]; }
};

struct LldConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t mel_bands = 26;
  double f0_min_hz = 50.0;
  double f0_max_hz = 500.0;
  double voicing_threshold = 0.4;  // F0 is reported only at or above this
};

/// Per-frame low-level descriptors: RMS energy, MFCC 1-12 (Hamming window,
/// mel filterbank, log, DCT-II), zero-crossing rate, ACF voicing probability
/// and cepstral F0 (0 when unvoiced).
LldContours extract_llds(const PcmClip& clip, const LldConfig& config = {});

/// Symmetric two-point difference with edge replication.
std::vector<double> delta(std::span<const double> contour);

/// The twelve functionals of one contour, in Functional order. Needs >= 2
/// points; skewness and kurtosis are 0 for a constant contour.
std::array<double, kFunctionalCount> contour_functionals(std::span<const double> contour);

/// 384 values: the 16 contours then their 16 deltas, each contributing its
/// 12 functionals. Index = block * 192 + lld * 12 + functional.
struct EmotionVector {
  std::array<double, kEmotionVectorSize> values{};
};

EmotionVector functionals(const LldContours& contours);
std::size_t feature_index(bool delta_block, Lld lld, Functional functional) noexcept;
/// Column names in vector order, e.g. "mfcc_3_de_linreg_slope".
std::vector<std::string> feature_names();

/// Per-dimension mean and standard deviation used for z-normalization.
struct NormalizationStats {
  std::array<double, kEmotionVectorSize> mean{};
  std::array<double, kEmotionVectorSize> stddev{};
};

NormalizationStats fit_normalization(std::span<const EmotionVector> reference);

/// Cosine similarity of the z-normalized vectors (raw vectors when `stats`
/// is null). Dimensions with zero reference spread are ignored.
double emotion_similarity(const EmotionVector& a, const EmotionVector& b, const NormalizationStats* stats = nullptr);

/// "id v0 ... v383" per line, columns in feature_names() order.
std::string to_emotion_records(std::span<const std::pair<std::string, EmotionVector>> rows);
std::vector<std::pair<std::string, EmotionVector>> parse_emotion_records(std::string_view records);

}  // namespace montage
