#include "montage/audio_features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>

#include "montage/error.hpp"

namespace montage {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real forward and inverse transforms of one size with owned buffers.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    spectrum_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(size, real_, spectrum_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, spectrum_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spectrum_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }
  std::span<double> real() noexcept { return {real_, n_}; }
  std::complex<double> bin(std::size_t k) const noexcept { return {spectrum_[k][0], spectrum_[k][1]}; }
  void set_bin(std::size_t k, std::complex<double> v) noexcept {
    spectrum_[k][0] = v.real();
    spectrum_[k][1] = v.imag();
  }
  void forward() noexcept { fftw_execute(forward_); }
  /// Unnormalized inverse (scaled by n).
  void inverse() noexcept { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spectrum_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters over FFT bins, bands x bins row-major.
std::vector<double> mel_filterbank(std::size_t bands, std::size_t nfft, double sample_rate) {
  const std::size_t bins = nfft / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers(bands + 2);
  for (std::size_t i = 0; i < bands + 2; ++i) {
    centers[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(bands + 1));
  }
  std::vector<double> fb(bands * bins, 0.0);
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = centers[b];
    const double mid = centers[b + 1];
    const double hi = centers[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(nfft);
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb[b * bins + k] = w;
    }
  }
  return fb;
}

// Parabolic refinement of a peak at index i of v.
double refine_peak(std::span<const double> v, std::size_t i) {
  if (i == 0 || i + 1 >= v.size()) return static_cast<double>(i);
  const double a = v[i - 1];
  const double b = v[i];
  const double c = v[i + 1];
  const double denom = a - 2.0 * b + c;
  if (denom >= 0.0) return static_cast<double>(i);
  return static_cast<double>(i) + 0.5 * (a - c) / denom;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

PcmClip slice(const PcmClip& clip, const TimeSpan& span) {
  PcmClip out;
  out.sample_rate = clip.sample_rate;
  const auto to_index = [&](std::int64_t ms) {
    const double idx = std::round(static_cast<double>(ms) * clip.sample_rate / 1000.0);
    return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(clip.samples.size())));
  };
  const std::size_t b = to_index(span.start_ms);
  const std::size_t e = std::max(b, to_index(span.end_ms));
  out.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(b),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(e));
  return out;
}

LldContours extract_llds(const PcmClip& clip, const LldConfig& config) {
  if (!(clip.sample_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be > 0");
  const double sr = clip.sample_rate;
  const auto frame_len = static_cast<std::size_t>(std::lround(sr * config.frame_ms / 1000.0));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(sr * config.hop_ms / 1000.0)));
  if (frame_len < 2 || clip.samples.size() < frame_len) {
    throw Error(ErrorCode::ClipTooShort, "clip shorter than one analysis frame");
  }
  const std::size_t frames = 1 + (clip.samples.size() - frame_len) / hop;

  const auto lag_min = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(sr / config.f0_max_hz)));
  const auto lag_max = static_cast<std::size_t>(std::ceil(sr / config.f0_min_hz));
  // Room for linear autocorrelation and for quefrencies up to lag_max.
  const std::size_t nfft = next_pow2(std::max(2 * frame_len, 2 * lag_max + 2));
  const std::size_t acf_lag_max = std::min(lag_max, frame_len - 1);
  const std::size_t cep_q_max = std::min(lag_max, nfft / 2 - 1);

  std::vector<double> window(frame_len);
  for (std::size_t n = 0; n < frame_len; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / (frame_len - 1));
  }
  const std::size_t bands = config.mel_bands;
  const auto fb = mel_filterbank(bands, nfft, sr);
  RealFft fft(nfft);
  const std::size_t bins = fft.bins();

  LldContours out;
  for (auto& s : out.series) s.resize(frames);
  std::vector<double> power(bins);
  std::vector<double> log_mel(bands);
  std::vector<double> acf(nfft);
  std::vector<double> cepstrum(nfft);
  std::vector<double> prefix_sq(frame_len + 1);

  for (std::size_t f = 0; f < frames; ++f) {
    const std::span<const double> x(clip.samples.data() + f * hop, frame_len);

    double energy = 0.0;
    prefix_sq[0] = 0.0;
    for (std::size_t n = 0; n < frame_len; ++n) {
      energy += x[n] * x[n];
      prefix_sq[n + 1] = energy;
    }
    out.series[static_cast<std::size_t>(Lld::RmsEnergy)][f] = std::sqrt(energy / frame_len);

    std::size_t crossings = 0;
    for (std::size_t n = 1; n < frame_len; ++n) {
      if ((x[n] >= 0.0) != (x[n - 1] >= 0.0)) ++crossings;
    }
    out.series[static_cast<std::size_t>(Lld::Zcr)][f] = static_cast<double>(crossings) / frame_len;

    // Voicing: peak normalized autocorrelation over the pitch lag band.
    double voicing = 0.0;
    if (energy > 0.0) {
      auto buf = fft.real();
      std::fill(buf.begin(), buf.end(), 0.0);
      std::copy(x.begin(), x.end(), buf.begin());
      fft.forward();
      for (std::size_t k = 0; k < bins; ++k) fft.set_bin(k, std::norm(fft.bin(k)));
      fft.inverse();
      std::copy(buf.begin(), buf.end(), acf.begin());
      for (std::size_t lag = lag_min; lag <= acf_lag_max; ++lag) {
        const double head = prefix_sq[frame_len - lag];
        const double tail = energy - prefix_sq[lag];
        if (head <= 0.0 || tail <= 0.0) continue;
        const double r = acf[lag] / static_cast<double>(nfft) / std::sqrt(head * tail);
        voicing = std::max(voicing, r);
      }
      voicing = std::clamp(voicing, 0.0, 1.0);
    }
    out.series[static_cast<std::size_t>(Lld::VoicingProb)][f] = voicing;

    // Windowed spectrum for MFCC and cepstrum.
    {
      auto buf = fft.real();
      std::fill(buf.begin(), buf.end(), 0.0);
      for (std::size_t n = 0; n < frame_len; ++n) buf[n] = x[n] * window[n];
      fft.forward();
      for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(fft.bin(k));
    }

    for (std::size_t b = 0; b < bands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb[b * bins + k] * power[k];
      log_mel[b] = std::log(std::max(e, 1e-10));
    }
    for (std::size_t c = 1; c <= 12; ++c) {
      double acc = 0.0;
      for (std::size_t b = 0; b < bands; ++b) {
        acc += log_mel[b] * std::cos(std::numbers::pi * static_cast<double>(c) * (static_cast<double>(b) + 0.5) /
                                     static_cast<double>(bands));
      }
      out.series[static_cast<std::size_t>(Lld::Mfcc1) + c - 1][f] = std::sqrt(2.0 / bands) * acc;
    }

    double f0 = 0.0;
    if (voicing >= config.voicing_threshold) {
      // Real cepstrum of the log magnitude, floored 60 dB below the peak so
      // window sidelobes do not masquerade as harmonic structure.
      const double peak = *std::max_element(power.begin(), power.end());
      const double floor_power = peak * 1e-6;
      for (std::size_t k = 0; k < bins; ++k) fft.set_bin(k, 0.5 * std::log(std::max(power[k], floor_power)));
      fft.inverse();
      auto buf = fft.real();
      std::copy(buf.begin(), buf.end(), cepstrum.begin());
      // Only interior local maxima count: a slope running into the band edge
      // is spectral envelope, not a period.
      std::optional<std::size_t> best;
      for (std::size_t q = std::max<std::size_t>(lag_min, 1); q <= cep_q_max && q + 1 < nfft; ++q) {
        const bool local_max = cepstrum[q] > cepstrum[q - 1] && cepstrum[q] >= cepstrum[q + 1];
        if (local_max && (!best || cepstrum[q] > cepstrum[*best])) best = q;
      }
      if (best) f0 = sr / refine_peak(cepstrum, *best);
    }
    out.series[static_cast<std::size_t>(Lld::F0)][f] = f0;
  }
  return out;
}

std::vector<double> delta(std::span<const double> contour) {
  const std::size_t n = contour.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double prev = contour[t == 0 ? 0 : t - 1];
    const double next = contour[t + 1 < n ? t + 1 : n - 1];
    d[t] = 0.5 * (next - prev);
  }
  return d;
}

std::array<double, kFunctionalCount> contour_functionals(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::TooFewFrames, "functionals need at least 2 frames");
  const double T = static_cast<double>(n);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= T;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= T;
  m3 /= T;
  m4 /= T;
  const double scale = std::max(1.0, std::abs(mean));
  const bool flat = m2 <= (1e-12 * scale) * (1e-12 * scale);

  // First occurrences for the relative positions.
  const auto min_it = std::min_element(x.begin(), x.end());
  const auto first_max = std::max_element(x.begin(), x.end());

  // Least squares against t = 0..n-1.
  const double t_mean = (T - 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxy += dt * (x[t] - mean);
    sxx += dt * dt;
  }
  const double slope = sxy / sxx;
  const double offset = mean - slope * t_mean;
  double mse = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double r = x[t] - (offset + slope * static_cast<double>(t));
    mse += r * r;
  }
  mse /= T;

  std::array<double, kFunctionalCount> f{};
  f[static_cast<std::size_t>(Functional::Mean)] = mean;
  f[static_cast<std::size_t>(Functional::StdDev)] = flat ? 0.0 : std::sqrt(m2);
  f[static_cast<std::size_t>(Functional::Kurtosis)] = flat ? 0.0 : m4 / (m2 * m2);
  f[static_cast<std::size_t>(Functional::Skewness)] = flat ? 0.0 : m3 / std::pow(m2, 1.5);
  f[static_cast<std::size_t>(Functional::Min)] = *min_it;
  f[static_cast<std::size_t>(Functional::Max)] = *first_max;
  f[static_cast<std::size_t>(Functional::Range)] = *first_max - *min_it;
  f[static_cast<std::size_t>(Functional::MinPos)] = static_cast<double>(min_it - x.begin()) / (T - 1.0);
  f[static_cast<std::size_t>(Functional::MaxPos)] = static_cast<double>(first_max - x.begin()) / (T - 1.0);
  f[static_cast<std::size_t>(Functional::LinRegOffset)] = offset;
  f[static_cast<std::size_t>(Functional::LinRegSlope)] = slope;
  f[static_cast<std::size_t>(Functional::LinRegMse)] = mse;
  return f;
}

std::size_t feature_index(bool delta_block, Lld lld, Functional functional) noexcept {
  return (delta_block ? kLldCount * kFunctionalCount : 0) + static_cast<std::size_t>(lld) * kFunctionalCount +
         static_cast<std::size_t>(functional);
}

EmotionVector functionals(const LldContours& contours) {
  const std::size_t frames = contours.frames();
  for (const auto& s : contours.series) {
    if (s.size() != frames) throw Error(ErrorCode::InvalidArgument, "contours differ in length");
  }
  if (frames < 2) throw Error(ErrorCode::TooFewFrames, "functionals need at least 2 frames");

  EmotionVector v;
  for (std::size_t block = 0; block < 2; ++block) {
    for (std::size_t l = 0; l < kLldCount; ++l) {
      const auto& series = contours.series[l];
      const auto f = block == 0 ? contour_functionals(series) : contour_functionals(delta(series));
      std::copy(f.begin(), f.end(), v.values.begin() + static_cast<std::ptrdiff_t>(
                                                           feature_index(block == 1, static_cast<Lld>(l),
                                                                         Functional::Mean)));
    }
  }
  return v;
}

std::vector<std::string> feature_names() {
  static constexpr std::array<const char*, kFunctionalCount> kFunctionalNames = {
      "mean", "stddev", "kurtosis", "skewness", "min", "max", "range", "minpos", "maxpos",
      "linreg_offset", "linreg_slope", "linreg_mse"};
  std::array<std::string, kLldCount> lld_names;
  lld_names[0] = "rms_energy";
  for (std::size_t i = 1; i <= 12; ++i) lld_names[i] = "mfcc_" + std::to_string(i);
  lld_names[13] = "zcr";
  lld_names[14] = "voicing_prob";
  lld_names[15] = "f0";

  std::vector<std::string> names;
  names.reserve(kEmotionVectorSize);
  for (int block = 0; block < 2; ++block) {
    for (const auto& lld : lld_names) {
      for (const char* fn : kFunctionalNames) names.push_back(lld + (block ? "_de_" : "_") + fn);
    }
  }
  return names;
}

NormalizationStats fit_normalization(std::span<const EmotionVector> reference) {
  if (reference.empty()) throw Error(ErrorCode::InvalidArgument, "normalization needs at least one vector");
  NormalizationStats stats;
  const double n = static_cast<double>(reference.size());
  for (std::size_t i = 0; i < kEmotionVectorSize; ++i) {
    double mean = 0.0;
    for (const auto& v : reference) mean += v.values[i];
    mean /= n;
    double var = 0.0;
    for (const auto& v : reference) var += (v.values[i] - mean) * (v.values[i] - mean);
    stats.mean[i] = mean;
    stats.stddev[i] = std::sqrt(var / n);
  }
  return stats;
}

double emotion_similarity(const EmotionVector& a, const EmotionVector& b, const NormalizationStats* stats) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < kEmotionVectorSize; ++i) {
    double x = a.values[i];
    double y = b.values[i];
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw Error(ErrorCode::InvalidArgument, "emotion vectors must be finite");
    }
    if (stats != nullptr) {
      const double sd = stats->stddev[i];
      if (!(sd > 0.0)) continue;
      x = (x - stats->mean[i]) / sd;
      y = (y - stats->mean[i]) / sd;
    }
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cannot compare a zero feature vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string to_emotion_records(std::span<const std::pair<std::string, EmotionVector>> rows) {
  std::string out;
  for (const auto& [id, v] : rows) {
    out += id;
    for (double x : v.values) out += " " + format_double(x);
    out += "\n";
  }
  return out;
}

std::vector<std::pair<std::string, EmotionVector>> parse_emotion_records(std::string_view records) {
  std::vector<std::pair<std::string, EmotionVector>> rows;
  std::istringstream in{std::string(records)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::pair<std::string, EmotionVector> row;
    fields >> row.first;
    for (double& x : row.second.values) {
      if (!(fields >> x)) throw Error(ErrorCode::InvalidArgument, "emotion record needs 384 values");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace montage
