#include "montage/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "montage/error.hpp"
#include "montage/text.hpp"

namespace montage {

namespace {

std::uint32_t read_u32(std::string_view b, std::size_t pos) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + 3])) << 24;
}

std::uint16_t read_u16(std::string_view b, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[pos]) |
                                    static_cast<unsigned char>(b[pos + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

double decode_sample(std::string_view b, std::size_t pos, std::uint16_t format, std::uint16_t bits) {
  if (format == 3) {
    if (bits == 32) {
      const std::uint32_t raw = read_u32(b, pos);
      return static_cast<double>(std::bit_cast<float>(raw));
    }
    const std::uint64_t raw = static_cast<std::uint64_t>(read_u32(b, pos)) |
                              static_cast<std::uint64_t>(read_u32(b, pos + 4)) << 32;
    return std::bit_cast<double>(raw);
  }
  switch (bits) {
    case 8:
      return (static_cast<double>(static_cast<unsigned char>(b[pos])) - 128.0) / 128.0;
    case 16:
      return static_cast<double>(static_cast<std::int16_t>(read_u16(b, pos))) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(static_cast<unsigned char>(b[pos]) |
                                                 static_cast<unsigned char>(b[pos + 1]) << 8 |
                                                 static_cast<unsigned char>(b[pos + 2]) << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    default:
      return static_cast<double>(static_cast<std::int32_t>(read_u32(b, pos))) / 2147483648.0;
  }
}

}  // namespace

PcmClip parse_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw Error(ErrorCode::UnsupportedAudio, "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  std::string_view data;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const std::size_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, b.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw Error(ErrorCode::UnsupportedAudio, "short fmt chunk");
      format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format == 0xFFFE && avail >= 26) format = read_u16(b, body + 24);  // extensible sub-format
      have_fmt = true;
    } else if (id == "data") {
      data = b.substr(body, avail);
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data.data() == nullptr) throw Error(ErrorCode::UnsupportedAudio, "missing fmt or data chunk");
  const bool pcm_ok = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == 3 && (bits == 32 || bits == 64);
  if (!(pcm_ok || float_ok) || channels == 0 || rate == 0) {
    throw Error(ErrorCode::UnsupportedAudio, "unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                                 std::to_string(bits) + " bits)");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data.size() / frame_bytes;
  PcmClip clip;
  clip.sample_rate = rate;
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += decode_sample(data, f * frame_bytes + c * bytes_per_sample, format, bits);
    }
    clip.samples[f] = acc / channels;
  }
  return clip;
}

std::string encode_wav(const PcmClip& clip, WavSampleFormat format) {
  const bool is_float = format == WavSampleFormat::Float32;
  const std::uint16_t bits = is_float ? 32 : 16;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));
  const auto rate = static_cast<std::uint32_t>(std::lround(clip.sample_rate));

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, is_float ? 3 : 1);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : clip.samples) {
    if (is_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    } else {
      const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
  }
  return out;
}

PcmClip parse_raw_samples(std::string_view text_in) {
  PcmClip clip;
  std::istringstream in{std::string(text_in)};
  std::string line;
  bool have_rate = false;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream fields{std::string(t)};
    if (!have_rate) {
      std::string key;
      fields >> key >> clip.sample_rate;
      if (key != "sample_rate" || !fields || !(clip.sample_rate > 0.0)) {
        throw Error(ErrorCode::UnsupportedAudio, "raw samples must start with 'sample_rate <hz>'");
      }
      have_rate = true;
      continue;
    }
    double v = 0.0;
    while (fields >> v) clip.samples.push_back(v);
    if (!fields.eof()) throw Error(ErrorCode::UnsupportedAudio, "malformed raw sample value");
  }
  if (!have_rate) throw Error(ErrorCode::UnsupportedAudio, "raw samples missing sample_rate");
  return clip;
}

PcmClip read_audio(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  if (bytes.size() >= 4 && bytes.compare(0, 4, "RIFF") == 0) return parse_wav(bytes);
  return parse_raw_samples(bytes);
}

}  // namespace montage
