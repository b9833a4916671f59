#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "montage/audio_features.hpp"
#include "montage/composer.hpp"
#include "montage/error.hpp"
#include "montage/scene_detect.hpp"

namespace montage {

enum class Mode { Tribute, Talk };
enum class Strategy { SentenceLevel, TwoStage };

std::string_view to_string(Mode mode);
std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

/// Command templates for the external media toolchain. {input} is replaced by
/// the shell-quoted media path; {width}, {height} and {fps} by the values below.
struct ToolchainConfig {
  std::string decode_gray =
      "ffmpeg -v error -i {input} -vf scale={width}:{height},format=gray -r {fps} -f rawvideo -";
  std::string decode_audio = "ffmpeg -v error -i {input} -vn -ac 1 -ar 16000 -f wav -";
  std::size_t width = 64;
  std::size_t height = 36;
  double fps = 25.0;
  RenderTemplates render;
};

struct PipelineConfig {
  Mode mode = Mode::Tribute;
  std::filesystem::path output_dir = "montage-out";
  std::uint64_t seed = 1;

  // Film tribute inputs. Scene audio comes from film_audio, or is decoded from
  // film_video; frame_stats bypasses the video decoder.
  std::filesystem::path film_subtitles;
  std::filesystem::path film_audio;
  std::filesystem::path film_video;
  std::filesystem::path frame_stats;
  std::filesystem::path song;
  double emotion_threshold = kDefaultEmotionThreshold;
  double scene_threshold = kDefaultSceneThreshold;
  std::size_t min_scene_frames = 10;
  bool normalize_features = true;  // z-normalize against the film's own scene vectors

  // Science talk inputs.
  std::filesystem::path lecture_subtitles;
  std::filesystem::path manifest;  // {"documentaries": [{"id", "subtitles", "media"}]}
  Strategy strategy = Strategy::SentenceLevel;
  std::size_t summary_size = 10;
  double lambda = 0.95;
  std::size_t top_k = 10;
  std::size_t topics = 100;         // sentence-level model
  std::size_t doc_topics = 100;     // two-stage, document-level model
  std::size_t subset_topics = 10;   // two-stage, model over the selected subset
  std::size_t subset_size = 5;
  std::size_t em_iters = 50;
  std::size_t min_df = 2;

  double support_threshold = 0.1;
  std::size_t threads = 0;  // 0 = hardware concurrency; never changes results
  bool render_script = false;
  ToolchainConfig toolchain;
};

/// Reads a JSON config; relative paths resolve against the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
/// Applies JSON keys on top of `config` (same keys as load_config).
void apply_config_json(PipelineConfig& config, std::string_view json, const std::filesystem::path& base_dir = {});
/// Effective configuration as JSON, without the output directory.
std::string config_echo(const PipelineConfig& config);

/// Checks mode-specific inputs exist and parameters are in range. Throws
/// Error(InvalidArgument) before any stage runs.
void validate(const PipelineConfig& config);

/// A module error tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& message);
  const std::string& stage() const noexcept { return stage_; }
  ErrorCode code() const noexcept { return code_; }

 private:
  std::string stage_;
  ErrorCode code_;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct RunResult {
  EditDecisionList edl;
  std::string edl_json;
  std::string report_json;  // deterministic for fixed config, inputs and seed
  std::vector<StageTiming> timings;
  std::vector<std::filesystem::path> written;
};

/// Runs the configured pipeline and writes edl.json, report.json,
/// timings.json (and render.sh when requested) under output_dir.
RunResult run_pipeline(const PipelineConfig& config);
RunResult run_tribute(const PipelineConfig& config);
RunResult run_talk(const PipelineConfig& config);

enum class FrameStatsSource { Precomputed, Cache, Toolchain };
std::string_view to_string(FrameStatsSource source);

struct FrameStatsResult {
  std::vector<FrameStat> stats;
  FrameStatsSource source = FrameStatsSource::Toolchain;
  std::string content_hash;
};

/// Mean absolute difference between consecutive 8-bit grayscale frames
/// packed back to back, each width * height bytes.
std::vector<FrameStat> frame_stats_from_gray(std::span<const std::uint8_t> frames, std::size_t width,
                                             std::size_t height, double fps);

/// Decodes `media` to 8-bit gray frames with the toolchain and computes
/// frame differences. Results are cached under cache_dir by a hash of the
/// media bytes and decoder settings. Throws ToolchainUnavailable when the
/// decoder cannot be run or produces no frames; supply precomputed stats then.
FrameStatsResult extract_frame_stats(const std::filesystem::path& media, const ToolchainConfig& toolchain,
                                     const std::filesystem::path& cache_dir);

/// EmotionVector of a clip: LLDs, deltas and their functionals.
EmotionVector emotion_vector(const PcmClip& clip);

/// Emotion vectors of each scene's audio, computed in parallel; the result
/// does not depend on the thread count.
std::vector<EmotionVector> scene_emotion_vectors(const PcmClip& film_audio, std::span<const Scene> scenes,
                                                 std::size_t threads = 0);

}  // namespace montage
