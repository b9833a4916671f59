#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "montage/subtitle.hpp"

namespace montage {

struct FrameStat {
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ms = 0;
  double mean_abs_luma_diff = 0.0;  // vs the previous frame, 0-255 scale; 0 for the first frame

  friend bool operator==(const FrameStat&, const FrameStat&) = default;
};

struct Scene {
  std::size_t id = 0;
  TimeSpan span;
  std::size_t first_frame = 0;  // position in the FrameStat sequence
  std::size_t frame_count = 0;

  friend bool operator==(const Scene&, const Scene&) = default;
};

inline constexpr double kDefaultSceneThreshold = 40.0;

struct SceneOptions {
  double threshold = kDefaultSceneThreshold;
  std::size_t min_scene_frames = 10;
};

/// Cuts before every frame whose luma difference exceeds the threshold, as
/// long as every scene keeps at least min_scene_frames frames (a short run
/// merges into the scene after it; a short tail merges into the one before).
/// Scenes tile [0, last timestamp].
std::vector<Scene> detect_scenes(std::span<const FrameStat> stats, const SceneOptions& options = {});

/// The scene with the largest overlap with `clip`; ties go to the earlier
/// scene. Throws ClipOutOfRange when the clip misses the timeline.
const Scene& enclosing_scene(std::span<const Scene> scenes, const TimeSpan& clip);

/// "frame_index,timestamp_ms,diff" lines; '#' starts a comment.
std::vector<FrameStat> parse_frame_stats(std::string_view records);
std::string to_frame_stat_records(std::span<const FrameStat> stats);

}  // namespace montage
