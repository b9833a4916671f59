#include "montage/scene_detect.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "montage/error.hpp"
#include "montage/text.hpp"

namespace montage {

std::vector<Scene> detect_scenes(std::span<const FrameStat> stats, const SceneOptions& options) {
  if (stats.empty()) throw Error(ErrorCode::InvalidArgument, "detect_scenes: no frames");
  if (!(options.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "scene threshold must be > 0");
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!(stats[i].mean_abs_luma_diff >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative frame difference");
    if (i > 0 && (stats[i].frame_index <= stats[i - 1].frame_index ||
                  stats[i].timestamp_ms < stats[i - 1].timestamp_ms)) {
      throw Error(ErrorCode::InvalidArgument, "frame stats must be ordered by frame index and time");
    }
  }

  const std::size_t n = stats.size();
  const std::size_t min_len = std::max<std::size_t>(1, options.min_scene_frames);
  // Greedy earliest acceptance keeps the largest set of cuts spaced at least
  // min_len apart, which makes the scene count monotone in the threshold.
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 1; i < n; ++i) {
    if (!(stats[i].mean_abs_luma_diff > options.threshold)) continue;
    if (i - starts.back() < min_len || n - i < min_len) continue;
    if (stats[i].timestamp_ms <= stats[starts.back()].timestamp_ms) continue;
    starts.push_back(i);
  }

  std::vector<Scene> scenes;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t first = starts[s];
    const std::size_t next = s + 1 < starts.size() ? starts[s + 1] : n;
    Scene scene;
    scene.id = s;
    scene.first_frame = first;
    scene.frame_count = next - first;
    scene.span.start_ms = s == 0 ? 0 : stats[first].timestamp_ms;
    scene.span.end_ms = s + 1 < starts.size() ? stats[next].timestamp_ms : stats.back().timestamp_ms;
    scene.span.end_ms = std::max(scene.span.end_ms, scene.span.start_ms + 1);
    scenes.push_back(scene);
  }
  return scenes;
}

const Scene& enclosing_scene(std::span<const Scene> scenes, const TimeSpan& clip) {
  if (scenes.empty()) throw Error(ErrorCode::ClipOutOfRange, "no scenes");
  auto it = std::partition_point(scenes.begin(), scenes.end(),
                                 [&](const Scene& s) { return s.span.end_ms <= clip.start_ms; });
  const Scene* best = nullptr;
  std::int64_t best_overlap = 0;
  for (; it != scenes.end() && it->span.start_ms < clip.end_ms; ++it) {
    const std::int64_t overlap =
        std::min(it->span.end_ms, clip.end_ms) - std::max(it->span.start_ms, clip.start_ms);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = &*it;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::ClipOutOfRange, "clip [" + std::to_string(clip.start_ms) + ", " +
                                               std::to_string(clip.end_ms) + ") lies outside the film timeline");
  }
  return *best;
}

std::vector<FrameStat> parse_frame_stats(std::string_view records) {
  std::vector<FrameStat> stats;
  std::istringstream in{std::string(records)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    FrameStat s;
    char c1 = 0;
    char c2 = 0;
    std::istringstream fields{std::string(t)};
    if (!(fields >> s.frame_index >> c1 >> s.timestamp_ms >> c2 >> s.mean_abs_luma_diff) || c1 != ',' ||
        c2 != ',') {
      throw Error(ErrorCode::InvalidArgument, "frame stats line " + std::to_string(line_no) +
                                                  ": expected 'frame_index,timestamp_ms,diff'");
    }
    stats.push_back(s);
  }
  return stats;
}

std::string to_frame_stat_records(std::span<const FrameStat> stats) {
  std::string out;
  char buf[96];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g\n", static_cast<long long>(s.frame_index),
                  static_cast<long long>(s.timestamp_ms), s.mean_abs_luma_diff);
    out += buf;
  }
  return out;
}

}  // namespace montage
