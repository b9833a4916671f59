#include "montage/pipeline.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <optional>
#include <thread>

#include "json.hpp"

#include "montage/audio_io.hpp"
#include "montage/hash.hpp"
#include "montage/subtitle.hpp"
#include "montage/text.hpp"
#include "montage/textrank.hpp"
#include "montage/topic_model.hpp"

namespace fs = std::filesystem;

namespace montage {

using Json = nlohmann::ordered_json;

std::string_view to_string(Mode mode) { return mode == Mode::Tribute ? "tribute" : "talk"; }

std::string_view to_string(Strategy strategy) {
  return strategy == Strategy::SentenceLevel ? "sentence-level" : "two-stage";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "sentence-level") return Strategy::SentenceLevel;
  if (name == "two-stage") return Strategy::TwoStage;
  throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(FrameStatsSource source) {
  switch (source) {
    case FrameStatsSource::Precomputed:
      return "precomputed";
    case FrameStatsSource::Cache:
      return "cache";
    case FrameStatsSource::Toolchain:
      return "toolchain";
  }
  return "unknown";
}

StageError::StageError(std::string stage, ErrorCode code, const std::string& message)
    : std::runtime_error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)), code_(code) {}

// ---------------------------------------------------------------------------
// Configuration

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <class T>
T get_checked(const Json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' has the wrong type");
  }
}

void apply_toolchain(ToolchainConfig& tc, const Json& j) {
  for (const auto& [key, value] : j.items()) {
    if (key == "decode_gray") {
      tc.decode_gray = get_checked<std::string>(value, key);
    } else if (key == "decode_audio") {
      tc.decode_audio = get_checked<std::string>(value, key);
    } else if (key == "width") {
      tc.width = get_checked<std::size_t>(value, key);
    } else if (key == "height") {
      tc.height = get_checked<std::size_t>(value, key);
    } else if (key == "fps") {
      tc.fps = get_checked<double>(value, key);
    } else if (key == "render") {
      for (const auto& [rk, rv] : value.items()) {
        if (rk == "cut") {
          tc.render.cut = get_checked<std::string>(rv, rk);
        } else if (rk == "concat") {
          tc.render.concat = get_checked<std::string>(rv, rk);
        } else if (rk == "mux") {
          tc.render.mux = get_checked<std::string>(rv, rk);
        } else {
          throw Error(ErrorCode::InvalidArgument, "unknown render template '" + rk + "'");
        }
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown toolchain key '" + key + "'");
    }
  }
}

Json toolchain_json(const ToolchainConfig& tc) {
  return Json{{"decode_gray", tc.decode_gray},
              {"decode_audio", tc.decode_audio},
              {"width", tc.width},
              {"height", tc.height},
              {"fps", tc.fps},
              {"render", {{"cut", tc.render.cut}, {"concat", tc.render.concat}, {"mux", tc.render.mux}}}};
}

Json echo_json(const PipelineConfig& c) {
  Json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  if (c.mode == Mode::Tribute) {
    j["film_subtitles"] = c.film_subtitles.string();
    j["film_audio"] = c.film_audio.string();
    j["film_video"] = c.film_video.string();
    j["frame_stats"] = c.frame_stats.string();
    j["song"] = c.song.string();
    j["emotion_threshold"] = c.emotion_threshold;
    j["scene_threshold"] = c.scene_threshold;
    j["min_scene_frames"] = c.min_scene_frames;
    j["normalize_features"] = c.normalize_features;
  } else {
    j["lecture_subtitles"] = c.lecture_subtitles.string();
    j["manifest"] = c.manifest.string();
    j["strategy"] = to_string(c.strategy);
    j["summary_size"] = c.summary_size;
    j["lambda"] = c.lambda;
    j["top_k"] = c.top_k;
    j["topics"] = c.topics;
    j["doc_topics"] = c.doc_topics;
    j["subset_topics"] = c.subset_topics;
    j["subset_size"] = c.subset_size;
    j["em_iters"] = c.em_iters;
    j["min_df"] = c.min_df;
  }
  j["support_threshold"] = c.support_threshold;
  j["render_script"] = c.render_script;
  j["toolchain"] = toolchain_json(c.toolchain);
  return j;
}

}  // namespace

void apply_config_json(PipelineConfig& c, std::string_view text, const fs::path& base) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");

  for (const auto& [key, value] : j.items()) {
    auto path = [&] { return resolve(base, get_checked<std::string>(value, key)); };
    if (key == "mode") {
      const auto m = get_checked<std::string>(value, key);
      if (m != "tribute" && m != "talk") throw Error(ErrorCode::InvalidArgument, "mode must be tribute or talk");
      c.mode = m == "tribute" ? Mode::Tribute : Mode::Talk;
    } else if (key == "output_dir") {
      c.output_dir = path();
    } else if (key == "seed") {
      c.seed = get_checked<std::uint64_t>(value, key);
    } else if (key == "film_subtitles") {
      c.film_subtitles = path();
    } else if (key == "film_audio") {
      c.film_audio = path();
    } else if (key == "film_video") {
      c.film_video = path();
    } else if (key == "frame_stats") {
      c.frame_stats = path();
    } else if (key == "song") {
      c.song = path();
    } else if (key == "emotion_threshold") {
      c.emotion_threshold = get_checked<double>(value, key);
    } else if (key == "scene_threshold") {
      c.scene_threshold = get_checked<double>(value, key);
    } else if (key == "min_scene_frames") {
      c.min_scene_frames = get_checked<std::size_t>(value, key);
    } else if (key == "normalize_features") {
      c.normalize_features = get_checked<bool>(value, key);
    } else if (key == "lecture_subtitles") {
      c.lecture_subtitles = path();
    } else if (key == "manifest") {
      c.manifest = path();
    } else if (key == "strategy") {
      c.strategy = parse_strategy(get_checked<std::string>(value, key));
    } else if (key == "summary_size") {
      c.summary_size = get_checked<std::size_t>(value, key);
    } else if (key == "lambda") {
      c.lambda = get_checked<double>(value, key);
    } else if (key == "top_k") {
      c.top_k = get_checked<std::size_t>(value, key);
    } else if (key == "topics") {
      c.topics = get_checked<std::size_t>(value, key);
    } else if (key == "doc_topics") {
      c.doc_topics = get_checked<std::size_t>(value, key);
    } else if (key == "subset_topics") {
      c.subset_topics = get_checked<std::size_t>(value, key);
    } else if (key == "subset_size") {
      c.subset_size = get_checked<std::size_t>(value, key);
    } else if (key == "em_iters") {
      c.em_iters = get_checked<std::size_t>(value, key);
    } else if (key == "min_df") {
      c.min_df = get_checked<std::size_t>(value, key);
    } else if (key == "support_threshold") {
      c.support_threshold = get_checked<double>(value, key);
    } else if (key == "threads") {
      c.threads = get_checked<std::size_t>(value, key);
    } else if (key == "render_script") {
      c.render_script = get_checked<bool>(value, key);
    } else if (key == "toolchain") {
      apply_toolchain(c.toolchain, value);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
}

PipelineConfig load_config(const fs::path& path) {
  PipelineConfig config;
  apply_config_json(config, text::read_file(path), path.parent_path());
  return config;
}

std::string config_echo(const PipelineConfig& config) { return echo_json(config).dump(2) + "\n"; }

namespace {

struct ManifestEntry {
  std::string id;
  fs::path subtitles;
  fs::path media;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "manifest is not valid JSON: " + std::string(e.what()));
  }
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> out;
  if (!j.contains("documentaries") || !j["documentaries"].is_array()) {
    throw Error(ErrorCode::InvalidArgument, "manifest needs a 'documentaries' array");
  }
  for (const auto& d : j["documentaries"]) {
    ManifestEntry e;
    e.id = get_checked<std::string>(d.at("id"), "id");
    e.subtitles = resolve(base, get_checked<std::string>(d.at("subtitles"), "subtitles"));
    if (d.contains("media")) e.media = resolve(base, get_checked<std::string>(d["media"], "media"));
    out.push_back(std::move(e));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "manifest lists no documentaries");
  return out;
}

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "missing " + std::string(what) + " path");
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " not found: " + path.string());
  }
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (c.output_dir.empty()) throw Error(ErrorCode::InvalidArgument, "output directory is empty");
  if (!(c.support_threshold >= 0.0 && c.support_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "support threshold must be in [0, 1)");
  }
  if (c.mode == Mode::Tribute) {
    require_file(c.film_subtitles, "film subtitles");
    require_file(c.song, "song audio");
    if (!c.film_audio.empty()) {
      require_file(c.film_audio, "film audio");
    } else {
      require_file(c.film_video, "film video (needed to decode film audio)");
    }
    if (!c.frame_stats.empty()) {
      require_file(c.frame_stats, "frame stats");
    } else {
      require_file(c.film_video, "film video (needed for frame stats)");
    }
    if (!(c.emotion_threshold >= -1.0 && c.emotion_threshold <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "emotion threshold must be in [-1, 1]");
    }
    if (!(c.scene_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "scene threshold must be > 0");
    if (c.min_scene_frames == 0) throw Error(ErrorCode::InvalidArgument, "min scene frames must be >= 1");
  } else {
    require_file(c.lecture_subtitles, "lecture subtitles");
    require_file(c.manifest, "documentary manifest");
    for (const auto& d : read_manifest(c.manifest)) require_file(d.subtitles, "subtitles of documentary " + d.id);
    if (!(c.lambda > 0.0 && c.lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be in (0, 1]");
    if (c.summary_size == 0 || c.top_k == 0) throw Error(ErrorCode::InvalidArgument, "summary size and k must be >= 1");
    if (c.topics == 0 || c.doc_topics == 0 || c.subset_topics == 0) {
      throw Error(ErrorCode::InvalidArgument, "topic counts must be >= 1");
    }
    if (c.subset_size == 0) throw Error(ErrorCode::InvalidSubsetSize, "subset size must be >= 1");
    if (c.em_iters == 0) throw Error(ErrorCode::InvalidArgument, "em iterations must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// Toolchain adapter

namespace {

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out += ch;
    }
  }
  return out + "'";
}

std::string fill_template(std::string tmpl, std::string_view key, std::string_view value) {
  const std::string token = "{" + std::string(key) + "}";
  for (std::size_t pos = tmpl.find(token); pos != std::string::npos; pos = tmpl.find(token, pos + value.size())) {
    tmpl.replace(pos, token.size(), value);
  }
  return tmpl;
}

std::string expand_decoder(const std::string& tmpl, const fs::path& media, const ToolchainConfig& tc) {
  char fps[32];
  std::snprintf(fps, sizeof(fps), "%g", tc.fps);
  std::string cmd = fill_template(tmpl, "input", shell_quote(media.string()));
  cmd = fill_template(cmd, "width", std::to_string(tc.width));
  cmd = fill_template(cmd, "height", std::to_string(tc.height));
  return fill_template(cmd, "fps", fps);
}

// Runs a shell command and returns its stdout.
std::string run_command(const std::string& command) {
  struct Closer {
    void operator()(FILE* f) const {
      if (f) pclose(f);
    }
  };
  FILE* raw = popen(command.c_str(), "r");
  if (raw == nullptr) throw Error(ErrorCode::ToolchainUnavailable, "cannot start: " + command);
  std::string out;
  char buf[1 << 16];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), raw)) > 0) out.append(buf, n);
  const int status = pclose(raw);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::ToolchainUnavailable,
                "command failed (status " + std::to_string(status) + "): " + command +
                    "; supply precomputed frame stats or a film audio file instead");
  }
  return out;
}

}  // namespace

std::vector<FrameStat> frame_stats_from_gray(std::span<const std::uint8_t> frames, std::size_t width,
                                             std::size_t height, double fps) {
  const std::size_t frame_bytes = width * height;
  if (frame_bytes == 0 || !(fps > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad frame geometry or rate");
  const std::size_t count = frames.size() / frame_bytes;
  std::vector<FrameStat> stats;
  stats.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    FrameStat s;
    s.frame_index = static_cast<std::int64_t>(f);
    s.timestamp_ms = std::llround(1000.0 * static_cast<double>(f) / fps);
    if (f > 0) {
      const auto* cur = frames.data() + f * frame_bytes;
      const auto* prev = cur - frame_bytes;
      std::uint64_t total = 0;
      for (std::size_t p = 0; p < frame_bytes; ++p) total += cur[p] > prev[p] ? cur[p] - prev[p] : prev[p] - cur[p];
      s.mean_abs_luma_diff = static_cast<double>(total) / static_cast<double>(frame_bytes);
    }
    stats.push_back(s);
  }
  return stats;
}

FrameStatsResult extract_frame_stats(const fs::path& media, const ToolchainConfig& toolchain,
                                     const fs::path& cache_dir) {
  if (toolchain.decode_gray.empty()) throw Error(ErrorCode::ToolchainUnavailable, "no frame decoder configured");
  if (toolchain.width == 0 || toolchain.height == 0 || !(toolchain.fps > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "decoder geometry and frame rate must be positive");
  }
  const std::string bytes = text::read_file(media);
  char settings[128];
  std::snprintf(settings, sizeof(settings), "\n%zux%zu@%.17g\n", toolchain.width, toolchain.height, toolchain.fps);
  FrameStatsResult result;
  result.content_hash = sha256_hex(sha256_hex(bytes) + settings + toolchain.decode_gray);

  const fs::path cached = cache_dir / (result.content_hash + ".framestats");
  if (fs::is_regular_file(cached)) {
    result.stats = parse_frame_stats(text::read_file(cached));
    result.source = FrameStatsSource::Cache;
    return result;
  }

  const std::string raw = run_command(expand_decoder(toolchain.decode_gray, media, toolchain));
  const auto* data = reinterpret_cast<const std::uint8_t*>(raw.data());
  result.stats = frame_stats_from_gray({data, raw.size()}, toolchain.width, toolchain.height, toolchain.fps);
  if (result.stats.empty()) throw Error(ErrorCode::ToolchainUnavailable, "decoder produced no frames");
  result.source = FrameStatsSource::Toolchain;
  fs::create_directories(cache_dir);
  text::write_file(cached, to_frame_stat_records(result.stats));
  return result;
}

// ---------------------------------------------------------------------------
// Features

EmotionVector emotion_vector(const PcmClip& clip) { return functionals(extract_llds(clip)); }

std::vector<EmotionVector> scene_emotion_vectors(const PcmClip& film_audio, std::span<const Scene> scenes,
                                                 std::size_t threads) {
  std::vector<EmotionVector> out(scenes.size());
  std::vector<std::exception_ptr> errors(scenes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenes.size(); i = next++) {
      try {
        out[i] = emotion_vector(slice(film_audio, scenes[i].span));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, scenes.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

class Run {
 public:
  explicit Run(const PipelineConfig& config) : config_(config) {}

  template <class F>
  auto stage(const std::string& name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    auto record = [&] {
      const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
      timings.push_back({name, dt.count()});
    };
    try {
      auto value = body();
      record();
      return value;
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e.code(), e.what());
    } catch (const fs::filesystem_error& e) {
      throw StageError(name, ErrorCode::Io, e.what());
    }
  }

  void warn(const std::string& source, const std::vector<std::string>& messages) {
    for (const auto& m : messages) warnings.push_back(source + ": " + m);
  }

  Json input(const fs::path& path) const {
    return Json{{"path", path.string()}, {"sha256", sha256_hex(text::read_file(path))}};
  }

  // Writes `contents` to output_dir/name, refusing anything that would land
  // outside the output directory.
  fs::path write(const std::string& name, std::string_view contents) {
    const fs::path root = fs::weakly_canonical(config_.output_dir);
    const fs::path target = fs::weakly_canonical(root / name);
    const auto rel = target.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") {
      throw Error(ErrorCode::Io, "refusing to write outside the output directory: " + target.string());
    }
    fs::create_directories(target.parent_path());
    text::write_file(target, contents);
    written.push_back(target);
    return target;
  }

  RunResult finish(EditDecisionList edl, Json report) {
    RunResult result;
    warn("composer", edl.warnings);
    report["warnings"] = warnings;
    result.edl_json = to_edl_json(edl);
    result.report_json = report.dump(2) + "\n";
    write("edl.json", result.edl_json);
    write("report.json", result.report_json);
    if (config_.render_script) write("render.sh", render_script(edl, config_.toolchain.render));
    Json t = Json::array();
    for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"ms", s.ms}});
    write("timings.json", Json{{"timings", t}}.dump(2) + "\n");
    result.edl = std::move(edl);
    result.timings = std::move(timings);
    result.written = std::move(written);
    return result;
  }

  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::vector<fs::path> written;

 private:
  const PipelineConfig& config_;
};

std::vector<Sentence> sentences_of(const fs::path& srt) {
  const auto cues = parse_srt(text::read_file(srt));
  return assemble_sentences(cues);
}

Json ranked_json(const RankedList& ranked, std::span<const Sentence> sentences) {
  Json out = Json::array();
  for (const auto& item : ranked.items) {
    const auto& s = sentences[item.index];
    out.push_back({{"sentence_id", s.id},
                   {"score", item.score},
                   {"start_ms", s.span.start_ms},
                   {"end_ms", s.span.end_ms},
                   {"text", s.text}});
  }
  return out;
}

Json entries_json(const EditDecisionList& edl) {
  Json out = Json::array();
  for (const auto& e : edl.entries) {
    out.push_back({{"source_id", e.source_id},
                   {"sentence_id", e.origin_sentence_id},
                   {"score", e.rank_score},
                   {"in_ms", e.span.start_ms},
                   {"out_ms", e.span.end_ms}});
  }
  return out;
}

}  // namespace

RunResult run_tribute(const PipelineConfig& config) {
  if (config.mode != Mode::Tribute) throw Error(ErrorCode::InvalidArgument, "config mode is not tribute");
  validate(config);
  fs::create_directories(config.output_dir);
  Run run(config);

  Json report;
  report["version"] = 1;
  report["mode"] = "tribute";
  report["config"] = echo_json(config);

  Json inputs;
  inputs["film_subtitles"] = run.input(config.film_subtitles);
  inputs["song"] = run.input(config.song);
  if (!config.film_audio.empty()) inputs["film_audio"] = run.input(config.film_audio);
  if (!config.film_video.empty()) inputs["film_video"] = run.input(config.film_video);
  if (!config.frame_stats.empty()) inputs["frame_stats"] = run.input(config.frame_stats);
  report["inputs"] = std::move(inputs);

  const auto sentences = run.stage("parse", [&] { return sentences_of(config.film_subtitles); });
  const auto ranked = run.stage("rank", [&] {
    const auto vectors = tfidf_vectors(std::span<const Sentence>(sentences));
    return support_set_rank(vectors, SupportSetOptions{config.support_threshold, std::nullopt});
  });
  run.warn("textrank", ranked.warnings);

  const auto frames = run.stage("frame-stats", [&] {
    if (!config.frame_stats.empty()) {
      FrameStatsResult r;
      const std::string bytes = text::read_file(config.frame_stats);
      r.stats = parse_frame_stats(bytes);
      r.source = FrameStatsSource::Precomputed;
      r.content_hash = sha256_hex(bytes);
      return r;
    }
    return extract_frame_stats(config.film_video, config.toolchain, config.output_dir / "cache");
  });
  const auto scenes = run.stage("scenes", [&] {
    return detect_scenes(frames.stats, SceneOptions{config.scene_threshold, config.min_scene_frames});
  });

  const auto film_audio = run.stage("film-audio", [&] {
    if (!config.film_audio.empty()) return read_audio(config.film_audio);
    return parse_wav(run_command(expand_decoder(config.toolchain.decode_audio, config.film_video, config.toolchain)));
  });
  const auto song = run.stage("song-audio", [&] { return read_audio(config.song); });
  const auto song_duration_ms = static_cast<std::int64_t>(std::llround(song.duration_ms()));

  const auto scene_vectors =
      run.stage("features", [&] { return scene_emotion_vectors(film_audio, scenes, config.threads); });
  const auto song_vector = run.stage("song-features", [&] { return emotion_vector(song); });

  std::optional<NormalizationStats> norm;
  if (config.normalize_features && scene_vectors.size() >= 2) {
    norm = fit_normalization(scene_vectors);
  } else if (config.normalize_features) {
    run.warnings.push_back("audio-features: a single scene gives no spread to normalize by; using raw vectors");
  }
  const NormalizationStats* stats = norm ? &*norm : nullptr;

  Json scene_table = Json::array();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    Json row{{"id", scenes[i].id},
             {"start_ms", scenes[i].span.start_ms},
             {"end_ms", scenes[i].span.end_ms},
             {"frames", scenes[i].frame_count}};
    try {
      row["similarity"] = emotion_similarity(scene_vectors[i], song_vector, stats);
    } catch (const Error&) {
      row["similarity"] = nullptr;
    }
    scene_table.push_back(std::move(row));
  }

  auto edl = run.stage("compose", [&] {
    TributeOptions options;
    options.threshold = config.emotion_threshold;
    options.normalization = stats;
    return plan_tribute(ranked, sentences, scenes, scene_vectors, song_vector, song_duration_ms, options);
  });
  edl.sources["film"] = (!config.film_video.empty() ? config.film_video : config.film_audio).string();
  edl.sources["song"] = config.song.string();

  report["frame_stats"] = {{"source", to_string(frames.source)},
                           {"sha256", frames.content_hash},
                           {"frames", frames.stats.size()}};
  report["sentences"] = sentences.size();
  report["ranking"] = ranked_json(ranked, sentences);
  report["scenes"] = std::move(scene_table);
  report["song_duration_ms"] = song_duration_ms;
  report["selected"] = entries_json(edl);
  report["total_duration_ms"] = edl.total_duration_ms;
  report["partial_fill"] = edl.partial_fill;
  return run.finish(std::move(edl), std::move(report));
}

RunResult run_talk(const PipelineConfig& config) {
  if (config.mode != Mode::Talk) throw Error(ErrorCode::InvalidArgument, "config mode is not talk");
  validate(config);
  fs::create_directories(config.output_dir);
  Run run(config);

  Json report;
  report["version"] = 1;
  report["mode"] = "talk";
  report["config"] = echo_json(config);

  const auto manifest = read_manifest(config.manifest);
  Json inputs;
  inputs["lecture_subtitles"] = run.input(config.lecture_subtitles);
  inputs["manifest"] = run.input(config.manifest);
  Json doc_inputs = Json::array();
  for (const auto& d : manifest) {
    Json row = run.input(d.subtitles);
    row["id"] = d.id;
    doc_inputs.push_back(std::move(row));
  }
  inputs["documentaries"] = std::move(doc_inputs);
  report["inputs"] = std::move(inputs);

  const auto lecture = run.stage("parse-lecture", [&] { return sentences_of(config.lecture_subtitles); });
  const auto documentaries = run.stage("parse-documentaries", [&] {
    std::vector<DocumentarySource> docs;
    for (const auto& d : manifest) docs.push_back({d.id, sentences_of(d.subtitles)});
    return docs;
  });

  const auto summary = run.stage("summarize", [&] {
    const auto vectors = tfidf_vectors(std::span<const Sentence>(lecture));
    GrasshopperConfig g;
    g.lambda = config.lambda;
    g.k = config.summary_size;
    return grasshopper_rank(cosine_graph(vectors), g);
  });
  run.warn("grasshopper", summary.warnings);
  std::vector<std::size_t> lecture_order = summary.indices();
  std::sort(lecture_order.begin(), lecture_order.end());

  LdaConfig lda;
  lda.seed = config.seed;
  lda.em_iters = config.em_iters;
  lda.min_df = config.min_df;
  Json models = Json::array();
  auto model_json = [](std::string name, const TopicModel& m) {
    return Json{{"name", std::move(name)},
                {"topics", m.topics()},
                {"vocabulary", m.vocab_size()},
                {"alpha", m.alpha()},
                {"em_iterations", m.elbo_trace.size()},
                {"bound", m.elbo_trace.empty() ? 0.0 : m.elbo_trace.back()}};
  };

  std::vector<std::size_t> active(documentaries.size());
  for (std::size_t d = 0; d < active.size(); ++d) active[d] = d;
  if (config.strategy == Strategy::TwoStage) {
    active = run.stage("subset", [&] {
      std::vector<std::vector<std::string>> docs;
      for (const auto& d : documentaries) {
        std::vector<std::string> tokens;
        for (const auto& s : d.sentences) {
          auto t = topic_tokens(s.text);
          tokens.insert(tokens.end(), t.begin(), t.end());
        }
        docs.push_back(std::move(tokens));
      }
      LdaConfig doc_lda = lda;
      doc_lda.topics = config.doc_topics;
      const auto model = train_lda(docs, doc_lda);
      models.push_back(model_json("documentary-level", model));
      std::vector<TopicMixture> mixtures;
      for (const auto& d : docs) mixtures.push_back(infer_mixture(model, d));
      std::vector<std::string> lecture_tokens;
      for (const auto& s : lecture) {
        auto t = topic_tokens(s.text);
        lecture_tokens.insert(lecture_tokens.end(), t.begin(), t.end());
      }
      auto chosen = two_stage_subset(model, lecture_tokens, mixtures, config.subset_size);
      std::sort(chosen.begin(), chosen.end());
      return chosen;
    });
    Json subset = Json::array();
    for (auto d : active) subset.push_back(documentaries[d].id);
    report["subset"] = std::move(subset);
  }

  auto candidate_sets = run.stage("candidates", [&] {
    std::vector<std::vector<std::string>> docs;
    std::vector<std::pair<std::size_t, std::size_t>> keys;
    for (auto d : active) {
      for (std::size_t s = 0; s < documentaries[d].sentences.size(); ++s) {
        docs.push_back(topic_tokens(documentaries[d].sentences[s].text));
        keys.emplace_back(d, s);
      }
    }
    LdaConfig sentence_lda = lda;
    sentence_lda.topics = config.strategy == Strategy::TwoStage ? config.subset_topics : config.topics;
    const auto model = train_lda(docs, sentence_lda);
    models.push_back(model_json("sentence-level", model));

    std::vector<IndexedMixture> pool;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto m = infer_mixture(model, docs[i]);
      if (m.out_of_vocabulary) continue;  // no evidence to match on
      pool.push_back({keys[i].first, keys[i].second, std::move(m)});
    }
    std::vector<TopicMixture> queries;
    for (auto id : lecture_order) {
      auto m = infer_mixture(model, topic_tokens(lecture[id].text));
      if (m.out_of_vocabulary) {
        run.warnings.push_back("topic-model: lecture sentence " + std::to_string(id) +
                               " has no known terms; its mixture is the prior mean");
      }
      queries.push_back(std::move(m));
    }
    auto sets = topk_candidates(queries, pool, config.top_k);
    for (auto& set : sets) set.lecture_sentence = lecture_order[set.lecture_sentence];
    return sets;
  });
  report["models"] = std::move(models);

  const auto pool = run.stage("rank-candidates", [&] {
    return rank_candidates(candidate_sets, documentaries, SupportSetOptions{config.support_threshold, std::nullopt});
  });
  run.warn("textrank", pool.ranking.warnings);

  auto edl = run.stage("compose", [&] { return plan_talk(lecture_order, candidate_sets, pool, documentaries); });
  for (std::size_t d = 0; d < manifest.size(); ++d) {
    edl.sources[manifest[d].id] = (manifest[d].media.empty() ? manifest[d].subtitles : manifest[d].media).string();
  }

  report["lecture_sentences"] = lecture.size();
  report["summary"] = ranked_json(summary, lecture);
  Json docs_json = Json::array();
  for (const auto& d : documentaries) docs_json.push_back({{"id", d.id}, {"sentences", d.sentences.size()}});
  report["documentaries"] = std::move(docs_json);
  Json sets_json = Json::array();
  for (const auto& set : candidate_sets) {
    Json cands = Json::array();
    for (const auto& c : set.candidates) {
      cands.push_back({{"documentary", documentaries[c.documentary].id}, {"sentence", c.sentence}, {"score", c.score}});
    }
    sets_json.push_back({{"lecture_sentence", set.lecture_sentence}, {"candidates", std::move(cands)}});
  }
  report["candidates"] = std::move(sets_json);
  Json pool_json = Json::array();
  for (const auto& item : pool.ranking.items) {
    const auto& key = pool.keys[item.index];
    pool_json.push_back(
        {{"documentary", documentaries[key.documentary].id}, {"sentence", key.sentence}, {"support", item.score}});
  }
  report["pool"] = std::move(pool_json);
  report["selected"] = entries_json(edl);
  report["total_duration_ms"] = edl.total_duration_ms;
  return run.finish(std::move(edl), std::move(report));
}

RunResult run_pipeline(const PipelineConfig& config) {
  return config.mode == Mode::Tribute ? run_tribute(config) : run_talk(config);
}

}  // namespace montage
