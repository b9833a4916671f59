// montage: command-line front end for the tribute and talk pipelines plus a
// few single-module utilities.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "montage/audio_io.hpp"
#include "montage/error.hpp"
#include "montage/pipeline.hpp"
#include "montage/scene_detect.hpp"
#include "montage/subtitle.hpp"
#include "montage/text.hpp"
#include "montage/textrank.hpp"

namespace {

constexpr int kExitInput = 1;
constexpr int kExitStage = 2;

struct Overrides {
  std::string config;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> support_threshold;
  std::optional<std::size_t> threads;
  bool render_script = false;

  std::optional<std::string> film_subtitles, film_audio, film_video, frame_stats, song;
  std::optional<double> emotion_threshold, scene_threshold;

  std::optional<std::string> lecture_subtitles, manifest, strategy;
  std::optional<std::size_t> top_k, topics, summary_size;
  std::optional<double> lambda;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON pipeline configuration");
  cmd->add_option("-o,--output-dir", o.output_dir, "Directory for edl.json, report.json and caches");
  cmd->add_option("--seed", o.seed, "Top-level random seed");
  cmd->add_option("--support-threshold", o.support_threshold, "Support Sets cosine threshold");
  cmd->add_option("--threads", o.threads, "Worker threads for per-scene features (0 = all cores)");
  cmd->add_flag("--render-script", o.render_script, "Also write render.sh");
}

montage::PipelineConfig build_config(montage::Mode mode, const Overrides& o) {
  montage::PipelineConfig c;
  if (!o.config.empty()) c = montage::load_config(o.config);
  c.mode = mode;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) c.seed = *o.seed;
  if (o.support_threshold) c.support_threshold = *o.support_threshold;
  if (o.threads) c.threads = *o.threads;
  if (o.render_script) c.render_script = true;
  if (o.film_subtitles) c.film_subtitles = *o.film_subtitles;
  if (o.film_audio) c.film_audio = *o.film_audio;
  if (o.film_video) c.film_video = *o.film_video;
  if (o.frame_stats) c.frame_stats = *o.frame_stats;
  if (o.song) c.song = *o.song;
  if (o.emotion_threshold) c.emotion_threshold = *o.emotion_threshold;
  if (o.scene_threshold) c.scene_threshold = *o.scene_threshold;
  if (o.lecture_subtitles) c.lecture_subtitles = *o.lecture_subtitles;
  if (o.manifest) c.manifest = *o.manifest;
  if (o.strategy) c.strategy = montage::parse_strategy(*o.strategy);
  if (o.top_k) c.top_k = *o.top_k;
  if (o.topics) c.topics = *o.topics;
  if (o.summary_size) c.summary_size = *o.summary_size;
  if (o.lambda) c.lambda = *o.lambda;
  return c;
}

int run(montage::Mode mode, const Overrides& o) {
  montage::PipelineConfig config;
  try {
    config = build_config(mode, o);
    montage::validate(config);
  } catch (const montage::Error& e) {
    std::cerr << "montage: invalid input: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    const auto result = montage::run_pipeline(config);
    for (const auto& path : result.written) std::cout << path.string() << "\n";
    std::cerr << "montage: " << result.edl.entries.size() << " clips, " << result.edl.total_duration_ms << " ms\n";
    return 0;
  } catch (const montage::StageError& e) {
    std::cerr << "montage: " << e.what() << "\n";
    return kExitStage;
  } catch (const montage::Error& e) {
    std::cerr << "montage: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "montage: " << e.what() << "\n";
    return kExitStage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build edit decision lists for film tributes and lecture-driven science talks"};
  app.require_subcommand(1);
  Overrides o;
  int status = 0;

  auto* tribute = app.add_subcommand("tribute", "Film tribute synchronized to a song");
  add_common(tribute, o);
  tribute->add_option("--film-subtitles", o.film_subtitles, "Film SRT");
  tribute->add_option("--film-audio", o.film_audio, "Film audio (WAV or raw samples)");
  tribute->add_option("--film-video", o.film_video, "Film video, decoded through the toolchain");
  tribute->add_option("--frame-stats", o.frame_stats, "Precomputed frame stats (skips the video decoder)");
  tribute->add_option("--song", o.song, "Song audio (WAV or raw samples)");
  tribute->add_option("--emotion-threshold", o.emotion_threshold, "Minimum scene/song similarity (default 0.7)");
  tribute->add_option("--scene-threshold", o.scene_threshold, "Luma difference that marks a cut (default 40)");
  tribute->callback([&] { status = run(montage::Mode::Tribute, o); });

  auto* talk = app.add_subcommand("talk", "Science talk built from documentary clips");
  add_common(talk, o);
  talk->add_option("--lecture-subtitles", o.lecture_subtitles, "Lecture SRT");
  talk->add_option("--manifest", o.manifest, "Documentary manifest JSON");
  talk->add_option("--strategy", o.strategy, "sentence-level or two-stage")
      ->check(CLI::IsMember({"sentence-level", "two-stage"}));
  talk->add_option("--top-k", o.top_k, "Candidates per lecture sentence (default 10)");
  talk->add_option("--topics", o.topics, "Sentence-level topic count (default 100)");
  talk->add_option("--summary-size", o.summary_size, "Lecture sentences to keep (default 10)");
  talk->add_option("--lambda", o.lambda, "GRASSHOPPER teleport weight (default 0.95)");
  talk->callback([&] { status = run(montage::Mode::Talk, o); });

  std::string path;
  auto* sentences = app.add_subcommand("sentences", "Print the sentence records of an SRT file");
  sentences->add_option("srt", path)->required();
  sentences->callback([&] {
    const auto cues = montage::parse_srt(montage::text::read_file(path));
    std::cout << montage::to_sentence_records(montage::assemble_sentences(cues));
  });

  auto* normalize = app.add_subcommand("normalize-srt", "Parse and re-serialize an SRT file");
  normalize->add_option("srt", path)->required();
  normalize->callback([&] { std::cout << montage::to_srt(montage::parse_srt(montage::text::read_file(path))); });

  auto* rank = app.add_subcommand("support-sets", "Rank the sentences of an SRT file by Support Sets");
  double threshold = 0.1;
  rank->add_option("srt", path)->required();
  rank->add_option("--threshold", threshold);
  rank->callback([&] {
    const auto s = montage::assemble_sentences(montage::parse_srt(montage::text::read_file(path)));
    const auto vectors = montage::tfidf_vectors(std::span<const montage::Sentence>(s));
    std::cout << montage::to_ranking_records(montage::support_set_rank(vectors, {threshold, std::nullopt}));
  });

  auto* grasshopper = app.add_subcommand("grasshopper", "Rank nodes of a graph record file");
  montage::GrasshopperConfig g;
  grasshopper->add_option("graph", path)->required();
  grasshopper->add_option("--lambda", g.lambda);
  grasshopper->add_option("-k", g.k);
  grasshopper->callback([&] {
    const auto graph = montage::parse_graph_records(montage::text::read_file(path));
    std::cout << montage::to_ranking_records(montage::grasshopper_rank(graph, g));
  });

  auto* scenes = app.add_subcommand("scenes", "Detect scenes in a frame stats file");
  montage::SceneOptions scene_options;
  scenes->add_option("stats", path)->required();
  scenes->add_option("--threshold", scene_options.threshold);
  scenes->callback([&] {
    const auto stats = montage::parse_frame_stats(montage::text::read_file(path));
    for (const auto& s : montage::detect_scenes(stats, scene_options)) {
      std::cout << s.id << ' ' << s.span.start_ms << ' ' << s.span.end_ms << ' ' << s.frame_count << '\n';
    }
  });

  auto* features = app.add_subcommand("features", "Print the 384-value emotion vector of an audio file");
  features->add_option("audio", path)->required();
  features->callback([&] {
    const std::pair<std::string, montage::EmotionVector> row{path, montage::emotion_vector(montage::read_audio(path))};
    std::cout << montage::to_emotion_records({&row, 1});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  } catch (const montage::Error& e) {
    std::cerr << "montage: " << e.what() << "\n";
    return kExitInput;
  }
  return status;
}
