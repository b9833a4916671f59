#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "montage/audio_features.hpp"
#include "montage/scene_detect.hpp"
#include "montage/subtitle.hpp"
#include "montage/textrank.hpp"
#include "montage/topic_model.hpp"

namespace montage {

struct Clip {
  std::string source_id;
  TimeSpan span;
  std::size_t origin_sentence_id = 0;
  double rank_score = 0.0;

  friend bool operator==(const Clip&, const Clip&) = default;
};

struct AudioTrack {
  std::string source_id;
  TimeSpan span;

  friend bool operator==(const AudioTrack&, const AudioTrack&) = default;
};

struct EditDecisionList {
  std::string kind;                           // "tribute" or "talk"
  std::map<std::string, std::string> sources;  // source id -> media path
  std::vector<Clip> entries;
  std::optional<AudioTrack> audio_track;
  std::int64_t total_duration_ms = 0;
  bool partial_fill = false;
  std::vector<std::string> warnings;

  friend bool operator==(const EditDecisionList&, const EditDecisionList&) = default;
};

struct TributeOptions {
  double threshold = kDefaultEmotionThreshold;
  const NormalizationStats* normalization = nullptr;  // z-normalize before comparing when set
  std::string film_id = "film";
  std::string song_id = "song";
};

/// Walks sentences in rank order and admits a sentence clip when its
/// enclosing scene sounds like the song (similarity strictly above the
/// threshold). Admission stops once the song is covered; the last clip is
/// trimmed at its end so the cut matches the song exactly. Overlapping
/// clips are merged, then the entries are put in film order.
/// `scene_vectors[i]` belongs to `scenes[i]`.
EditDecisionList plan_tribute(const RankedList& ranked, std::span<const Sentence> sentences,
                              std::span<const Scene> scenes, std::span<const EmotionVector> scene_vectors,
                              const EmotionVector& song_vector, std::int64_t song_duration_ms,
                              const TributeOptions& options = {});

struct DocumentarySource {
  std::string id;
  std::vector<Sentence> sentences;
};

struct SentenceKey {
  std::size_t documentary = 0;
  std::size_t sentence = 0;

  friend auto operator<=>(const SentenceKey&, const SentenceKey&) = default;
};

/// The deduplicated candidate pool (sorted by key) and its Support Sets
/// ranking; ranking indices point into `keys`.
struct CandidatePool {
  std::vector<SentenceKey> keys;
  RankedList ranking;

  /// Rank position of a pool member, or npos when absent.
  std::size_t rank_of(const SentenceKey& key) const;
};

CandidatePool rank_candidates(std::span<const CandidateSet> candidate_sets,
                              std::span<const DocumentarySource> documentaries,
                              const SupportSetOptions& options = {});

/// For each lecture sentence (in the given order), emits the best pool-ranked
/// candidate of its set that has not been used yet. A candidate whose clip
/// overlaps one already emitted from the same documentary counts as used.
/// Lecture sentences with nothing left are skipped and reported in warnings.
EditDecisionList plan_talk(std::span<const std::size_t> lecture_order, std::span<const CandidateSet> candidate_sets,
                           const CandidatePool& pool, std::span<const DocumentarySource> documentaries);

/// JSON document: version, kind, sources, entries (source_id, in_ms, out_ms,
/// sentence_id, rank_score), audio_track, total_duration_ms, warnings.
std::string to_edl_json(const EditDecisionList& edl);
EditDecisionList parse_edl_json(std::string_view json);

/// Command templates for the external media toolchain. Placeholders:
/// {input} {output} {in_s} {out_s} {duration_s} {list} {video} {audio}.
struct RenderTemplates {
  std::string cut = "ffmpeg -y -ss {in_s} -i {input} -t {duration_s} -c:v libx264 -c:a aac {output}";
  std::string concat = "ffmpeg -y -f concat -safe 0 -i {list} -c copy {output}";
  std::string mux = "ffmpeg -y -i {video} -ss {in_s} -i {audio} -map 0:v -map 1:a -t {duration_s} -c:v copy {output}";
};

/// POSIX shell script that cuts every entry, concatenates the pieces and,
/// when the EDL has an audio track, lays the song under the result.
std::string render_script(const EditDecisionList& edl, const RenderTemplates& templates = {},
                          std::string_view output_name = "montage.mp4");

}  // namespace montage
