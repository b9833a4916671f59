#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "montage/audio_features.hpp"

namespace fixture {

namespace fs = std::filesystem;

// --- signals ---------------------------------------------------------------

montage::PcmClip sine(double hz, double sample_rate, double seconds, double amplitude = 0.5);
/// Sum of the first harmonics of f0 with 1/h amplitudes (a voiced-like tone).
montage::PcmClip harmonic(double f0, double sample_rate, double seconds, double amplitude = 0.5);
montage::PcmClip noise(std::uint64_t seed, double sample_rate, double seconds, double amplitude = 0.3);
montage::PcmClip square(double hz, double sample_rate, double seconds);
montage::PcmClip silence(double sample_rate, double seconds);

// --- subtitles -------------------------------------------------------------

struct CueSpec {
  std::int64_t start_ms;
  std::int64_t end_ms;
  std::string text;
};

/// Well-formed SRT with cues numbered from 1 in the given order.
std::string srt(const std::vector<CueSpec>& cues);

/// One generated SRT file plus the dialog tokens it carries, in time order.
struct SrtCase {
  std::string name;
  std::string bytes;
  std::vector<std::string> dialog_tokens;
};

/// Seeded corpus covering odd numbering, missing index lines, SDH tags,
/// markup, CRLF, BOM, Latin-1, '.' millisecond separators, multi-line and
/// out-of-order cues.
std::vector<SrtCase> srt_corpus(std::uint64_t seed, std::size_t count);

// --- topic corpora ---------------------------------------------------------

struct TopicCorpus {
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;  // generating topic of each doc
};

/// Documents drawn uniformly from one of two disjoint vocabularies
/// ("a1".."aV" and "b1".."bV"), interleaved A, B, A, B, ...
TopicCorpus two_topic_corpus(std::uint64_t seed, std::size_t docs_per_topic = 50, std::size_t vocab = 20);

// --- end-to-end fixtures ----------------------------------------------------

struct TributeFixture {
  fs::path dir;
  fs::path config;  // JSON with every input path, relative to dir
  std::vector<CueSpec> cues;            // one sentence per cue
  std::vector<std::string> sentence_texts;  // normalized text of each cue
  std::vector<int> cue_scene;           // scene of each cue
  std::vector<bool> scene_is_tonal;     // tonal scenes match the song
  std::int64_t song_ms = 0;
  std::vector<std::int64_t> scene_bounds_ms;  // expected scene starts plus the film end
};

/// 30 s film with six 5 s scenes (three sound like the song), 20 cues, frame
/// stats with cut spikes (plus one flash frame), and a 5 s tonal song.
TributeFixture write_tribute_fixture(const fs::path& dir);

struct TalkFixture {
  fs::path dir;
  fs::path config;
  std::vector<std::string> documentary_ids;
  std::size_t matching_documentary = 0;
  std::size_t lecture_sentences = 0;
};

/// A lecture plus three documentaries with disjoint vocabularies; the
/// lecture shares its vocabulary with exactly one of them.
TalkFixture write_talk_fixture(const fs::path& dir, const std::string& strategy = "sentence-level");

/// Fresh empty directory under the system temp dir.
fs::path temp_dir(const std::string& name);

}  // namespace fixture
