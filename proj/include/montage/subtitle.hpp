#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace montage {

/// Half-open interval on the media timeline, in milliseconds.
struct TimeSpan {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  std::int64_t duration() const noexcept { return end_ms - start_ms; }
  bool valid() const noexcept { return start_ms >= 0 && end_ms > start_ms; }

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

struct SubtitleCue {
  int index = 0;  // 1-based, renumbered in time order
  TimeSpan span;
  std::vector<std::string> lines;

  friend bool operator==(const SubtitleCue&, const SubtitleCue&) = default;
};

struct Sentence {
  std::size_t id = 0;  // 0-based ordinal within the document
  std::string text;
  TimeSpan span;
  std::vector<int> source_cues;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

enum class Encoding { Utf8, Latin1 };

/// Parses SRT content. Without a hint, UTF-8 is tried first and Latin-1 is
/// the fallback; a UTF-8 byte-order mark is skipped. Cues come back sorted by
/// start time (stable) and renumbered 1..n.
std::vector<SubtitleCue> parse_srt(std::string_view bytes,
                                   std::optional<Encoding> encoding_hint = std::nullopt);

/// Serializes cues as UTF-8 SRT using each cue's own index.
std::string to_srt(std::span<const SubtitleCue> cues);

std::optional<std::int64_t> parse_timestamp(std::string_view ts);
std::string format_timestamp(std::int64_t ms);

struct SentenceOptions {
  // Cues further apart than this always start a new sentence.
  std::int64_t gap_boundary_ms = 10'000;
};

/// Joins cue text into sentence units. Sound tags (square brackets and
/// all-caps parentheses) and markup are removed per cue; sentences break on
/// terminal punctuation (. ! ? and ellipses) except after guarded
/// abbreviations; stored text has punctuation stripped, apostrophes inside
/// words kept.
std::vector<Sentence> assemble_sentences(std::span<const SubtitleCue> cues,
                                         const SentenceOptions& options = {});

/// Removes markup and hearing-impaired sound tags from one cue's joined text.
std::string strip_cue_tags(std::string_view text);

/// Replaces punctuation with spaces, keeping word-internal apostrophes, and
/// collapses whitespace.
std::string strip_punctuation(std::string_view text);

/// Line-delimited records: "id<TAB>start_ms<TAB>end_ms<TAB>text".
std::string to_sentence_records(std::span<const Sentence> sentences);
std::vector<Sentence> parse_sentence_records(std::string_view records);

}  // namespace montage
