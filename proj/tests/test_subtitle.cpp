#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "fixtures.hpp"
#include "montage/error.hpp"
#include "montage/subtitle.hpp"
#include "oracles.hpp"

using namespace montage;

namespace {

std::vector<SubtitleCue> cues_of(const std::vector<std::pair<TimeSpan, std::string>>& rows) {
  std::vector<SubtitleCue> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back({static_cast<int>(i + 1), rows[i].first, {rows[i].second}});
  }
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ParseSrt, MinimalCue) {
  const auto cues = parse_srt("1\n00:00:01,000 --> 00:00:02,500\nHello.\n\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].index, 1);
  EXPECT_EQ(cues[0].span, (TimeSpan{1000, 2500}));
  EXPECT_EQ(cues[0].lines, std::vector<std::string>{"Hello."});
}

TEST(ParseSrt, RenumbersInTimeOrder) {
  const auto cues = parse_srt(
      "5\n00:00:01,000 --> 00:00:02,000\nA\n\n"
      "9\n00:00:03,000 --> 00:00:04,000\nB\n\n"
      "2\n00:00:05,000 --> 00:00:06,000\nC\n\n");
  ASSERT_EQ(cues.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(cues[i].index, i + 1);
    EXPECT_EQ(cues[i].lines[0], std::string(1, static_cast<char>('A' + i)));
  }
}

TEST(ParseSrt, SortsOutOfOrderCues) {
  const auto cues = parse_srt(
      "1\n00:00:05,000 --> 00:00:06,000\nlate\n\n"
      "2\n00:00:01,000 --> 00:00:02,000\nearly\n\n");
  ASSERT_EQ(cues.size(), 2u);
  EXPECT_EQ(cues[0].lines[0], "early");
  EXPECT_EQ(cues[0].index, 1);
  EXPECT_EQ(cues[1].lines[0], "late");
}

TEST(ParseSrt, BadArrowIsMalformed) {
  EXPECT_EQ(code_of([] { parse_srt("1\n00:00:02,000 -> 00:00:01,000\nX\n\n"); }), ErrorCode::MalformedTimestamp);
}

TEST(ParseSrt, EndBeforeStartIsMalformed) {
  EXPECT_EQ(code_of([] { parse_srt("1\n00:00:02,000 --> 00:00:01,000\nX\n\n"); }), ErrorCode::MalformedTimestamp);
}

TEST(ParseSrt, EmptyInput) {
  EXPECT_EQ(code_of([] { parse_srt(""); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([] { parse_srt("\n\n  \r\n"); }), ErrorCode::EmptyFile);
}

TEST(ParseSrt, CrlfBomAndDotSeparator) {
  const auto cues = parse_srt("\xEF\xBB\xBF" "1\r\n00:00:01.250 --> 00:00:02.000\r\nHi there\r\n\r\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].span, (TimeSpan{1250, 2000}));
  EXPECT_EQ(cues[0].lines[0], "Hi there");
}

TEST(ParseSrt, Latin1Fallback) {
  const auto cues = parse_srt("1\n00:00:01,000 --> 00:00:02,000\ncaf\xE9\n\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].lines[0], "caf\xC3\xA9");
}

TEST(ParseSrt, EncodingHintWins) {
  // Valid UTF-8 bytes read as Latin-1 become two characters.
  const auto cues = parse_srt("1\n00:00:01,000 --> 00:00:02,000\ncaf\xC3\xA9\n\n", Encoding::Latin1);
  EXPECT_EQ(cues[0].lines[0], "caf\xC3\x83\xC2\xA9");
}

TEST(ParseSrt, MissingIndexLine) {
  const auto cues = parse_srt("00:00:01,000 --> 00:00:02,000\nOne\n\n00:00:03,000 --> 00:00:04,000\nTwo\n\n");
  ASSERT_EQ(cues.size(), 2u);
  EXPECT_EQ(cues[1].lines[0], "Two");
}

TEST(ParseSrt, MultiLineAndLongHours) {
  const auto cues = parse_srt("1\n12:34:56,789 --> 99:59:59,999\nfirst\nsecond\n\n");
  ASSERT_EQ(cues.size(), 1u);
  EXPECT_EQ(cues[0].span.start_ms, ((12 * 60 + 34) * 60 + 56) * 1000LL + 789);
  EXPECT_EQ(cues[0].span.end_ms, 99LL * 3'600'000 + 59 * 60'000 + 59'999);
  EXPECT_EQ(cues[0].lines, (std::vector<std::string>{"first", "second"}));
}

TEST(Timestamp, FormatParseRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto ms = static_cast<std::int64_t>(rng() % (100LL * 3'600'000));
    const auto text = format_timestamp(ms);
    ASSERT_EQ(parse_timestamp(text), ms) << text;
  }
  EXPECT_EQ(format_timestamp(3'723'004), "01:02:03,004");
  EXPECT_FALSE(parse_timestamp("1:2"));
  EXPECT_FALSE(parse_timestamp("00:61:00,000"));
}

TEST(Sentences, JoinsCuesIntoOneSentence) {
  const auto cues = cues_of({{{0, 1000}, "I am"}, {{1000, 2000}, "here."}});
  const auto s = assemble_sentences(cues);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "I am here");
  EXPECT_EQ(s[0].span, (TimeSpan{0, 2000}));
  EXPECT_EQ(s[0].source_cues, (std::vector<int>{1, 2}));
}

TEST(Sentences, SplitsInsideOneCue) {
  const auto s = assemble_sentences(cues_of({{{0, 3000}, "Stop! Go now."}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Stop");
  EXPECT_EQ(s[1].text, "Go now");
  EXPECT_EQ(s[0].span, (TimeSpan{0, 3000}));
  EXPECT_EQ(s[1].span, (TimeSpan{0, 3000}));
  EXPECT_EQ(s[0].id, 0u);
  EXPECT_EQ(s[1].id, 1u);
}

TEST(Sentences, StripsSoundTags) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "[DOOR SLAMS] He left."}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "He left");
}

TEST(Sentences, AllCapsParenthesesAreTagsLowercaseAreNot) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "(SIGHS) Fine (maybe) tomorrow."}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "Fine maybe tomorrow");
}

TEST(Sentences, MarkupRemoved) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "{\\an8}<i>Quiet</i>, <b>please</b>."}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "Quiet please");
}

TEST(Sentences, AbbreviationsDoNotSplit) {
  const auto s = assemble_sentences(cues_of({{{0, 2000}, "Dr. Smith met Mr. Jones. Then left."}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Dr Smith met Mr Jones");
  EXPECT_EQ(s[1].text, "Then left");
}

TEST(Sentences, EllipsisSplits) {
  const auto s = assemble_sentences(cues_of({{{0, 2000}, "Wait... What?"}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "Wait");
  EXPECT_EQ(s[1].text, "What");
}

TEST(Sentences, ApostrophesKeptInsideWords) {
  const auto s = assemble_sentences(cues_of({{{0, 2000}, "Don't go, 'kid' - it's late."}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "Don't go kid it's late");
}

TEST(Sentences, LongGapForcesBoundary) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "no stop here"}, {{12'000, 13'000}, "and more."}}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].span, (TimeSpan{0, 1000}));
  EXPECT_EQ(s[1].span, (TimeSpan{12'000, 13'000}));
}

TEST(Sentences, ShortGapDoesNot) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "no stop here"}, {{10'000, 11'000}, "and more."}}));
  ASSERT_EQ(s.size(), 1u);
}

TEST(Sentences, TagOnlyCueDropped) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "[MUSIC]"}, {{2000, 3000}, "Hello."}}));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].text, "Hello");
  EXPECT_EQ(s[0].span, (TimeSpan{2000, 3000}));
}

TEST(Sentences, RecordsRoundTrip) {
  const auto s = assemble_sentences(cues_of({{{0, 1000}, "One. Two!"}, {{1500, 2500}, "Three?"}}));
  const auto back = parse_sentence_records(to_sentence_records(s));
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].id, s[i].id);
    EXPECT_EQ(back[i].span, s[i].span);
    EXPECT_EQ(back[i].text, s[i].text);
  }
}

// Property: round trip after first normalization, spans and content tokens,
// over a seeded corpus of messy files.
class SrtCorpus : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SrtCorpus, RoundTripIsIdempotent) {
  for (const auto& c : fixture::srt_corpus(GetParam(), 25)) {
    const auto first = parse_srt(c.bytes);
    const auto text = to_srt(first);
    const auto second = parse_srt(text);
    ASSERT_EQ(first, second) << c.name;
    ASSERT_EQ(to_srt(second), text) << c.name;
  }
}

TEST_P(SrtCorpus, SentencesKeepEveryContentToken) {
  for (const auto& c : fixture::srt_corpus(GetParam(), 25)) {
    const auto cues = parse_srt(c.bytes);
    const auto sentences = assemble_sentences(cues);
    std::string joined;
    for (const auto& s : sentences) joined += s.text + " ";
    EXPECT_EQ(oracle::content_tokens(joined), c.dialog_tokens) << c.name << "\n" << c.bytes;
  }
}

TEST_P(SrtCorpus, SentenceSpansCoverTheirCues) {
  for (const auto& c : fixture::srt_corpus(GetParam(), 25)) {
    const auto cues = parse_srt(c.bytes);
    const auto sentences = assemble_sentences(cues);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto& s = sentences[i];
      EXPECT_FALSE(s.text.empty());
      EXPECT_LE(s.span.start_ms, s.span.end_ms);
      if (i > 0) EXPECT_LE(sentences[i - 1].span.start_ms, s.span.start_ms);
      ASSERT_FALSE(s.source_cues.empty());
      EXPECT_EQ(s.span.start_ms, cues[s.source_cues.front() - 1].span.start_ms);
      for (int idx : s.source_cues) {
        const auto& span = cues[idx - 1].span;
        EXPECT_GE(span.start_ms, s.span.start_ms) << c.name;
        EXPECT_LE(span.end_ms, s.span.end_ms) << c.name;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SrtCorpus, ::testing::Values(1u, 2u, 3u, 4u));
