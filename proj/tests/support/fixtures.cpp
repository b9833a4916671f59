#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "montage/audio_io.hpp"

namespace fixture {

namespace {

void write(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string timestamp(std::int64_t ms, char sep = ',') {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld%c%03lld", static_cast<long long>(ms / 3'600'000),
                static_cast<long long>(ms / 60'000 % 60), static_cast<long long>(ms / 1000 % 60), sep,
                static_cast<long long>(ms % 1000));
  return buf;
}

std::string utf8_to_latin1(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      const auto next = static_cast<unsigned char>(s[++i]);
      out.push_back(static_cast<char>(((c & 0x1F) << 6) | (next & 0x3F)));
    }
  }
  return out;
}

}  // namespace

montage::PcmClip sine(double hz, double sample_rate, double seconds, double amplitude) {
  montage::PcmClip c;
  c.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(sample_rate * seconds));
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sample_rate);
  }
  return c;
}

montage::PcmClip harmonic(double f0, double sample_rate, double seconds, double amplitude) {
  montage::PcmClip c;
  c.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(sample_rate * seconds));
  c.samples.assign(n, 0.0);
  for (int h = 1; h <= 12 && f0 * h < sample_rate / 2; ++h) {
    for (std::size_t i = 0; i < n; ++i) {
      c.samples[i] += amplitude / (2.0 * h) *
                      std::sin(2.0 * std::numbers::pi * f0 * h * static_cast<double>(i) / sample_rate);
    }
  }
  return c;
}

montage::PcmClip noise(std::uint64_t seed, double sample_rate, double seconds, double amplitude) {
  std::mt19937_64 rng(seed);
  montage::PcmClip c;
  c.sample_rate = sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(sample_rate * seconds));
  c.samples.resize(n);
  for (auto& s : c.samples) s = amplitude * (2.0 * oracle::uniform(rng) - 1.0);
  return c;
}

montage::PcmClip square(double hz, double sample_rate, double seconds) {
  auto c = sine(hz, sample_rate, seconds, 1.0);
  for (auto& s : c.samples) s = s >= 0.0 ? 1.0 : -1.0;
  return c;
}

montage::PcmClip silence(double sample_rate, double seconds) {
  montage::PcmClip c;
  c.sample_rate = sample_rate;
  c.samples.assign(static_cast<std::size_t>(std::lround(sample_rate * seconds)), 0.0);
  return c;
}

std::string srt(const std::vector<CueSpec>& cues) {
  std::string out;
  for (std::size_t i = 0; i < cues.size(); ++i) {
    out += std::to_string(i + 1) + "\n" + timestamp(cues[i].start_ms) + " --> " + timestamp(cues[i].end_ms) + "\n" +
           cues[i].text + "\n\n";
  }
  return out;
}

// --- generated SRT corpus ---------------------------------------------------

std::vector<SrtCase> srt_corpus(std::uint64_t seed, std::size_t count) {
  static const std::vector<std::string> words = {
      "the",  "night", "was",   "cold",  "and",   "we",    "walked", "home",  "slowly", "don't", "it's",
      "café", "naïve", "Zürich", "42",   "river", "light", "Dr.",    "Mr.",   "Smith",  "said", "nothing",
      "well-known", "façade", "you",   "I",    "never", "again",  "o'clock", "crème", "ten",   "Élodie"};
  static const std::vector<std::string> utf8_only = {"“quoted”", "♪", "—", "…"};
  static const std::vector<std::string> tags = {"[door slams]", "[MUSIC]", "(LAUGHS)", "(SIGHS)", "[thunder rumbles]"};
  static const std::vector<std::string> enders = {".", "!", "?", "...", ",", ";", ""};

  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto chance = [&](double p) { return oracle::uniform(rng) < p; };

  std::vector<SrtCase> corpus;
  for (std::size_t f = 0; f < count; ++f) {
    SrtCase c;
    c.name = "case_" + std::to_string(f) + ".srt";
    const bool latin1 = chance(0.15);
    const bool crlf = chance(0.3);
    const bool bom = !latin1 && chance(0.2);
    const bool dot_sep = chance(0.15);
    const bool missing_index = chance(0.1);
    const bool shuffle = chance(0.2);
    const bool extra_blanks = chance(0.2);
    const int numbering = static_cast<int>(pick(4));  // 0 sequential, 1 offset, 2 random, 3 duplicate

    struct Block {
      std::int64_t start, end;
      std::vector<std::string> lines;
      std::vector<std::string> tokens;
    };
    std::vector<Block> blocks;
    std::int64_t t = chance(0.2) ? 36'000'000 + static_cast<std::int64_t>(pick(1000)) : static_cast<std::int64_t>(pick(5000));
    const std::size_t n = 3 + pick(23);
    for (std::size_t i = 0; i < n; ++i) {
      Block b;
      b.start = t;
      b.end = t + 300 + static_cast<std::int64_t>(pick(2700));
      t += 500 + static_cast<std::int64_t>(pick(3500));
      const std::size_t line_count = 1 + pick(3);
      for (std::size_t l = 0; l < line_count; ++l) {
        std::string line;
        if (chance(0.15)) line += "- ";
        if (chance(0.1)) line += "{\\an8}";
        const std::size_t wc = 1 + pick(7);
        for (std::size_t w = 0; w < wc; ++w) {
          if (!line.empty() && line.back() != ' ' && line.back() != '}') line += ' ';
          if (chance(0.08)) {
            line += tags[pick(tags.size())] + " ";
          }
          if (!latin1 && chance(0.05)) {
            const auto& sym = utf8_only[pick(utf8_only.size())];
            line += sym;
            if (sym == "“quoted”") b.tokens.push_back("quoted");
            line += ' ';
          }
          std::string word = words[pick(words.size())];
          for (auto& tok : oracle::content_tokens(word)) b.tokens.push_back(tok);
          if (chance(0.08)) {
            word = "<i>" + word + "</i>";
          } else if (chance(0.05)) {
            // A parenthetical is a sound tag only when it is all caps, e.g. "(I)".
            const bool caps = word.find_first_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ") != std::string::npos &&
                              word.find_first_of("abcdefghijklmnopqrstuvwxyz") == std::string::npos;
            if (caps) b.tokens.resize(b.tokens.size() - oracle::content_tokens(word).size());
            word = "(" + word + ")";
          }
          line += word;
        }
        line += enders[pick(enders.size())];
        if (chance(0.1)) line += "  ";
        b.lines.push_back(line);
      }
      blocks.push_back(std::move(b));
    }
    for (const auto& b : blocks) c.dialog_tokens.insert(c.dialog_tokens.end(), b.tokens.begin(), b.tokens.end());

    std::vector<std::size_t> order(blocks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (shuffle) std::shuffle(order.begin(), order.end(), rng);

    const std::string nl = crlf ? "\r\n" : "\n";
    std::string text = bom ? "\xEF\xBB\xBF" : "";
    int number = numbering == 1 ? 5 + static_cast<int>(pick(50)) : 1;
    for (std::size_t i : order) {
      const auto& b = blocks[i];
      if (!missing_index) {
        int shown = number;
        if (numbering == 2) shown = 1 + static_cast<int>(pick(999));
        if (numbering == 3 && chance(0.3)) shown = 1;
        text += std::to_string(shown) + nl;
        number += numbering == 1 ? 1 + static_cast<int>(pick(4)) : 1;
      }
      const char sep = dot_sep ? '.' : ',';
      text += timestamp(b.start, sep) + " --> " + timestamp(b.end, sep) + nl;
      for (const auto& l : b.lines) text += l + nl;
      text += nl;
      if (extra_blanks && chance(0.5)) text += nl;
    }
    c.bytes = latin1 ? utf8_to_latin1(text) : text;
    corpus.push_back(std::move(c));
  }
  return corpus;
}

// --- topic corpora ---------------------------------------------------------

TopicCorpus two_topic_corpus(std::uint64_t seed, std::size_t docs_per_topic, std::size_t vocab) {
  std::mt19937_64 rng(seed);
  TopicCorpus corpus;
  for (std::size_t d = 0; d < 2 * docs_per_topic; ++d) {
    const int topic = static_cast<int>(d % 2);
    const std::string prefix = topic == 0 ? "a" : "b";
    std::vector<std::string> doc;
    const std::size_t len = 20 + rng() % 21;
    for (std::size_t i = 0; i < len; ++i) doc.push_back(prefix + std::to_string(1 + rng() % vocab));
    corpus.docs.push_back(std::move(doc));
    corpus.labels.push_back(topic);
  }
  return corpus;
}

// --- tribute ----------------------------------------------------------------

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("montage-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TributeFixture write_tribute_fixture(const fs::path& dir) {
  static const std::vector<std::string> lines = {
      "The old captain watched the sea.",
      "A storm was coming over the sea.",
      "The crew feared the storm.",
      "He told the crew to hold the ropes.",
      "The ship rolled in the storm.",
      "Waves broke over the ship.",
      "The wind fell at last.",
      "Morning came grey and quiet.",
      "Nobody spoke at breakfast.",
      "The cook laughed at a gull on the mast.",
      "The captain studied the maps of the sea.",
      "Maps were spread on the table.",
      "They saw land before noon.",
      "The crew cheered at the sight of land.",
      "The ship reached the harbor.",
      "Bread and coffee were passed around.",
      "Nobody wanted to leave the ship.",
      "The captain stepped onto the dock.",
      "His daughter ran to meet the captain.",
      "The sea was calm again."};

  TributeFixture fx;
  fx.dir = dir;
  for (std::int64_t s = 0; s <= 6; ++s) fx.scene_bounds_ms.push_back(s * 5000);
  fx.scene_is_tonal = {true, false, true, false, false, true};
  const std::vector<std::size_t> per_scene = {4, 3, 4, 3, 3, 3};
  std::size_t line = 0;
  for (std::size_t scene = 0; scene < per_scene.size(); ++scene) {
    for (std::size_t j = 0; j < per_scene[scene]; ++j, ++line) {
      const std::int64_t start = static_cast<std::int64_t>(scene) * 5000 + 200 + static_cast<std::int64_t>(j) * 1200;
      fx.cues.push_back({start, start + 1000, lines[line]});
      std::string text = lines[line];
      text.pop_back();  // trailing period
      fx.sentence_texts.push_back(text);
      fx.cue_scene.push_back(static_cast<int>(scene));
    }
  }
  write(dir / "film.srt", srt(fx.cues));

  // 25 fps, 751 frames (last timestamp 30 000 ms); a cut every 125 frames,
  // plus a flash frame at 505 that the minimum scene length must absorb.
  std::string stats = "# frame_index,timestamp_ms,diff\n";
  std::mt19937_64 rng(7);
  for (int f = 0; f <= 750; ++f) {
    double diff = f == 0 ? 0.0 : 1.0 + 3.0 * oracle::uniform(rng);
    if (f > 0 && f % 125 == 0 && f < 750) diff = 120.0;
    if (f == 505) diff = 90.0;
    stats += std::to_string(f) + "," + std::to_string(f * 40) + "," + std::to_string(diff) + "\n";
  }
  write(dir / "film.framestats", stats);

  // Song-like scenes reuse the song's synthesis so they match it exactly; the
  // rest (noise and a higher, quieter tone) must fall below the threshold once
  // normalized against the film.
  const double sr = 16000.0;
  const auto song = harmonic(196.0, sr, 5.0, 0.5);
  const std::vector<montage::PcmClip> parts = {song, noise(3, sr, 5.0, 0.3), song, harmonic(300.0, sr, 5.0, 0.3),
                                               noise(4, sr, 5.0, 0.15), song};
  montage::PcmClip film;
  film.sample_rate = sr;
  for (const auto& part : parts) film.samples.insert(film.samples.end(), part.samples.begin(), part.samples.end());
  write(dir / "film.wav", montage::encode_wav(film));

  fx.song_ms = 5000;
  write(dir / "song.wav", montage::encode_wav(song));

  fx.config = dir / "tribute.json";
  write(fx.config, R"({
  "mode": "tribute",
  "film_subtitles": "film.srt",
  "film_audio": "film.wav",
  "frame_stats": "film.framestats",
  "song": "song.wav",
  "output_dir": "out",
  "render_script": true
}
)");
  return fx;
}

// --- talk -------------------------------------------------------------------

namespace {

std::vector<std::string> sentences_from(const std::vector<std::string>& vocab, std::size_t count,
                                        std::mt19937_64& rng) {
  static const std::vector<std::string> glue = {"the", "and", "of", "with", "in"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    const std::size_t len = 12 + rng() % 5;
    for (std::size_t w = 0; w < len; ++w) {
      if (!s.empty()) s += ' ';
      s += (w % 4 == 3) ? glue[rng() % glue.size()] : vocab[rng() % vocab.size()];
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    out.push_back(s + ".");
  }
  return out;
}

std::string srt_of(const std::vector<std::string>& sentences) {
  std::vector<CueSpec> cues;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto start = static_cast<std::int64_t>(i) * 3000 + 500;
    cues.push_back({start, start + 2500, sentences[i]});
  }
  return srt(cues);
}

}  // namespace

TalkFixture write_talk_fixture(const fs::path& dir, const std::string& strategy) {
  const std::vector<std::string> stars = {"star",   "galaxy", "planet", "orbit",  "telescope",
                                          "comet",  "nebula", "gravity", "moon",  "astronomer"};
  const std::vector<std::string> cells = {"cell",    "protein", "membrane", "nucleus",  "enzyme",
                                          "gene",    "mitosis", "bacteria", "organism", "microscope"};
  const std::vector<std::string> volcano = {"volcano", "lava",   "magma", "crater", "eruption",
                                            "ash",     "mantle", "basalt", "geyser", "earthquake"};
  std::mt19937_64 rng(2024);
  TalkFixture fx;
  fx.dir = dir;
  fx.documentary_ids = {"cells", "stars", "volcano"};
  fx.matching_documentary = 1;
  fx.lecture_sentences = 14;

  write(dir / "lecture.srt", srt_of(sentences_from(stars, fx.lecture_sentences, rng)));
  write(dir / "docs/cells.srt", srt_of(sentences_from(cells, 20, rng)));
  write(dir / "docs/stars.srt", srt_of(sentences_from(stars, 20, rng)));
  write(dir / "docs/volcano.srt", srt_of(sentences_from(volcano, 20, rng)));
  write(dir / "docs/manifest.json", R"({
  "documentaries": [
    {"id": "cells", "subtitles": "cells.srt", "media": "cells.mp4"},
    {"id": "stars", "subtitles": "stars.srt", "media": "stars.mp4"},
    {"id": "volcano", "subtitles": "volcano.srt", "media": "volcano.mp4"}
  ]
}
)");
  fx.config = dir / "talk.json";
  write(fx.config, "{\n  \"mode\": \"talk\",\n  \"lecture_subtitles\": \"lecture.srt\",\n"
                   "  \"manifest\": \"docs/manifest.json\",\n  \"strategy\": \"" +
                       strategy + "\",\n  \"output_dir\": \"out\"\n}\n");
  return fx;
}

}  // namespace fixture
