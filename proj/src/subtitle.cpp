#include "montage/subtitle.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <regex>
#include <sstream>

#include "montage/error.hpp"
#include "montage/text.hpp"

namespace montage {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

// Reads [0-9]{1,max_digits} starting at pos.
std::optional<std::int64_t> read_number(std::string_view s, std::size_t& pos, std::size_t max_digits) {
  const std::size_t start = pos;
  while (pos < s.size() && is_digit(s[pos]) && pos - start < max_digits) ++pos;
  if (pos == start) return std::nullopt;
  std::int64_t value = 0;
  std::from_chars(s.data() + start, s.data() + pos, value);
  return value;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\n' || content[i] == '\r') {
      lines.push_back(content.substr(start, i - start));
      if (content[i] == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      start = i + 1;
    }
  }
  if (start < content.size()) lines.push_back(content.substr(start));
  return lines;
}

TimeSpan parse_timing_line(std::string_view line, std::size_t line_no) {
  const auto fail = [&](const std::string& why) {
    return Error(ErrorCode::MalformedTimestamp,
                 "line " + std::to_string(line_no) + ": " + why + ": '" + std::string(line) + "'");
  };
  const auto arrow = line.find("-->");
  if (arrow == std::string_view::npos) throw fail("expected 'start --> end'");
  const auto left = text::trim(line.substr(0, arrow));
  auto right = text::trim(line.substr(arrow + 3));
  // Anything after the end timestamp (position hints) is ignored.
  if (const auto ws = right.find_first_of(" \t"); ws != std::string_view::npos) right = right.substr(0, ws);
  const auto start = parse_timestamp(left);
  const auto end = parse_timestamp(right);
  if (!start || !end) throw fail("unparseable timestamp");
  if (*end <= *start) throw fail("end not after start");
  return {*start, *end};
}

std::string decode(std::string_view bytes, std::optional<Encoding> hint) {
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
      static_cast<unsigned char>(bytes[1]) == 0xBB && static_cast<unsigned char>(bytes[2]) == 0xBF) {
    bytes.remove_prefix(3);
  }
  const Encoding enc = hint.value_or(text::is_valid_utf8(bytes) ? Encoding::Utf8 : Encoding::Latin1);
  if (enc == Encoding::Latin1) return text::latin1_to_utf8(bytes);
  return std::string(bytes);
}

// Non-ASCII code points treated as punctuation rather than word characters.
bool is_unicode_punct(char32_t cp) {
  switch (cp) {
    case 0x00A0: case 0x00A1: case 0x00AB: case 0x00B7: case 0x00BB: case 0x00BF:
    case 0xFFFD:
      return true;
    default:
      break;
  }
  return (cp >= 0x2000 && cp <= 0x206F) ||  // general punctuation
         (cp >= 0x2190 && cp <= 0x2BFF) ||  // arrows, symbols, music notes
         (cp >= 0x3000 && cp <= 0x303F);
}

bool is_word_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  return !is_unicode_punct(cp);
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’' || cp == U'‘'; }

constexpr auto kAbbreviations = std::to_array<std::string_view>({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.",
    "i.e.", "mt.", "lt.", "col.", "gen.", "sgt.", "capt.", "rev.", "no.", "fig.", "approx."});

std::string_view strip_suffix_any(std::string_view tok, std::initializer_list<std::string_view> closers) {
  bool changed = true;
  while (changed && !tok.empty()) {
    changed = false;
    for (auto c : closers) {
      if (tok.size() >= c.size() && tok.substr(tok.size() - c.size()) == c) {
        tok.remove_suffix(c.size());
        changed = true;
      }
    }
  }
  return tok;
}

std::string_view strip_prefix_any(std::string_view tok, std::initializer_list<std::string_view> openers) {
  bool changed = true;
  while (changed && !tok.empty()) {
    changed = false;
    for (auto o : openers) {
      if (tok.substr(0, o.size()) == o) {
        tok.remove_prefix(o.size());
        changed = true;
      }
    }
  }
  return tok;
}

bool ends_sentence(std::string_view token) {
  token = strip_suffix_any(token, {"\"", "'", ")", "]", "»", "”", "’"});
  if (token.empty()) return false;
  const auto ends_with = [&](std::string_view s) {
    return token.size() >= s.size() && token.substr(token.size() - s.size()) == s;
  };
  if (ends_with("!") || ends_with("?") || ends_with("…") || ends_with("..")) return true;
  if (!ends_with(".")) return false;
  const auto bare = text::ascii_lower(strip_prefix_any(token, {"\"", "'", "(", "-", "“", "¿", "¡"}));
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), bare) == kAbbreviations.end();
}

bool is_all_caps_tag(std::string_view inner) {
  bool has_upper = false;
  for (char c : inner) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') has_upper = true;
  }
  return has_upper;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view ts) {
  ts = text::trim(ts);
  std::size_t pos = 0;
  const auto hours = read_number(ts, pos, 6);
  if (!hours || pos >= ts.size() || ts[pos++] != ':') return std::nullopt;
  const auto minutes = read_number(ts, pos, 2);
  if (!minutes || pos >= ts.size() || ts[pos++] != ':') return std::nullopt;
  const auto seconds = read_number(ts, pos, 2);
  if (!seconds || pos >= ts.size() || (ts[pos] != ',' && ts[pos] != '.')) return std::nullopt;
  ++pos;
  const std::size_t frac_start = pos;
  const auto frac = read_number(ts, pos, 3);
  if (!frac || pos != ts.size() || *minutes >= 60 || *seconds >= 60) return std::nullopt;
  std::int64_t millis = *frac;
  for (std::size_t digits = pos - frac_start; digits < 3; ++digits) millis *= 10;
  return ((*hours * 60 + *minutes) * 60 + *seconds) * 1000 + millis;
}

std::string format_timestamp(std::int64_t ms) {
  if (ms < 0) ms = 0;
  const std::int64_t hours = ms / 3'600'000;
  const std::int64_t minutes = (ms / 60'000) % 60;
  const std::int64_t seconds = (ms / 1000) % 60;
  const std::int64_t millis = ms % 1000;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld,%03lld", static_cast<long long>(hours),
                static_cast<long long>(minutes), static_cast<long long>(seconds),
                static_cast<long long>(millis));
  return buf;
}

std::vector<SubtitleCue> parse_srt(std::string_view bytes, std::optional<Encoding> encoding_hint) {
  const std::string content = decode(bytes, encoding_hint);
  if (text::trim(content).empty()) throw Error(ErrorCode::EmptyFile, "no subtitle content");

  const auto lines = split_lines(content);
  std::vector<SubtitleCue> cues;
  std::size_t i = 0;
  while (i < lines.size()) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) {
      ++i;
      continue;
    }
    TimeSpan span;
    if (line.find("-->") != std::string_view::npos) {
      span = parse_timing_line(line, i + 1);  // index line missing
      ++i;
    } else if (all_digits(line)) {
      if (i + 1 >= lines.size()) {
        throw Error(ErrorCode::MalformedTimestamp, "cue index at end of file without timing line");
      }
      span = parse_timing_line(text::trim(lines[i + 1]), i + 2);
      i += 2;
    } else {
      // A stray blank line inside a cue splits its text; reattach the orphan.
      if (cues.empty()) {
        throw Error(ErrorCode::MalformedTimestamp,
                    "line " + std::to_string(i + 1) + ": expected cue index or timing line");
      }
      while (i < lines.size() && !text::trim(lines[i]).empty()) {
        cues.back().lines.emplace_back(text::trim(lines[i]));
        ++i;
      }
      continue;
    }
    SubtitleCue cue;
    cue.span = span;
    while (i < lines.size() && !text::trim(lines[i]).empty()) {
      cue.lines.emplace_back(text::trim(lines[i]));
      ++i;
    }
    if (!cue.lines.empty()) cues.push_back(std::move(cue));
  }
  if (cues.empty()) throw Error(ErrorCode::EmptyFile, "no cues with text");

  std::stable_sort(cues.begin(), cues.end(),
                   [](const SubtitleCue& a, const SubtitleCue& b) { return a.span.start_ms < b.span.start_ms; });
  for (std::size_t n = 0; n < cues.size(); ++n) cues[n].index = static_cast<int>(n + 1);
  return cues;
}

std::string to_srt(std::span<const SubtitleCue> cues) {
  std::string out;
  for (const auto& cue : cues) {
    out += std::to_string(cue.index);
    out += '\n';
    out += format_timestamp(cue.span.start_ms);
    out += " --> ";
    out += format_timestamp(cue.span.end_ms);
    out += '\n';
    for (const auto& line : cue.lines) {
      out += line;
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::string strip_cue_tags(std::string_view text_in) {
  static const std::regex markup(R"(</?[A-Za-z][^<>]*>|\{\\[^{}]*\})");
  static const std::regex brackets(R"(\[[^\]]*\])");
  static const std::regex parens(R"(\(([^()]*)\))");

  std::string s = std::regex_replace(std::string(text_in), markup, "");
  s = std::regex_replace(s, brackets, " ");

  std::string out;
  auto last = s.cbegin();
  for (std::sregex_iterator it(s.cbegin(), s.cend(), parens), end; it != end; ++it) {
    const auto& m = *it;
    out.append(last, m[0].first);
    if (is_all_caps_tag(m[1].str())) {
      out += ' ';
    } else {
      out.append(m[0].first, m[0].second);
    }
    last = m[0].second;
  }
  out.append(last, s.cend());
  return out;
}

std::string strip_punctuation(std::string_view in) {
  std::vector<char32_t> cps;
  for (std::size_t pos = 0; pos < in.size();) cps.push_back(text::next_code_point(in, pos));

  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_word_cp(cp)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      text::append_utf8(out, cp);
    } else if (is_apostrophe(cp) && i > 0 && i + 1 < cps.size() && is_word_cp(cps[i - 1]) &&
               is_word_cp(cps[i + 1]) && !pending_space) {
      out += '\'';
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<Sentence> assemble_sentences(std::span<const SubtitleCue> cues, const SentenceOptions& options) {
  std::vector<Sentence> sentences;

  struct Pending {
    std::vector<std::string> tokens;
    std::vector<int> cue_ids;
    TimeSpan span;
  } pending;

  const auto flush = [&] {
    if (pending.tokens.empty()) return;
    std::string joined;
    for (const auto& tok : pending.tokens) {
      if (!joined.empty()) joined += ' ';
      joined += tok;
    }
    auto normalized = strip_punctuation(joined);
    if (!normalized.empty()) {
      Sentence s;
      s.id = sentences.size();
      s.text = std::move(normalized);
      s.span = pending.span;
      s.source_cues = std::move(pending.cue_ids);
      sentences.push_back(std::move(s));
    }
    pending = Pending{};
  };

  std::optional<std::int64_t> last_end;
  for (const auto& cue : cues) {
    if (last_end && cue.span.start_ms - *last_end > options.gap_boundary_ms) flush();
    last_end = cue.span.end_ms;

    std::string joined;
    for (const auto& line : cue.lines) {
      if (!joined.empty()) joined += ' ';
      joined += line;
    }
    for (auto& tok : text::split_whitespace(strip_cue_tags(joined))) {
      if (pending.cue_ids.empty()) {
        pending.span = cue.span;
      }
      if (pending.cue_ids.empty() || pending.cue_ids.back() != cue.index) {
        pending.cue_ids.push_back(cue.index);
        pending.span.end_ms = std::max(pending.span.end_ms, cue.span.end_ms);
      }
      const bool boundary = ends_sentence(tok);
      pending.tokens.push_back(std::move(tok));
      if (boundary) flush();
    }
  }
  flush();
  return sentences;
}

std::string to_sentence_records(std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += std::to_string(s.id);
    out += '\t';
    out += std::to_string(s.span.start_ms);
    out += '\t';
    out += std::to_string(s.span.end_ms);
    out += '\t';
    out += s.text;
    out += '\n';
  }
  return out;
}

std::vector<Sentence> parse_sentence_records(std::string_view records) {
  std::vector<Sentence> out;
  std::size_t line_no = 0;
  for (auto line : split_lines(records)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::array<std::string_view, 4> fields;
    std::size_t start = 0;
    for (std::size_t f = 0; f < 3; ++f) {
      const auto tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        throw Error(ErrorCode::InvalidArgument, "sentence record " + std::to_string(line_no) + ": expected 4 fields");
      }
      fields[f] = line.substr(start, tab - start);
      start = tab + 1;
    }
    fields[3] = line.substr(start);
    Sentence s;
    const auto parse_int = [&](std::string_view f, auto& value) {
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        throw Error(ErrorCode::InvalidArgument, "sentence record " + std::to_string(line_no) + ": bad number");
      }
    };
    parse_int(fields[0], s.id);
    parse_int(fields[1], s.span.start_ms);
    parse_int(fields[2], s.span.end_ms);
    s.text = std::string(fields[3]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace montage
