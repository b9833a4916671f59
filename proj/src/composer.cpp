#include "montage/composer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "json.hpp"

#include "montage/error.hpp"

namespace montage {

namespace {

using Json = nlohmann::ordered_json;

struct Piece {
  Clip clip;
  std::size_t admitted = 0;  // admission order of the clip that named this piece
};

// Length of `span` not yet covered by the (disjoint, start-sorted) pieces.
std::int64_t uncovered_length(const std::vector<Piece>& pieces, const TimeSpan& span) {
  std::int64_t covered = 0;
  for (const auto& p : pieces) {
    const std::int64_t lo = std::max(p.clip.span.start_ms, span.start_ms);
    const std::int64_t hi = std::min(p.clip.span.end_ms, span.end_ms);
    if (hi > lo) covered += hi - lo;
  }
  return span.duration() - covered;
}

// Smallest end such that [span.start, end) adds exactly `budget` new time.
std::int64_t trimmed_end(const std::vector<Piece>& pieces, const TimeSpan& span, std::int64_t budget) {
  std::int64_t cursor = span.start_ms;
  for (const auto& p : pieces) {
    if (p.clip.span.end_ms <= cursor) continue;
    if (p.clip.span.start_ms >= span.end_ms) break;
    if (p.clip.span.start_ms > cursor) {
      const std::int64_t gap = p.clip.span.start_ms - cursor;
      if (gap >= budget) return cursor + budget;
      budget -= gap;
    }
    cursor = std::max(cursor, p.clip.span.end_ms);
  }
  return cursor + budget;
}

void insert_merged(std::vector<Piece>& pieces, Piece piece) {
  std::vector<Piece> out;
  out.reserve(pieces.size() + 1);
  for (auto& p : pieces) {
    const bool overlaps = p.clip.span.start_ms < piece.clip.span.end_ms && piece.clip.span.start_ms < p.clip.span.end_ms;
    if (!overlaps) {
      out.push_back(std::move(p));
      continue;
    }
    TimeSpan joined{std::min(p.clip.span.start_ms, piece.clip.span.start_ms),
                    std::max(p.clip.span.end_ms, piece.clip.span.end_ms)};
    if (p.admitted < piece.admitted) {
      p.clip.span = joined;
      piece = std::move(p);
    } else {
      piece.clip.span = joined;
    }
  }
  out.push_back(std::move(piece));
  std::sort(out.begin(), out.end(),
            [](const Piece& a, const Piece& b) { return a.clip.span.start_ms < b.clip.span.start_ms; });
  pieces = std::move(out);
}

}  // namespace

EditDecisionList plan_tribute(const RankedList& ranked, std::span<const Sentence> sentences,
                              std::span<const Scene> scenes, std::span<const EmotionVector> scene_vectors,
                              const EmotionVector& song_vector, std::int64_t song_duration_ms,
                              const TributeOptions& options) {
  if (song_duration_ms <= 0) throw Error(ErrorCode::InvalidArgument, "song duration must be positive");
  if (scene_vectors.size() != scenes.size()) {
    throw Error(ErrorCode::InvalidArgument, "one emotion vector per scene is required");
  }

  EditDecisionList edl;
  edl.kind = "tribute";
  edl.audio_track = AudioTrack{options.song_id, TimeSpan{0, song_duration_ms}};

  std::vector<std::optional<double>> similarity(scenes.size());
  auto scene_similarity = [&](std::size_t s) {
    if (!similarity[s]) {
      try {
        similarity[s] = emotion_similarity(scene_vectors[s], song_vector, options.normalization);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVector) throw;
        similarity[s] = 0.0;
        edl.warnings.push_back("scene " + std::to_string(scenes[s].id) + ": featureless audio, never qualifies");
      }
    }
    return *similarity[s];
  };

  std::vector<Piece> pieces;
  std::int64_t covered = 0;
  std::size_t qualifying = 0;
  for (const auto& item : ranked.items) {
    if (covered >= song_duration_ms) break;
    if (item.index >= sentences.size()) throw Error(ErrorCode::InvalidArgument, "ranking refers to a missing sentence");
    const Sentence& sentence = sentences[item.index];
    if (!sentence.span.valid()) continue;

    const Scene* scene = nullptr;
    try {
      scene = &enclosing_scene(scenes, sentence.span);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ClipOutOfRange) throw;
      edl.warnings.push_back("sentence " + std::to_string(sentence.id) + ": outside the detected scenes, skipped");
      continue;
    }
    const auto s = static_cast<std::size_t>(scene - scenes.data());
    if (!(scene_similarity(s) > options.threshold)) continue;
    ++qualifying;

    Piece piece{Clip{options.film_id, sentence.span, sentence.id, item.score}, qualifying};
    const std::int64_t gain = uncovered_length(pieces, sentence.span);
    if (covered + gain > song_duration_ms) {
      piece.clip.span.end_ms = trimmed_end(pieces, sentence.span, song_duration_ms - covered);
    }
    covered += uncovered_length(pieces, piece.clip.span);
    insert_merged(pieces, std::move(piece));
  }

  if (pieces.empty()) {
    throw Error(ErrorCode::NoQualifyingClips,
                "no clip's scene exceeds emotion threshold " + std::to_string(options.threshold));
  }
  for (auto& p : pieces) {
    edl.total_duration_ms += p.clip.span.duration();
    edl.entries.push_back(std::move(p.clip));
  }
  if (edl.total_duration_ms < song_duration_ms) {
    edl.partial_fill = true;
    edl.warnings.push_back("partial fill: " + std::to_string(edl.total_duration_ms) + " of " +
                           std::to_string(song_duration_ms) + " ms covered by qualifying clips");
  }
  return edl;
}

std::size_t CandidatePool::rank_of(const SentenceKey& key) const {
  const auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return std::numeric_limits<std::size_t>::max();
  const auto member = static_cast<std::size_t>(it - keys.begin());
  for (std::size_t r = 0; r < ranking.items.size(); ++r) {
    if (ranking.items[r].index == member) return r;
  }
  return std::numeric_limits<std::size_t>::max();
}

CandidatePool rank_candidates(std::span<const CandidateSet> candidate_sets,
                              std::span<const DocumentarySource> documentaries, const SupportSetOptions& options) {
  if (candidate_sets.empty()) throw Error(ErrorCode::InvalidArgument, "rank_candidates: no candidate sets");
  std::set<SentenceKey> unique;
  for (const auto& set : candidate_sets) {
    for (const auto& c : set.candidates) {
      if (c.documentary >= documentaries.size() || c.sentence >= documentaries[c.documentary].sentences.size()) {
        throw Error(ErrorCode::InvalidArgument, "candidate refers to a missing documentary sentence");
      }
      unique.insert(SentenceKey{c.documentary, c.sentence});
    }
  }

  CandidatePool pool;
  pool.keys.assign(unique.begin(), unique.end());
  std::vector<std::string> texts;
  texts.reserve(pool.keys.size());
  for (const auto& k : pool.keys) texts.push_back(documentaries[k.documentary].sentences[k.sentence].text);
  const auto vectors = tfidf_vectors(texts);
  pool.ranking = support_set_rank(vectors, options);
  return pool;
}

EditDecisionList plan_talk(std::span<const std::size_t> lecture_order, std::span<const CandidateSet> candidate_sets,
                           const CandidatePool& pool, std::span<const DocumentarySource> documentaries) {
  EditDecisionList edl;
  edl.kind = "talk";

  std::vector<std::size_t> rank(pool.keys.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t r = 0; r < pool.ranking.items.size(); ++r) rank[pool.ranking.items[r].index] = r;
  auto pool_position = [&](const SentenceKey& key) -> std::optional<std::size_t> {
    const auto it = std::lower_bound(pool.keys.begin(), pool.keys.end(), key);
    if (it == pool.keys.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - pool.keys.begin());
  };

  std::set<SentenceKey> used;
  for (const std::size_t lecture_sentence : lecture_order) {
    const auto set = std::find_if(candidate_sets.begin(), candidate_sets.end(),
                                  [&](const CandidateSet& c) { return c.lecture_sentence == lecture_sentence; });
    if (set == candidate_sets.end()) {
      edl.warnings.push_back("lecture sentence " + std::to_string(lecture_sentence) + ": no candidate set, skipped");
      continue;
    }

    std::optional<std::size_t> best;
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    for (const auto& c : set->candidates) {
      const SentenceKey key{c.documentary, c.sentence};
      if (used.contains(key)) continue;
      const auto member = pool_position(key);
      if (!member || rank[*member] == std::numeric_limits<std::size_t>::max()) continue;
      const Sentence& sentence = documentaries[key.documentary].sentences[key.sentence];
      const auto& id = documentaries[key.documentary].id;
      const bool clashes = std::any_of(edl.entries.begin(), edl.entries.end(), [&](const Clip& e) {
        return e.source_id == id && e.span.start_ms < sentence.span.end_ms && sentence.span.start_ms < e.span.end_ms;
      });
      if (clashes) continue;
      if (rank[*member] < best_rank) {
        best_rank = rank[*member];
        best = *member;
      }
    }
    if (!best) {
      edl.warnings.push_back("lecture sentence " + std::to_string(lecture_sentence) +
                             ": every candidate already used, skipped");
      continue;
    }

    const SentenceKey key = pool.keys[*best];
    used.insert(key);
    const auto& doc = documentaries[key.documentary];
    const Sentence& sentence = doc.sentences[key.sentence];
    edl.entries.push_back(Clip{doc.id, sentence.span, sentence.id, pool.ranking.items[best_rank].score});
    edl.total_duration_ms += sentence.span.duration();
  }
  return edl;
}

std::string to_edl_json(const EditDecisionList& edl) {
  Json doc;
  doc["version"] = 1;
  doc["kind"] = edl.kind;
  Json sources = Json::array();
  for (const auto& [id, path] : edl.sources) sources.push_back({{"id", id}, {"path", path}});
  doc["sources"] = std::move(sources);
  Json entries = Json::array();
  for (const auto& e : edl.entries) {
    entries.push_back({{"source_id", e.source_id},
                       {"in_ms", e.span.start_ms},
                       {"out_ms", e.span.end_ms},
                       {"sentence_id", e.origin_sentence_id},
                       {"rank_score", e.rank_score}});
  }
  doc["entries"] = std::move(entries);
  if (edl.audio_track) {
    doc["audio_track"] = {{"source_id", edl.audio_track->source_id},
                          {"in_ms", edl.audio_track->span.start_ms},
                          {"out_ms", edl.audio_track->span.end_ms}};
  } else {
    doc["audio_track"] = nullptr;
  }
  doc["total_duration_ms"] = edl.total_duration_ms;
  doc["partial_fill"] = edl.partial_fill;
  doc["warnings"] = edl.warnings;
  return doc.dump(2) + "\n";
}

EditDecisionList parse_edl_json(std::string_view json) {
  try {
    const Json doc = Json::parse(json);
    if (doc.at("version").get<int>() != 1) throw Error(ErrorCode::InvalidArgument, "unsupported EDL version");
    EditDecisionList edl;
    edl.kind = doc.at("kind").get<std::string>();
    for (const auto& s : doc.at("sources")) edl.sources[s.at("id").get<std::string>()] = s.at("path").get<std::string>();
    for (const auto& e : doc.at("entries")) {
      edl.entries.push_back(Clip{e.at("source_id").get<std::string>(),
                                 TimeSpan{e.at("in_ms").get<std::int64_t>(), e.at("out_ms").get<std::int64_t>()},
                                 e.at("sentence_id").get<std::size_t>(), e.at("rank_score").get<double>()});
    }
    if (const auto& a = doc.at("audio_track"); !a.is_null()) {
      edl.audio_track = AudioTrack{a.at("source_id").get<std::string>(),
                                   TimeSpan{a.at("in_ms").get<std::int64_t>(), a.at("out_ms").get<std::int64_t>()}};
    }
    edl.total_duration_ms = doc.at("total_duration_ms").get<std::int64_t>();
    edl.partial_fill = doc.value("partial_fill", false);
    if (doc.contains("warnings")) edl.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return edl;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed EDL: ") + e.what());
  }
}

namespace {

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

std::string seconds(std::int64_t ms) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", static_cast<long long>(ms / 1000), static_cast<long long>(ms % 1000));
  return buf;
}

std::string expand(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const auto it = values.find(std::string(tmpl.substr(open + 1, close - open - 1)));
    if (it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

}  // namespace

std::string render_script(const EditDecisionList& edl, const RenderTemplates& templates, std::string_view output_name) {
  auto source_path = [&](const std::string& id) {
    const auto it = edl.sources.find(id);
    return it != edl.sources.end() ? it->second : id;
  };

  std::string script = "#!/bin/sh\nset -e\n";
  script += "# " + edl.kind + ": " + std::to_string(edl.entries.size()) + " clips, " +
            seconds(edl.total_duration_ms) + " s\n";
  std::string list;
  for (std::size_t i = 0; i < edl.entries.size(); ++i) {
    const auto& e = edl.entries[i];
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%04zu.mp4", i);
    script += expand(templates.cut, {{"input", shell_quote(source_path(e.source_id))},
                                     {"output", shell_quote(name)},
                                     {"in_s", seconds(e.span.start_ms)},
                                     {"out_s", seconds(e.span.end_ms)},
                                     {"duration_s", seconds(e.span.duration())}}) +
              "\n";
    list += "file '" + std::string(name) + "'\n";
  }
  script += "cat > clips.txt <<'EOF'\n" + list + "EOF\n";
  const std::string joined = edl.audio_track ? "joined.mp4" : std::string(output_name);
  script += expand(templates.concat, {{"list", "clips.txt"}, {"output", shell_quote(joined)}}) + "\n";
  if (edl.audio_track) {
    const auto& a = *edl.audio_track;
    script += expand(templates.mux, {{"video", shell_quote(joined)},
                                     {"audio", shell_quote(source_path(a.source_id))},
                                     {"output", shell_quote(output_name)},
                                     {"in_s", seconds(a.span.start_ms)},
                                     {"out_s", seconds(a.span.end_ms)},
                                     {"duration_s", seconds(a.span.duration())}}) +
              "\n";
  }
  return script;
}

}  // namespace montage
