import json
import math

import pytest

import montage

SRT = b"""1
00:00:01,000 --> 00:00:02,500
<i>The sea was calm.</i>

2
00:00:03,000 --> 00:00:04,000
[THUNDER] A storm came

3
00:00:04,000 --> 00:00:05,000
over the hills.
"""


def test_parse_and_round_trip():
    cues = montage.parse_srt(SRT)
    assert [c["index"] for c in cues] == [1, 2, 3]
    assert cues[0]["start_ms"] == 1000 and cues[0]["end_ms"] == 2500
    again = montage.parse_srt(montage.to_srt(cues).encode())
    assert again == cues


def test_sentences_join_cues_and_drop_tags():
    s = montage.sentences(SRT)
    assert [x["text"] for x in s] == ["The sea was calm", "A storm came over the hills"]
    assert (s[1]["start_ms"], s[1]["end_ms"]) == (3000, 5000)
    assert s[1]["source_cues"] == [2, 3]


def test_support_sets_prefers_the_hub():
    ranked = montage.support_sets(["sun moon", "rain wind", "snow fog", "sun rain snow"])
    assert len(ranked) == 4
    assert ranked[0] == (3, 3.0)
    assert sorted(score for _, score in ranked[1:]) == [1.0, 1.0, 1.0]


def test_grasshopper_diversifies_cliques():
    n = 6
    w = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and i // 3 == j // 3:
                w[i][j] = 1.0 + 0.1 * (i + j)
    ranked = montage.grasshopper(w, lam=0.9, k=2)
    assert ranked[0][0] // 3 != ranked[1][0] // 3
    with pytest.raises(montage.MontageError):
        montage.grasshopper([[0.0, 1.0]], k=1)


def test_lda_separates_two_vocabularies():
    docs = []
    for d in range(40):
        prefix = "a" if d % 2 == 0 else "b"
        docs.append([f"{prefix}{(d * 7 + i) % 10}" for i in range(30)])
    model = montage.train_lda(docs, topics=2, seed=3, min_df=1)
    assert model.topics == 2
    for k in range(2):
        assert math.isclose(sum(model.topic(k)), 1.0, abs_tol=1e-9)
    top = [max(range(2), key=model.infer(doc).__getitem__) for doc in docs]
    assert top[0] != top[1]
    assert all(t == top[d % 2] for d, t in enumerate(top))


def test_emotion_vector_width_and_names():
    sr = 16000
    samples = [0.5 * math.sin(2 * math.pi * 440 * i / sr) for i in range(sr)]
    v = montage.emotion_vector(samples, sr)
    assert len(v) == montage.EMOTION_VECTOR_SIZE == 384
    assert len(montage.feature_names()) == 384
    with pytest.raises(montage.MontageError):
        montage.emotion_vector([0.0] * 10, sr)


def test_detect_scenes_splits_at_cut():
    stats = [(i, i * 40, 0.0 if i == 0 else (200.0 if i == 100 else 1.0)) for i in range(300)]
    scenes = montage.detect_scenes(stats)
    assert [(s[2], s[3]) for s in scenes] == [(0, 100), (100, 200)]


def _talk_fixture(tmp_path):
    def srt(sentences):
        blocks = []
        for i, text in enumerate(sentences):
            start = i * 3000 + 500
            blocks.append(
                f"{i + 1}\n00:00:{start // 1000:02d},{start % 1000:03d} --> "
                f"00:00:{(start + 2500) // 1000:02d},{(start + 2500) % 1000:03d}\n{text}\n"
            )
        return "\n".join(blocks)

    stars = ["star galaxy orbit", "planet orbit moon", "comet star nebula", "telescope galaxy star"]
    cells = ["cell protein gene", "membrane cell enzyme", "gene nucleus protein", "bacteria cell gene"]
    (tmp_path / "lecture.srt").write_text(srt([s + "." for s in stars[:3]]))
    (tmp_path / "stars.srt").write_text(srt([s + " again." for s in stars]))
    (tmp_path / "cells.srt").write_text(srt([s + " again." for s in cells]))
    (tmp_path / "manifest.json").write_text(
        json.dumps(
            {
                "documentaries": [
                    {"id": "cells", "subtitles": "cells.srt"},
                    {"id": "stars", "subtitles": "stars.srt"},
                ]
            }
        )
    )
    config = tmp_path / "talk.json"
    config.write_text(
        json.dumps(
            {
                "mode": "talk",
                "lecture_subtitles": "lecture.srt",
                "manifest": "manifest.json",
                "output_dir": "out",
                "topics": 4,
                "min_df": 1,
                "top_k": 2,
            }
        )
    )
    return config


def test_run_talk_pipeline(tmp_path):
    config = _talk_fixture(tmp_path)
    result = montage.run(config)
    assert result["edl"]["kind"] == "talk"
    assert result["report"]["config"]["top_k"] == 2
    keys = [(e["source_id"], e["sentence_id"]) for e in result["report"]["selected"]]
    assert len(keys) == len(set(keys)) > 0
    assert (tmp_path / "out" / "edl.json").is_file()
    assert "compose" in result["timings"]

    again = montage.run(config, top_k=1)
    assert again["report"]["config"]["top_k"] == 1


def test_run_rejects_bad_input(tmp_path):
    config = _talk_fixture(tmp_path)
    (tmp_path / "lecture.srt").unlink()
    with pytest.raises(montage.MontageError):
        montage.run(config)
    with pytest.raises(montage.MontageError):
        montage.run(config, no_such_key=1)
