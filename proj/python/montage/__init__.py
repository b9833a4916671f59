"""Edit decision lists for film tributes and lecture-driven science talks."""

import json as _json

from ._core import (
    DEFAULT_EMOTION_THRESHOLD,
    DEFAULT_SCENE_THRESHOLD,
    EMOTION_VECTOR_SIZE,
    MontageError,
    StageError,
    TopicModel,
    detect_scenes,
    emotion_vector,
    feature_names,
    grasshopper,
    parse_srt,
    sentences,
    support_sets,
    to_srt,
    topic_tokens,
    train_lda,
)
from ._core import run as _run

__all__ = [
    "DEFAULT_EMOTION_THRESHOLD",
    "DEFAULT_SCENE_THRESHOLD",
    "EMOTION_VECTOR_SIZE",
    "MontageError",
    "StageError",
    "TopicModel",
    "detect_scenes",
    "emotion_vector",
    "feature_names",
    "grasshopper",
    "parse_srt",
    "run",
    "sentences",
    "support_sets",
    "to_srt",
    "topic_tokens",
    "train_lda",
]


def run(config_path, **overrides):
    """Run the pipeline in a JSON config. Keyword overrides use the config keys.

    Returns a dict with the parsed ``edl`` and ``report``, the ``written``
    paths and per-stage ``timings`` in milliseconds.
    """
    result = _run(str(config_path), _json.dumps(overrides) if overrides else "")
    return {
        "edl": _json.loads(result["edl_json"]),
        "report": _json.loads(result["report_json"]),
        "written": result["written"],
        "timings": result["timings"],
    }
