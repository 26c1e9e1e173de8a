"""Speech-duration aware machine translation toolkit."""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import Error  # noqa: F401
except ImportError:  # test builds put the extension on sys.path directly
    from _core import *  # noqa: F401,F403
    from _core import Error  # noqa: F401

__all__ = [
    "Error",
    "quantize_ratio",
    "sinusoidal_pe",
    "frames_from_seconds",
    "speech_ratio",
    "slc",
    "bleu",
    "split_words",
    "classify_phoneme",
    "scale_to_total",
    "stretch_to_budget",
    "train_bpe",
    "segment_word",
    "word_durations",
    "generate_toy_corpus",
    "prepare",
    "gen_toy",
    "train",
    "translate",
    "evaluate",
    "adjust",
]
