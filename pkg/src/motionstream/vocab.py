"""Unified token vocabulary: global index allocation across modalities,
plus the corpus-built word-level text tokenizer.

Global layout (sizes 130,077 / 2 / 15,360 / 6,144 / 60):
  text [0, 130076], SOM 130077, EOM 130078, motion [130079, 145438],
  music [145439, 151582], trajectory [151583, 151642].
"""

import re
from dataclasses import dataclass

TEXT_START = 0
TEXT_SIZE = 130_077
SOM = 130_077
EOM = 130_078
MOTION_START = 130_079
MOTION_SIZE = 15_360
MUSIC_START = 145_439
MUSIC_SIZE = 6_144
TRAJ_START = 151_583
TRAJ_SIZE = 60
VOCAB_TOTAL = 151_643

_RANGES = {
    "text": (TEXT_START, TEXT_SIZE),
    "som": (SOM, 1),
    "eom": (EOM, 1),
    "motion": (MOTION_START, MOTION_SIZE),
    "music": (MUSIC_START, MUSIC_SIZE),
    "trajectory": (TRAJ_START, TRAJ_SIZE),
}

# per-modality condition delimiters, allocated from the tail of the text range
DELIMITERS = {
    "text": (130_071, 130_072),
    "music": (130_073, 130_074),
    "trajectory": (130_075, 130_076),
}
DELIMITER_WORDS = {
    "<text>": 130_071,
    "</text>": 130_072,
    "<music>": 130_073,
    "</music>": 130_074,
    "<traj>": 130_075,
    "</traj>": 130_076,
}
MAX_BUILT_WORDS = min(DELIMITER_WORDS.values())  # built words fill [0, 130070]

UNKNOWN_ID = 0
UNKNOWN_WORD = "<unk>"

_WORD_RE = re.compile(r"[a-z0-9]+")


def to_global(modality: str, local: int) -> int:
    if modality not in _RANGES:
        raise ValueError(f"unknown modality {modality!r}")
    start, size = _RANGES[modality]
    if not 0 <= local < size:
        raise ValueError(f"local id {local} out of range for {modality} (size {size})")
    return start + local


def from_global(gid: int):
    if not 0 <= gid < VOCAB_TOTAL:
        raise ValueError(f"global id {gid} out of range [0, {VOCAB_TOTAL})")
    for modality, (start, size) in _RANGES.items():
        if start <= gid < start + size:
            return modality, gid - start
    raise AssertionError("unreachable: ranges cover the full space")


def modality_of(gid: int) -> str:
    return from_global(gid)[0]


@dataclass
class TextVocab:
    """word -> local text id; id 0 is the unknown word."""

    words: dict

    def __post_init__(self):
        if self.words.get(UNKNOWN_WORD) != UNKNOWN_ID:
            raise ValueError("text vocab must reserve id 0 for the unknown word")
        if len(self.words) > TEXT_SIZE:
            raise ValueError("text vocab exceeds the text range")
        self._by_id = {i: w for w, i in self.words.items()}

    def __len__(self):
        return len(self.words)

    def word_of(self, local_id: int) -> str:
        return self._by_id.get(local_id, UNKNOWN_WORD)


def split_words(s: str):
    return _WORD_RE.findall(s.lower())


def build_text_vocab(corpus_lines, max_size: int = MAX_BUILT_WORDS) -> TextVocab:
    """Frequency-ranked word table from a training corpus (deterministic:
    ties break alphabetically).  Delimiter words sit at their fixed tail ids."""
    counts = {}
    for line in corpus_lines:
        for w in split_words(line):
            counts[w] = counts.get(w, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    words = {UNKNOWN_WORD: UNKNOWN_ID}
    for i, (w, _) in enumerate(ranked[: max_size - 1], start=1):
        words[w] = i
    words.update(DELIMITER_WORDS)
    return TextVocab(words)


def tokenize_text(s: str, vocab: TextVocab) -> list:
    """Lowercase, split on whitespace/punctuation, map to local ids (unknown -> 0)."""
    return [vocab.words.get(w, UNKNOWN_ID) for w in split_words(s)]


def detokenize_text(ids, vocab: TextVocab) -> str:
    return " ".join(vocab.word_of(i) for i in ids)


def save_text_vocab(vocab: TextVocab, path) -> None:
    """`word<TAB>local_id` per line, sorted by id."""
    rows = sorted(vocab.words.items(), key=lambda kv: kv[1])
    with open(path, "w", newline="\n") as f:
        for w, i in rows:
            f.write(f"{w}\t{i}\n")


def load_text_vocab(path) -> TextVocab:
    words = {}
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            w, _, i = line.rstrip("\n").partition("\t")
            words[w] = int(i)
    return TextVocab(words)
