"""Sequence assembly with modality delimiters, the n-gram next-token
backend (absolute-discount backoff over the global id space), generation
sessions with 10-token motion history, and perplexity scoring.

The backend hides behind a one-method interface (context -> distribution
over a support set); the streaming layer never sees which model runs.
"""

from dataclasses import dataclass, field

import numpy as np

from .vocab import DELIMITERS, EOM, MOTION_SIZE, MOTION_START, SOM, VOCAB_TOTAL

NGRAM_MAGIC = "UANGRAM 1"


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Segment:
    modality: str
    open_id: int
    tokens: tuple  # global ids
    close_id: int


@dataclass(frozen=True)
class SequenceLayout:
    """Delimited condition segments followed by SOM, motion tokens, EOM."""

    segments: tuple
    motion: tuple  # global ids in the motion range

    def __post_init__(self):
        for seg in self.segments:
            if seg.modality not in DELIMITERS:
                raise ValueError(f"no delimiters for modality {seg.modality!r}")
        for m in self.motion:
            if not MOTION_START <= m < MOTION_START + MOTION_SIZE:
                raise ValueError(f"motion token {m} outside the motion range")

    def flatten(self) -> list:
        out = []
        for seg in self.segments:
            out.append(seg.open_id)
            out.extend(seg.tokens)
            out.append(seg.close_id)
        out.append(SOM)
        out.extend(self.motion)
        out.append(EOM)
        return out


_SEGMENT_ORDER = ("text", "music", "trajectory")
_WINDOWED = ("music", "trajectory")


def assemble(conditions: dict, motion_local, window: int, rng) -> SequenceLayout:
    """Build a training/inference layout.

    `conditions` maps modality name to a list of GLOBAL token ids; music
    and trajectory segments are contiguous random windows of exactly
    `window` tokens (text is never windowed).  `motion_local` holds local
    motion codebook ids.
    """
    segments = []
    for modality in _SEGMENT_ORDER:
        if modality not in conditions:
            continue
        toks = list(conditions[modality])
        if modality in _WINDOWED:
            if window > len(toks):
                raise ValueError(f"window {window} exceeds {modality} length {len(toks)}")
            start = int(rng.integers(len(toks) - window + 1))
            toks = toks[start : start + window]
        open_id, close_id = DELIMITERS[modality]
        segments.append(Segment(modality, open_id, tuple(toks), close_id))
    motion = tuple(MOTION_START + int(t) for t in motion_local)
    return SequenceLayout(tuple(segments), motion)


@dataclass
class NgramModel:
    """Backoff n-gram over the unified global id space.

    tables[k] maps a length-(k-1) context tuple to (token-counts dict,
    total count, distinct-continuation count); absolute discounting backs
    off to lower orders with a uniform floor at order 0.
    """

    order: int
    discount: float = 0.5
    tables: list = field(default_factory=list)
    vocab_size: int = VOCAB_TOTAL

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        if not self.tables:
            self.tables = [dict() for _ in range(self.order + 1)]  # index by order k

    def distribution(self, context, support=None) -> np.ndarray:
        """P(token | context) for every id in `support` (default: full vocab)."""
        if support is None:
            support = np.arange(self.vocab_size)
        else:
            support = np.asarray(support, dtype=np.int64)
        index = {int(t): i for i, t in enumerate(support)}
        ctx = tuple(int(t) for t in context)[-(self.order - 1) :] if self.order > 1 else ()
        p = np.full(len(support), 1.0 / self.vocab_size)
        for k in range(1, self.order + 1):
            c = ctx[-(k - 1) :] if k > 1 else ()
            if len(c) != k - 1:
                break  # not enough context for this and higher orders
            entry = self.tables[k].get(c)
            if entry is None:
                continue
            counts, total, distinct = entry
            vec = np.zeros(len(support))
            for tok, cnt in counts.items():
                i = index.get(tok)
                if i is not None:
                    vec[i] = max(cnt - self.discount, 0.0) / total
            lam = self.discount * distinct / total
            p = vec + lam * p
        return p

    def logprob(self, token: int, context) -> float:
        p = self.distribution(context, support=np.array([token]))
        return float(np.log(p[0]))


def train_ngram(corpus, order: int = 4, discount: float = 0.5) -> NgramModel:
    """Count-based fit over flattened layouts (or raw global-id lists)."""
    model = NgramModel(order=order, discount=discount)
    raw = [
        layout.flatten() if isinstance(layout, SequenceLayout) else list(layout)
        for layout in corpus
    ]
    if not raw:
        raise ValueError("corpus is empty")
    acc = [dict() for _ in range(order + 1)]
    for seq in raw:
        for i, tok in enumerate(seq):
            for k in range(1, order + 1):
                if i - (k - 1) < 0:
                    continue
                c = tuple(seq[i - (k - 1) : i])
                acc[k].setdefault(c, {})
                acc[k][c][tok] = acc[k][c].get(tok, 0) + 1
    for k in range(1, order + 1):
        for c, counts in acc[k].items():
            total = sum(counts.values())
            model.tables[k][c] = (counts, total, len(counts))
    return model


@dataclass
class GenerationSession:
    """Carries the retained motion-token history across commands."""

    seed: int = 0
    history_len: int = 10
    max_len: int = 256
    last_motion: list = field(default_factory=list)  # global ids of the previous output
    last_context: list = field(default_factory=list)  # context the latest generation started from
    rng: np.random.Generator = None

    def __post_init__(self):
        if self.history_len < 0:
            raise ValueError("history length must be >= 0")
        if self.rng is None:
            self.rng = np.random.Generator(np.random.PCG64(self.seed))

    def history(self) -> list:
        if self.history_len == 0:
            return []
        return list(self.last_motion[-self.history_len :])


def next_token(model, context, rng, temperature: float = 1.0, support=None):
    """Sample one global id from the (temperature-scaled) conditional.

    temperature 0 is the argmax limit with smallest-id tie-break.
    Returns (token, probability-under-the-sampling-distribution).
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if support is None:
        support = np.arange(model.vocab_size)
    else:
        support = np.asarray(support, dtype=np.int64)
    p = model.distribution(context, support)
    total = p.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise GenerationError("model assigns zero mass to the sampling support")
    p = p / total
    if temperature == 0.0:
        i = int(np.argmax(p))
        return int(support[i]), 1.0
    if temperature != 1.0:
        logp = np.log(np.maximum(p, 1e-300)) / temperature
        logp -= logp.max()
        p = np.exp(logp)
        p /= p.sum()
    i = int(rng.choice(len(support), p=p))
    return int(support[i]), float(p[i])


_MOTION_SUPPORT = None


def motion_support() -> np.ndarray:
    """Motion-range global ids plus EOM, ascending (argmax ties pick the smallest id)."""
    global _MOTION_SUPPORT
    if _MOTION_SUPPORT is None:
        _MOTION_SUPPORT = np.concatenate([[EOM], np.arange(MOTION_START, MOTION_START + MOTION_SIZE)])
    return _MOTION_SUPPORT


def stream_tokens(model, session: GenerationSession, conditions: SequenceLayout | list, temperature: float = 1.0):
    """Yield local motion ids one at a time until EOM or the session cap.

    The context starts with the previous output's last `history_len`
    motion tokens, then the condition segments, then SOM.  Sampling is
    masked to motion ids or EOM.
    """
    if session.max_len < 1:
        raise ValueError("session max length must be >= 1")
    if isinstance(conditions, SequenceLayout):
        cond_tokens = []
        for seg in conditions.segments:
            cond_tokens.append(seg.open_id)
            cond_tokens.extend(seg.tokens)
            cond_tokens.append(seg.close_id)
    else:
        cond_tokens = list(conditions)
    context = session.history() + cond_tokens + [SOM]
    support = motion_support()
    session.last_context = list(context)
    session.last_motion = []  # filled as we emit, so an interrupted stream still has history
    while len(session.last_motion) < session.max_len:
        tok, _ = next_token(model, context, session.rng, temperature, support)
        context.append(tok)
        if tok == EOM:
            break
        session.last_motion.append(tok)
        yield tok - MOTION_START


def generate(model, session: GenerationSession, conditions, temperature: float = 1.0) -> list:
    return list(stream_tokens(model, session, conditions, temperature))


def perplexity(model, heldout) -> float:
    """exp(mean NLL) over motion-token positions only; conditions are context."""
    if not heldout:
        raise ValueError("held-out set is empty")
    nll = 0.0
    count = 0
    for layout in heldout:
        seq = layout.flatten() if isinstance(layout, SequenceLayout) else list(layout)
        for i, tok in enumerate(seq):
            if not MOTION_START <= tok < MOTION_START + MOTION_SIZE:
                continue
            nll -= model.logprob(tok, seq[:i])
            count += 1
    if count == 0:
        raise ValueError("held-out set contains no motion tokens")
    return float(np.exp(nll / count))


def save_ngram(model: NgramModel, path) -> None:
    """`UANGRAM 1 <order>` header, then one `ctx ... : tok cnt ...` record per context."""
    lines = [f"{NGRAM_MAGIC} {model.order}", f"discount {repr(model.discount)}"]
    for k in range(1, model.order + 1):
        for c in sorted(model.tables[k]):
            counts, _, _ = model.tables[k][c]
            pairs = " ".join(f"{t} {n}" for t, n in sorted(counts.items()))
            ctx = " ".join(str(t) for t in c)
            lines.append(f"ctx {ctx} : {pairs}" if ctx else f"ctx : {pairs}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_ngram(path) -> NgramModel:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 3 or " ".join(header[:2]) != NGRAM_MAGIC:
            raise ValueError(f"{path}: not an n-gram model file")
        order = int(header[2])
        discount_line = f.readline().split()
        model = NgramModel(order=order, discount=float(discount_line[1]))
        for line in f:
            line = line.strip()
            if not line:
                continue
            if not line.startswith("ctx"):
                raise ValueError(f"{path}: bad record {line!r}")
            head, _, tail = line[3:].partition(":")
            c = tuple(int(t) for t in head.split()) if head.strip() else ()
            vals = tail.split()
            counts = {int(vals[i]): int(vals[i + 1]) for i in range(0, len(vals), 2)}
            model.tables[len(c) + 1][c] = (counts, sum(counts.values()), len(counts))
    return model


def save_token_corpus(corpus, path) -> None:
    """One sequence per line, space-separated global ids."""
    with open(path, "w", newline="\n") as f:
        for layout in corpus:
            seq = layout.flatten() if isinstance(layout, SequenceLayout) else list(layout)
            f.write(" ".join(str(t) for t in seq) + "\n")


def load_token_corpus(path) -> list:
    out = []
    with open(path) as f:
        for line in f:
            if line.strip():
                out.append([int(t) for t in line.split()])
    return out
