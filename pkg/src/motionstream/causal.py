"""Streaming token-to-frame decoding with strictly causal convolutions and
chunk-triggered emission.

Every layer computes y_t = sum_k W_k . h_{t-k} + b over current and past
steps only (zero-filled history), so the frames emitted for a token never
depend on later tokens.  Decoding work is deferred until a full chunk of
tokens has accumulated; `flush` drains the partial remainder.
"""

from dataclasses import dataclass, field

import numpy as np

from .codec import nn
from .codec.fsq import codebook_size, tokens_to_latents
from .codec.model import CodecParams
from .codec.serialize import read_container, write_container
from .codec.train import TrainingError

DEFAULT_CHUNK_TOKENS = 5  # 10 frames = 200 ms at 50 Hz, well inside the latency budget


@dataclass(frozen=True)
class CausalConfig:
    levels: tuple = (8, 8, 8, 6, 5)
    hidden: int = 64
    layers: int = 2  # hidden causal conv layers before the output conv
    kernel_size: int = 7
    upsample: int = 2  # frames per token; equals the offline codec's downsample
    output_dim: int = 29
    use_activation: bool = True

    @property
    def latent_dim(self) -> int:
        return len(self.levels)

    @property
    def codebook_size(self) -> int:
        return codebook_size(self.levels)

    def layer_dims(self) -> list:
        """[(cin, cout), ...] for the conv stack, output conv last."""
        dims = []
        cin = self.latent_dim
        for _ in range(self.layers):
            dims.append((cin, self.hidden))
            cin = self.hidden
        dims.append((cin, self.output_dim * self.upsample))
        return dims


@dataclass
class CausalDecoderParams:
    config: CausalConfig
    store: nn.ParamStore

    def layer_tensors(self):
        out = []
        for i in range(len(self.config.layer_dims())):
            out.append((self.store[f"causal.l{i}.w"], self.store[f"causal.l{i}.b"]))
        return out


def init_causal_params(config: CausalConfig, seed: int = 0, dtype=np.float64, zero_out: bool = True) -> CausalDecoderParams:
    rng = np.random.Generator(np.random.PCG64(seed))
    store = nn.ParamStore()
    dims = config.layer_dims()
    for i, (cin, cout) in enumerate(dims):
        zero = zero_out and i == len(dims) - 1
        w, b = nn.init_conv(rng, cout, cin, config.kernel_size, dtype, zero=zero)
        store.add(f"causal.l{i}.w", w)
        store.add(f"causal.l{i}.b", b)
    return CausalDecoderParams(config, store)


@dataclass
class StreamState:
    """Single-owner per-stream state: per-layer rings of the last K-1 inputs
    plus the pending-token accumulator."""

    params: CausalDecoderParams
    chunk_size: int = DEFAULT_CHUNK_TOKENS
    histories: list = field(default_factory=list)
    pending: list = field(default_factory=list)

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not self.histories:
            self.reset_history()

    def reset_history(self):
        cfg = self.params.config
        k = cfg.kernel_size
        dtype = self.params.store["causal.l0.w"].dtype
        self.histories = [np.zeros((k - 1, cin), dtype=dtype) for cin, _ in cfg.layer_dims()]


def causal_step(state: StreamState, latent) -> np.ndarray:
    """Advance every layer by one step; returns the final-layer output.

    With history H ordered oldest-first and the current input appended,
    y = sum_k W[:, :, k] . H[k] reproduces the padded convolution exactly.
    """
    cfg = state.params.config
    a = np.asarray(latent, dtype=state.histories[0].dtype)
    n_layers = len(cfg.layer_dims())
    for i, (w, b) in enumerate(state.params.layer_tensors()):
        hist = state.histories[i]
        stacked = np.vstack([hist, a[None, :]]) if hist.shape[0] else a[None, :]
        y = np.einsum("ock,kc->o", w, stacked) + b
        if hist.shape[0]:
            state.histories[i] = np.vstack([hist[1:], a[None, :]])
        if i < n_layers - 1 and cfg.use_activation:
            a, _ = nn.gelu_forward(y)
        else:
            a = y
    return a


def _decode_steps(state: StreamState, tokens) -> np.ndarray:
    cfg = state.params.config
    latents = tokens_to_latents(np.asarray(tokens, dtype=np.int64), cfg.levels)
    frames = np.empty((len(tokens) * cfg.upsample, cfg.output_dim))
    for i, z in enumerate(latents):
        out = causal_step(state, z)
        frames[i * cfg.upsample : (i + 1) * cfg.upsample] = out.reshape(cfg.upsample, cfg.output_dim)
    return frames


def push_tokens(state: StreamState, tokens, emit_partial: bool = False) -> np.ndarray:
    """Append tokens; decode and return frames for every completed chunk.

    Invalid ids raise before any state changes.  Partial chunks stay
    buffered until `flush`.
    """
    cfg = state.params.config
    tokens = np.atleast_1d(np.asarray(tokens, dtype=np.int64)).tolist()
    for t in tokens:
        if not 0 <= t < cfg.codebook_size:
            raise ValueError(f"token id {t} outside codebook [0, {cfg.codebook_size})")
    state.pending.extend(tokens)
    out = []
    while len(state.pending) >= state.chunk_size:
        chunk = state.pending[: state.chunk_size]
        del state.pending[: state.chunk_size]
        out.append(_decode_steps(state, chunk))
    if out:
        return np.concatenate(out)
    return np.zeros((0, cfg.output_dim))


def flush(state: StreamState) -> np.ndarray:
    """Decode whatever partial chunk is pending and reset the accumulator."""
    cfg = state.params.config
    if not state.pending:
        return np.zeros((0, cfg.output_dim))
    chunk = state.pending
    state.pending = []
    return _decode_steps(state, chunk)


def decode_stream(tokens, params: CausalDecoderParams, chunk_size: int = DEFAULT_CHUNK_TOKENS) -> np.ndarray:
    """Fresh-state push of the whole sequence plus flush (the offline reference)."""
    state = StreamState(params, chunk_size)
    head = push_tokens(state, tokens)
    tail = flush(state)
    return np.concatenate([head, tail])


def _forward_train(params: CausalDecoderParams, latents):
    """Vectorized causal forward for training: left padding only."""
    cfg = params.config
    k = cfg.kernel_size
    a = latents
    caches = []
    n_layers = len(cfg.layer_dims())
    for i, (w, b) in enumerate(params.layer_tensors()):
        a, c = nn.conv1d_forward(a, w, b, stride=1, pad=(k - 1, 0))
        act_cache = None
        if i < n_layers - 1 and cfg.use_activation:
            a, act_cache = nn.gelu_forward(a)
        caches.append((c, act_cache))
    bsz, m, _ = a.shape
    return a.reshape(bsz, m * cfg.upsample, cfg.output_dim), caches


def _backward_train(params: CausalDecoderParams, gy, caches, grads):
    cfg = params.config
    bsz = gy.shape[0]
    g = gy.reshape(bsz, -1, cfg.output_dim * cfg.upsample)
    n_layers = len(cfg.layer_dims())
    for i in range(n_layers - 1, -1, -1):
        conv_cache, act_cache = caches[i]
        if act_cache is not None:
            g = nn.gelu_backward(g, act_cache)
        g, gw, gb = nn.conv1d_backward(g, conv_cache)
        grads[f"causal.l{i}.w"] += gw
        grads[f"causal.l{i}.b"] += gb
    return g


@dataclass
class CausalTrainSettings:
    steps: int = 1500
    batch: int = 8
    lr: float = 2e-3
    optimizer: str = "adam"
    dtype: str = "f8"
    log_every: int = 0


def train_causal(codec: CodecParams, corpus, config: CausalConfig | None = None, settings: CausalTrainSettings | None = None, seed: int = 0):
    """Distill token streams back to ground-truth frames with MSE.

    The corpus is encoded once with the trained offline codec; training
    then fits the causal stack so streaming decode matches the source
    frames.  Returns (params, per-step losses).
    """
    from .codec.model import encode, features_of

    settings = settings or CausalTrainSettings()
    config = config or CausalConfig(levels=codec.config.levels, upsample=codec.config.downsample, output_dim=codec.config.input_dim)
    if config.levels != codec.config.levels or config.upsample != codec.config.downsample:
        raise ValueError("causal config must match the codec's levels and downsample")
    dtype = np.float64 if settings.dtype == "f8" else np.float32

    pairs = []
    for item in corpus:
        x = features_of(item)
        n = x.shape[0] - (x.shape[0] % codec.config.downsample)
        x = x[:n]
        toks = encode(x, codec)
        pairs.append((tokens_to_latents(toks, config.levels).astype(dtype), x.astype(dtype)))

    params = init_causal_params(config, seed=seed, dtype=dtype)
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    store = params.store
    m = {n: np.zeros_like(t) for n, t in store.tensors.items()}
    v = {n: np.zeros_like(t) for n, t in store.tensors.items()}
    losses = []
    for step in range(settings.steps):
        idx = rng.integers(len(pairs), size=settings.batch)
        lat = np.stack([pairs[i][0] for i in idx])
        target = np.stack([pairs[i][1] for i in idx])
        pred, caches = _forward_train(params, lat)
        loss, loss_cache = nn.mse_loss_forward(pred, target)
        if not np.isfinite(loss):
            raise TrainingError(f"causal training diverged at step {step}")
        losses.append(loss)
        grads = store.zero_grads()
        _backward_train(params, nn.mse_loss_backward(loss_cache), caches, grads)
        if settings.optimizer == "sgd":
            for n in store.names:
                store.tensors[n] -= settings.lr * grads[n]
        else:
            t = step + 1
            for n in store.names:
                g = grads[n]
                m[n] = 0.9 * m[n] + 0.1 * g
                v[n] = 0.999 * v[n] + 0.001 * g * g
                store.tensors[n] -= settings.lr * (m[n] / (1 - 0.9**t)) / (np.sqrt(v[n] / (1 - 0.999**t)) + 1e-8)
        if settings.log_every and (step + 1) % settings.log_every == 0:
            print(f"causal step {step + 1}: loss {loss:.6f}", flush=True)
    return params, losses


def save_causal(params: CausalDecoderParams, path) -> None:
    cfg = params.config
    items = {
        "levels": ",".join(str(l) for l in cfg.levels),
        "hidden": cfg.hidden,
        "layers": cfg.layers,
        "kernel_size": cfg.kernel_size,
        "upsample": cfg.upsample,
        "output_dim": cfg.output_dim,
        "use_activation": 1 if cfg.use_activation else 0,
    }
    write_container(path, True, items, params.store)


def load_causal(path, dtype=np.float64) -> CausalDecoderParams:
    causal, items, store = read_container(path)
    if not causal:
        raise ValueError(f"{path}: not a causal decoder file")
    cfg = CausalConfig(
        levels=tuple(int(l) for l in items["levels"].split(",")),
        hidden=int(items["hidden"]),
        layers=int(items["layers"]),
        kernel_size=int(items["kernel_size"]),
        upsample=int(items["upsample"]),
        output_dim=int(items["output_dim"]),
        use_activation=items["use_activation"] == "1",
    )
    if dtype is not np.float32:
        for n in store.names:
            store.tensors[n] = store.tensors[n].astype(dtype)
    return CausalDecoderParams(cfg, store)
