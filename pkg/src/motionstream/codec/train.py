"""Codec training (plain SGD baseline, adaptive-moment option) and the
finite-difference gradient check for the hand-written backward pass."""

from dataclasses import dataclass, field

import numpy as np

from .model import CodecConfig, CodecParams, backward_loss, features_of, forward_loss, init_params, reconstruct


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainSettings:
    steps: int = 2000
    batch: int = 8
    window: int = 64
    lr: float = 1e-3
    optimizer: str = "sgd"  # "sgd" (baseline, momentum-free) or "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    dtype: str = "f8"  # training dtype; serialized files are float32 either way
    eval_every: int = 0  # 0 = never; otherwise check eval RMS and stop at target
    target_rms: float = 0.0
    log_every: int = 0


@dataclass
class TrainResult:
    params: CodecParams
    losses: list = field(default_factory=list)  # one entry per step
    steps_per_epoch: int = 1
    stopped_at: int = 0

    @property
    def epoch_losses(self) -> list:
        spe = max(1, self.steps_per_epoch)
        out = []
        for i in range(0, len(self.losses), spe):
            chunk = self.losses[i : i + spe]
            out.append(float(np.mean(chunk)))
        return out


def _as_features(corpus, input_dim):
    out = []
    for item in corpus:
        x = features_of(item)
        if x.ndim != 2 or x.shape[1] != input_dim:
            raise ValueError(f"corpus item has shape {x.shape}, expected (N, {input_dim})")
        out.append(np.ascontiguousarray(x))
    if not out:
        raise ValueError("corpus is empty")
    return out


def _sample_batch(rng, feats, batch, window, dtype):
    xs = np.empty((batch, window, feats[0].shape[1]), dtype=dtype)
    for i in range(batch):
        j = int(rng.integers(len(feats)))
        seq = feats[j]
        if seq.shape[0] < window:
            reps = int(np.ceil(window / seq.shape[0]))
            seq = np.concatenate([seq] * reps)[:window]
            start = 0
        else:
            start = int(rng.integers(seq.shape[0] - window + 1))
        xs[i] = seq[start : start + window]
    return xs


def eval_rms(params: CodecParams, corpus, max_sequences: int | None = None) -> np.ndarray:
    """Per-DOF RMS reconstruction error over a corpus (pad-to-divisible by repeat)."""
    cfg = params.config
    feats = _as_features(corpus, cfg.input_dim)
    if max_sequences is not None:
        feats = feats[:max_sequences]
    sq = np.zeros(cfg.input_dim)
    count = 0
    for x in feats:
        n = x.shape[0]
        pad = (-n) % cfg.downsample
        xp = np.concatenate([x, np.repeat(x[-1:], pad, axis=0)]) if pad else x
        rec = reconstruct(xp, params)[:n]
        sq += np.sum((rec - x) ** 2, axis=0)
        count += n
    return np.sqrt(sq / count)


def train_codec(corpus, config: CodecConfig, settings: TrainSettings | None = None, seed: int = 0) -> TrainResult:
    """Minimize reconstruction MSE through the straight-through quantizer.

    Deterministic given the seed: parameter init, batch sampling, and the
    update rule all derive from one PCG64 stream.  Raises TrainingError
    with the offending step index if the loss goes non-finite.
    """
    settings = settings or TrainSettings()
    dtype = np.float64 if settings.dtype == "f8" else np.float32
    feats = _as_features(corpus, config.input_dim)
    params = init_params(config, seed=seed, dtype=dtype)
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    store = params.store

    m = {n: np.zeros_like(t) for n, t in store.tensors.items()} if settings.optimizer == "adam" else None
    v = {n: np.zeros_like(t) for n, t in store.tensors.items()} if settings.optimizer == "adam" else None
    if settings.optimizer not in ("sgd", "adam"):
        raise ValueError(f"unknown optimizer {settings.optimizer!r}")

    losses = []
    stopped_at = settings.steps
    for step in range(settings.steps):
        batch = _sample_batch(rng, feats, settings.batch, settings.window, dtype)
        loss, caches = forward_loss(params, batch)
        if not np.isfinite(loss):
            raise TrainingError(f"training diverged (non-finite loss) at step {step}")
        losses.append(loss)
        grads = backward_loss(params, caches)
        if settings.optimizer == "sgd":
            for n in store.names:
                store.tensors[n] -= settings.lr * grads[n]
        else:
            b1, b2 = settings.adam_beta1, settings.adam_beta2
            t = step + 1
            corr1 = 1.0 - b1**t
            corr2 = 1.0 - b2**t
            for n in store.names:
                g = grads[n]
                m[n] = b1 * m[n] + (1 - b1) * g
                v[n] = b2 * v[n] + (1 - b2) * g * g
                store.tensors[n] -= settings.lr * (m[n] / corr1) / (np.sqrt(v[n] / corr2) + settings.adam_eps)
        if settings.log_every and (step + 1) % settings.log_every == 0:
            print(f"step {step + 1}: loss {loss:.6f}", flush=True)
        if settings.eval_every and (step + 1) % settings.eval_every == 0 and settings.target_rms > 0:
            rms = eval_rms(params, feats, max_sequences=64)
            if float(rms.max()) <= settings.target_rms:
                stopped_at = step + 1
                break

    result = TrainResult(params, losses, steps_per_epoch=max(1, len(feats) // settings.batch))
    result.stopped_at = stopped_at if losses else 0
    return result


def gradient_check(params: CodecParams, batch, epsilon: float = 1e-4, samples_per_tensor: int = 6, seed: int = 0) -> float:
    """Max relative error between the analytic and central-difference gradients.

    The finite differences are taken on the loss surface the backward pass
    actually differentiates: the quantizer's rounding offsets are frozen at
    the base point, so the straight-through path stays active while the
    surface stays smooth.
    """
    if not (1e-6 <= epsilon <= 1e-3):
        raise ValueError("epsilon must lie in [1e-6, 1e-3]")
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 2:
        batch = batch[None]
    loss0, caches = forward_loss(params, batch)
    grads = backward_loss(params, caches)
    offsets = caches["q"] - caches["g"]

    rng = np.random.Generator(np.random.PCG64(seed))
    store = params.store
    worst = 0.0
    for name in store.names:
        tensor = store.tensors[name]
        flat = tensor.reshape(-1)
        k = min(samples_per_tensor, flat.size)
        idxs = rng.choice(flat.size, size=k, replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + epsilon
            lp, _ = forward_loss(params, batch, offsets=offsets)
            flat[i] = orig - epsilon
            lm, _ = forward_loss(params, batch, offsets=offsets)
            flat[i] = orig
            g_fd = (lp - lm) / (2.0 * epsilon)
            g_an = grads[name].reshape(-1)[i]
            err = abs(g_an - g_fd) / max(1e-8, abs(g_an) + abs(g_fd))
            worst = max(worst, err)
    return worst
