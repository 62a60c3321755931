"""Three-component corruption model (baseline Gaussian, temporally
correlated bursts, sparse jitter spikes) and the denoising-roundtrip
sweep over noise scales."""

from dataclasses import dataclass, field

import numpy as np

from .codec.model import CodecParams, features_of, reconstruct
from .motion import MotionSequence

BURST_AR_COEFF = 0.9  # temporal correlation of burst noise


@dataclass(frozen=True)
class NoiseConfig:
    sigma_base: float = 0.01
    p_burst: float = 0.05  # per frame
    sigma_burst: float = 0.1
    burst_frames: tuple = (8, 20)  # inclusive duration range
    p_jitter: float = 0.001  # per dimension per frame
    sigma_jitter: float = 0.3
    scale: float = 1.0  # multiplies the three sigmas, never the probabilities

    def __post_init__(self):
        if not (0 <= self.p_burst <= 1 and 0 <= self.p_jitter <= 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if min(self.sigma_base, self.sigma_burst, self.sigma_jitter) < 0 or self.scale < 0:
            raise ValueError("sigmas and scale must be nonnegative")
        lo, hi = self.burst_frames
        if not 1 <= lo <= hi:
            raise ValueError("burst duration range invalid")

    def scaled(self, scale: float) -> "NoiseConfig":
        return NoiseConfig(self.sigma_base, self.p_burst, self.sigma_burst, self.burst_frames, self.p_jitter, self.sigma_jitter, scale)


def corrupt(seq: MotionSequence, config: NoiseConfig = NoiseConfig(), rng=None) -> MotionSequence:
    """Additive corruption of the joint angles; root state is untouched.

    base: i.i.d. Gaussian on every entry.  burst: frames start a burst with
    p_burst; each burst picks a random half of the dimensions and adds an
    AR(1)-correlated Gaussian for a uniform 8-20 frame span.  jitter: rare
    large spikes per entry.  `scale` multiplies the three sigmas only, so
    scale 0 returns the input bit-exactly.
    """
    rng = rng or np.random.Generator(np.random.PCG64(0))
    t, d = seq.dof.shape
    noise = np.zeros((t, d))

    s_base = config.sigma_base * config.scale
    base = rng.normal(0.0, 1.0, size=(t, d))
    if s_base > 0:
        noise += s_base * base

    # burst starts are sampled every frame to keep the rng stream layout
    # independent of scale; contributions are zeroed when sigma is zero
    starts = rng.random(t) < config.p_burst
    s_burst = config.sigma_burst * config.scale
    lo, hi = config.burst_frames
    for f in np.where(starts)[0]:
        dur = int(rng.integers(lo, hi + 1))
        dims = rng.random(d) < 0.5
        e = rng.normal(0.0, 1.0, size=(dur, d))
        ar = np.empty_like(e)
        ar[0] = e[0]
        for i in range(1, dur):
            ar[i] = BURST_AR_COEFF * ar[i - 1] + np.sqrt(1.0 - BURST_AR_COEFF**2) * e[i]
        span = min(dur, t - f)
        if s_burst > 0:
            noise[f : f + span] += s_burst * ar[:span] * dims[None, :]

    jitter_mask = rng.random((t, d)) < config.p_jitter
    s_jitter = config.sigma_jitter * config.scale
    jitter = rng.normal(0.0, 1.0, size=(t, d))
    if s_jitter > 0:
        noise += s_jitter * jitter * jitter_mask

    return MotionSequence(seq.fps, seq.dof + noise, seq.root_pos, seq.root_quat)


def roundtrip_error(clean: MotionSequence, noisy: MotionSequence, codec: CodecParams, return_reconstruction: bool = False):
    """(raw RMS of noisy vs clean, RMS of codec-roundtripped noisy vs clean), radians."""
    x = features_of(clean)
    y = features_of(noisy)
    if x.shape[1] != codec.config.input_dim:
        raise ValueError(f"codec expects input_dim {codec.config.input_dim}")
    n = x.shape[0] - (x.shape[0] % codec.config.downsample)
    x, y = x[:n], y[:n]
    rec = reconstruct(y, codec)
    raw = float(np.sqrt(np.mean((y - x) ** 2)))
    rt = float(np.sqrt(np.mean((rec - x) ** 2)))
    if return_reconstruction:
        return raw, rt, rec
    return raw, rt


@dataclass
class SweepResult:
    scales: list
    raw_rms: list  # mean over the corpus, per scale
    roundtrip_rms: list
    win_fraction: list  # fraction of sequences with roundtrip < raw, per scale
    mpjpe_cm: list = field(default_factory=list)  # only with a tracker sim
    success_rate: list = field(default_factory=list)

    def rows(self):
        out = []
        for i, s in enumerate(self.scales):
            row = {"scale": s, "raw_rms": self.raw_rms[i], "roundtrip_rms": self.roundtrip_rms[i], "win_fraction": self.win_fraction[i]}
            if self.mpjpe_cm:
                row["mpjpe_cm"] = self.mpjpe_cm[i]
                row["success_rate"] = self.success_rate[i]
            out.append(row)
        return out


def sweep(corpus, codec: CodecParams, scales=(1.0, 2.0, 4.0, 8.0), seed: int = 0, config: NoiseConfig = NoiseConfig(), tracker=None) -> SweepResult:
    """Corrupt the corpus at each scale and aggregate roundtrip errors.

    `tracker`, when given, is called as tracker(roundtripped_sequence,
    clean_sequence) -> (mpjpe_cm, success_bool) on the codec's
    reconstruction of the noisy input (the denoised reference a real
    tracker would consume) and contributes the optional curves.
    """
    scales = sorted(float(s) for s in scales)
    result = SweepResult(scales, [], [], [], [] if tracker else [], [] if tracker else [])
    for si, s in enumerate(scales):
        raws, rts, wins = [], [], 0
        mpj, succ = [], 0
        for qi, clean in enumerate(corpus):
            rng = np.random.Generator(np.random.PCG64((seed, si, qi)))
            noisy = corrupt(clean, config.scaled(s), rng)
            raw, rt, rec = roundtrip_error(clean, noisy, codec, return_reconstruction=True)
            raws.append(raw)
            rts.append(rt)
            wins += rt < raw
            if tracker is not None:
                n = rec.shape[0]
                rec_seq = MotionSequence(clean.fps, rec, clean.root_pos[:n], clean.root_quat[:n])
                m, ok = tracker(rec_seq, clean)
                mpj.append(m)
                succ += bool(ok)
        result.raw_rms.append(float(np.mean(raws)))
        result.roundtrip_rms.append(float(np.mean(rts)))
        result.win_fraction.append(wins / len(corpus))
        if tracker is not None:
            result.mpjpe_cm.append(float(np.mean(mpj)))
            result.success_rate.append(succ / len(corpus))
    return result


def save_sweep_report(result: SweepResult, path) -> None:
    lines = []
    for row in result.rows():
        lines.append(" ".join(f"{k}={v:.6g}" for k, v in row.items()))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
