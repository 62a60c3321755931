"""Music feature frames (35-wide at 30 Hz) and the simplified audio
front-end: envelope, onsets, and beat peaks from PCM.  MFCC and chroma
columns are ingested from feature files, never computed here."""

import numpy as np

from .codec.model import CodecParams, encode

MUSIC_FPS = 30.0
MUSIC_MAGIC = "UAMUSIC 1"
FEATURE_WIDTH = 35  # envelope 1 + mfcc 20 + chroma 12 + beat_peak 1 + onset 1
ENVELOPE_COL = 0
MFCC_COLS = slice(1, 21)
CHROMA_COLS = slice(21, 33)
BEAT_COL = 33
ONSET_COL = 34


def validate_features(frames) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[1] != FEATURE_WIDTH:
        raise ValueError(f"music features must be (N, {FEATURE_WIDTH}), got {frames.shape}")
    flags = frames[:, [BEAT_COL, ONSET_COL]]
    if not np.all((flags == 0.0) | (flags == 1.0)):
        raise ValueError("beat_peak and onset columns must be binary")
    return frames


def extract_envelope_onsets(pcm, sample_rate: float) -> np.ndarray:
    """30 Hz partial feature stream from mono PCM: envelope (windowed RMS),
    onset (positive spectral-flux threshold crossing), beat_peak (local max
    of onset strength).  MFCC/chroma columns are zero-filled."""
    if sample_rate < 8000:
        raise ValueError("sample rate must be at least 8 kHz")
    pcm = np.asarray(pcm, dtype=np.float64).reshape(-1)
    if pcm.size == 0:
        return np.zeros((0, FEATURE_WIDTH))
    hop = int(round(sample_rate / MUSIC_FPS))
    n_frames = int(np.ceil(pcm.size / hop))
    padded = np.zeros(n_frames * hop)
    padded[: pcm.size] = pcm
    frames = padded.reshape(n_frames, hop)
    window = np.hanning(hop)

    env = np.sqrt(np.mean(frames * frames, axis=1))
    spec = np.abs(np.fft.rfft(frames * window, axis=1))
    prev = np.vstack([np.zeros((1, spec.shape[1])), spec[:-1]])
    flux = np.sum(np.maximum(spec - prev, 0.0), axis=1)
    energy = np.sum(spec, axis=1)
    strength = np.where(energy > 1e-9, flux / np.maximum(energy, 1e-12), 0.0)
    onset = strength > 0.5

    beat = np.zeros(n_frames, dtype=bool)
    for k in range(n_frames):
        left = strength[k - 1] if k > 0 else -np.inf
        right = strength[k + 1] if k + 1 < n_frames else -np.inf
        beat[k] = onset[k] and strength[k] > left and strength[k] >= right

    out = np.zeros((n_frames, FEATURE_WIDTH))
    out[:, ENVELOPE_COL] = env
    out[:, BEAT_COL] = beat.astype(np.float64)
    out[:, ONSET_COL] = onset.astype(np.float64)
    return out


def tokenize_music(frames, music_codec: CodecParams) -> np.ndarray:
    """Delegate to the music codec: N feature frames -> N/downsample local tokens."""
    if music_codec is None:
        raise ValueError("music tokenization needs trained music codec parameters")
    frames = validate_features(frames)
    cfg = music_codec.config
    if cfg.input_dim != FEATURE_WIDTH:
        raise ValueError(f"music codec expects input_dim {FEATURE_WIDTH}, got {cfg.input_dim}")
    n = frames.shape[0]
    pad = (-n) % cfg.downsample
    if pad:
        frames = np.concatenate([frames, np.repeat(frames[-1:], pad, axis=0)])
    return encode(frames, music_codec)


def save_music_features(frames, path) -> None:
    frames = validate_features(frames)
    lines = [f"{MUSIC_MAGIC} 30 {frames.shape[0]}"]
    for row in frames:
        lines.append(" ".join(repr(float(v)) for v in row))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_music_features(path) -> np.ndarray:
    with open(path) as f:
        text = f.read()
    return parse_music_text(text, source=str(path))


def parse_music_text(text: str, source: str = "<music>") -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    if len(header) != 4 or " ".join(header[:2]) != MUSIC_MAGIC or header[2] != "30":
        raise ValueError(f"{source}: not a 30 Hz music feature file")
    n = int(header[3])
    data = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=np.float64)
    if data.shape != (n, FEATURE_WIDTH):
        raise ValueError(f"{source}: expected {n}x{FEATURE_WIDTH} values")
    return validate_features(data)
