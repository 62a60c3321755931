"""Finite scalar quantization: per-dimension level quantizer and the
mixed-radix bijection between code tuples and flat codebook indices."""

import numpy as np


def round_half_away(x):
    """Round half away from zero (platform-stable, unlike banker's rounding)."""
    x = np.asarray(x, dtype=np.float64)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def fsq_quantize(z, levels) -> np.ndarray:
    """Quantize latent vector(s) to integer codes.

    Per dimension i: v_i = clamp(round(((tanh(z_i)+1)/2) * (l_i-1)), 0, l_i-1).
    Accepts (..., len(levels)) arrays; returns int64 codes of the same shape.
    """
    z = np.asarray(z, dtype=np.float64)
    levels = np.asarray(levels, dtype=np.int64)
    if z.shape[-1] != levels.shape[0]:
        raise ValueError(f"latent width {z.shape[-1]} does not match {levels.shape[0]} levels")
    if not np.all(np.isfinite(z)):
        raise ValueError("latent values must be finite")
    u = 0.5 * (np.tanh(z) + 1.0) * (levels - 1)
    v = round_half_away(u).astype(np.int64)
    return np.clip(v, 0, levels - 1)


def dequantize(codes, levels) -> np.ndarray:
    """Map integer codes to the normalized values in [-1, 1] the decoder consumes."""
    codes = np.asarray(codes, dtype=np.int64)
    levels = np.asarray(levels, dtype=np.int64)
    if np.any(codes < 0) or np.any(codes >= levels):
        raise ValueError("code entry out of range for its level count")
    return 2.0 * codes / (levels - 1) - 1.0


def codebook_size(levels) -> int:
    return int(np.prod(np.asarray(levels, dtype=np.int64)))


def code_index(code, levels) -> int:
    """Mixed-radix flattening, most-significant dimension first."""
    code = np.asarray(code, dtype=np.int64)
    levels = list(levels)
    if code.shape[-1] != len(levels):
        raise ValueError("code width does not match levels")
    if np.any(code < 0) or np.any(code >= np.asarray(levels, dtype=np.int64)):
        raise ValueError("code entry out of range")
    idx = code[..., 0]
    for i in range(1, len(levels)):
        idx = idx * levels[i] + code[..., i]
    return int(idx) if idx.ndim == 0 else idx


def index_code(index, levels) -> np.ndarray:
    """Inverse of code_index."""
    levels = list(levels)
    size = codebook_size(levels)
    idx = np.asarray(index, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= size):
        raise ValueError(f"codebook index out of range [0, {size})")
    out = np.empty(idx.shape + (len(levels),), dtype=np.int64)
    rem = idx
    for i in range(len(levels) - 1, -1, -1):
        out[..., i] = rem % levels[i]
        rem = rem // levels[i]
    return out


def tokens_to_latents(tokens, levels) -> np.ndarray:
    """Local token ids -> normalized latent vectors (M, len(levels))."""
    codes = index_code(np.asarray(tokens, dtype=np.int64), levels)
    return dequantize(codes, levels)
