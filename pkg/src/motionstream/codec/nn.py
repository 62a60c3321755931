"""Hand-written 1-D convolutional network primitives.

Every op comes as a forward returning (output, cache) and a backward that
consumes the cache and the output gradient.  The backward passes here are
the analytic gradients validated by the finite-difference gradient check;
keep them exact, not approximate.

Data layout is channels-last: activations are (B, N, C).
Weights: conv kernels are (C_out, C_in, K).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

GELU_C = 0.7978845608028654  # sqrt(2/pi)
GELU_A = 0.044715


class ParamStore:
    """Ordered named tensors plus a parallel gradient dict."""

    def __init__(self):
        self.names = []
        self.tensors = {}

    def add(self, name, arr):
        if name in self.tensors:
            raise ValueError(f"duplicate parameter {name}")
        self.names.append(name)
        self.tensors[name] = arr
        return arr

    def __getitem__(self, name):
        return self.tensors[name]

    def __setitem__(self, name, arr):
        if name not in self.tensors:
            raise KeyError(name)
        self.tensors[name] = arr

    def zero_grads(self):
        return {n: np.zeros_like(t) for n, t in self.tensors.items()}

    def copy(self):
        out = ParamStore()
        for n in self.names:
            out.add(n, self.tensors[n].copy())
        return out

    def num_values(self):
        return sum(t.size for t in self.tensors.values())


def pad_split(kernel: int, stride: int):
    """Zero padding (left, right) keeping N -> N/stride alignment."""
    total = max(0, kernel - stride)
    return (total + 1) // 2, total // 2


def conv1d_forward(x, w, b, stride=1, pad=None):
    """x: (B, N, Cin), w: (Cout, Cin, K) -> y: (B, N_out, Cout)."""
    cout, cin, k = w.shape
    if pad is None:
        pad = pad_split(k, stride)
    pl, pr = pad
    xp = np.pad(x, ((0, 0), (pl, pr), (0, 0)))
    # (B, N_valid, Cin, K) windows, strided along time
    patches = sliding_window_view(xp, k, axis=1)[:, ::stride]
    bsz, nout = patches.shape[0], patches.shape[1]
    flat = patches.reshape(bsz * nout, cin * k)
    y = flat @ w.reshape(cout, cin * k).T
    y += b
    cache = (flat, w, stride, pad, x.shape, bsz, nout)
    return y.reshape(bsz, nout, cout), cache


def conv1d_backward(gy, cache):
    flat, w, stride, pad, x_shape, bsz, nout = cache
    cout, cin, k = w.shape
    pl, pr = pad
    gy_flat = gy.reshape(bsz * nout, cout)
    gw = (gy_flat.T @ flat).reshape(cout, cin, k)
    gb = gy_flat.sum(axis=0)
    gpatches = (gy_flat @ w.reshape(cout, cin * k)).reshape(bsz, nout, cin, k)
    n_pad = x_shape[1] + pl + pr
    gxp = np.zeros((bsz, n_pad, cin), dtype=gy.dtype)
    for kk in range(k):
        gxp[:, kk : kk + nout * stride : stride] += gpatches[:, :, :, kk]
    gx = gxp[:, pl : pl + x_shape[1]]
    return gx, gw, gb


def zero_stuff_forward(x, stride):
    """Insert stride-1 zeros between samples: (B, N, C) -> (B, (N-1)*stride+1, C)."""
    if stride == 1:
        return x, (stride, x.shape)
    bsz, n, c = x.shape
    out = np.zeros((bsz, (n - 1) * stride + 1, c), dtype=x.dtype)
    out[:, ::stride] = x
    return out, (stride, x.shape)


def zero_stuff_backward(gy, cache):
    stride, x_shape = cache
    if stride == 1:
        return gy
    return gy[:, ::stride]


def upsample_pad(kernel: int, stride: int):
    total = kernel + stride - 2
    return (total + 1) // 2, total // 2


def gelu_forward(x):
    u = GELU_C * (x + GELU_A * x**3)
    t = np.tanh(u)
    y = 0.5 * x * (1.0 + t)
    return y, (x, t)


def gelu_backward(gy, cache):
    x, t = cache
    du = GELU_C * (1.0 + 3.0 * GELU_A * x * x)
    return gy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du)


def group_norm_forward(x, gamma, beta, groups, eps=1e-5):
    """Normalize over (time, channels-within-group) per sample and group."""
    bsz, n, c = x.shape
    if c % groups:
        raise ValueError(f"channels {c} not divisible by {groups} groups")
    xg = x.reshape(bsz, n, groups, c // groups)
    mu = xg.mean(axis=(1, 3), keepdims=True)
    var = xg.var(axis=(1, 3), keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mu) * inv).reshape(bsz, n, c)
    y = xhat * gamma + beta
    return y, (xhat, inv, gamma, groups)


def group_norm_backward(gy, cache):
    xhat, inv, gamma, groups = cache
    bsz, n, c = gy.shape
    gxhat = (gy * gamma).reshape(bsz, n, groups, c // groups)
    xh = xhat.reshape(bsz, n, groups, c // groups)
    m = n * (c // groups)
    mean_g = gxhat.mean(axis=(1, 3), keepdims=True)
    mean_gx = (gxhat * xh).mean(axis=(1, 3), keepdims=True)
    gx = inv * (gxhat - mean_g - xh * mean_gx)
    ggamma = (gy * xhat).sum(axis=(0, 1))
    gbeta = gy.sum(axis=(0, 1))
    return gx.reshape(bsz, n, c), ggamma, gbeta


def layer_norm_forward(x, gamma, beta, eps=1e-5):
    """Per-position normalization over the channel axis."""
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    y = xhat * gamma + beta
    return y, (xhat, inv, gamma)


def layer_norm_backward(gy, cache):
    xhat, inv, gamma = cache
    gxhat = gy * gamma
    mean_g = gxhat.mean(axis=-1, keepdims=True)
    mean_gx = (gxhat * xhat).mean(axis=-1, keepdims=True)
    gx = inv * (gxhat - mean_g - xhat * mean_gx)
    ggamma = (gy * xhat).sum(axis=(0, 1))
    gbeta = gy.sum(axis=(0, 1))
    return gx, ggamma, gbeta


def tanh_forward(x):
    t = np.tanh(x)
    return t, (t,)


def tanh_backward(gy, cache):
    (t,) = cache
    return gy * (1.0 - t * t)


def mse_loss_forward(pred, target):
    diff = pred - target
    return float(np.mean(diff * diff)), (diff,)


def mse_loss_backward(cache):
    (diff,) = cache
    return (2.0 / diff.size) * diff


def init_conv(rng, cout, cin, k, dtype, zero=False):
    if zero:
        w = np.zeros((cout, cin, k), dtype=dtype)
    else:
        std = 1.0 / np.sqrt(cin * k)
        w = rng.normal(0.0, std, size=(cout, cin, k)).astype(dtype)
    b = np.zeros(cout, dtype=dtype)
    return w, b
