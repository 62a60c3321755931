"""FSQ convolutional autoencoder: config, parameter construction, and the
encode / decode / training-loss forward passes with hand-written backward.

Encoder: input projection, two strided conv blocks (kernel 7) each followed
by a residual block, projection to the latent width.  Decoder mirrors it
with zero-stuffed upsampling convolutions.  The output projection is
zero-initialized so the step-0 reconstruction is exactly zero.
"""

from dataclasses import dataclass

import numpy as np

from . import nn
from .fsq import code_index, codebook_size, fsq_quantize, round_half_away, tokens_to_latents
from ..motion import MotionSequence


@dataclass(frozen=True)
class CodecConfig:
    levels: tuple = (8, 8, 8, 6, 5)
    latent_dim: int = 5
    hidden_channels: int = 256
    kernel_size: int = 7
    downsample: int = 2
    input_dim: int = 29
    group_norm_groups: int = 8
    expansion: int = 2
    use_norm: bool = True
    use_activation: bool = True

    def __post_init__(self):
        if self.latent_dim != len(self.levels):
            raise ValueError("latent_dim must equal len(levels)")
        if self.downsample not in (2, 4):
            raise ValueError("downsample must be 2 or 4")
        if self.hidden_channels % 2:
            raise ValueError("hidden_channels must be even")
        if self.use_norm and self.hidden_channels % self.group_norm_groups:
            raise ValueError("hidden_channels must divide into group_norm_groups")
        if any(l < 2 for l in self.levels):
            raise ValueError("every quantization level count must be >= 2")

    @property
    def codebook_size(self) -> int:
        return codebook_size(self.levels)

    @property
    def strides(self) -> tuple:
        return (2, 1) if self.downsample == 2 else (2, 2)

    def res_kernel(self) -> int:
        return min(3, self.kernel_size)


def default_motion_config(**over) -> CodecConfig:
    return CodecConfig(**over)


def default_music_config(**over) -> CodecConfig:
    over.setdefault("levels", (8, 8, 8, 4, 3))  # 6,144 codes
    over.setdefault("input_dim", 35)
    return CodecConfig(**over)


class _Conv:
    def __init__(self, name, cout, cin, k, stride=1, up=False, zero=False):
        self.name = name
        self.shape = (cout, cin, k)
        self.stride = stride
        self.up = up
        self.zero = zero

    def create(self, store, rng, dtype):
        w, b = nn.init_conv(rng, *self.shape, dtype, zero=self.zero)
        store.add(self.name + ".w", w)
        store.add(self.name + ".b", b)

    def forward(self, store, x):
        w, b = store[self.name + ".w"], store[self.name + ".b"]
        if self.up:
            xs, c0 = nn.zero_stuff_forward(x, self.stride)
            y, c1 = nn.conv1d_forward(xs, w, b, 1, nn.upsample_pad(self.shape[2], self.stride))
            return y, (c0, c1)
        return nn.conv1d_forward(x, w, b, self.stride)

    def backward(self, store, gy, cache, grads):
        if self.up:
            c0, c1 = cache
            gxs, gw, gb = nn.conv1d_backward(gy, c1)
            gx = nn.zero_stuff_backward(gxs, c0)
        else:
            gx, gw, gb = nn.conv1d_backward(gy, cache)
        grads[self.name + ".w"] += gw
        grads[self.name + ".b"] += gb
        return gx


class _Res:
    """x + conv/MLP path: GroupNorm -> GELU -> conv -> LayerNorm -> MLP."""

    def __init__(self, name, channels, config):
        self.name = name
        self.c = channels
        self.cfg = config
        e = config.expansion
        self.conv = _Conv(name + ".conv", channels, channels, config.res_kernel())
        self.mlp1 = _Conv(name + ".mlp1", e * channels, channels, 1)
        self.mlp2 = _Conv(name + ".mlp2", channels, e * channels, 1)

    def create(self, store, rng, dtype):
        if self.cfg.use_norm:
            store.add(self.name + ".gn.gamma", np.ones(self.c, dtype=dtype))
            store.add(self.name + ".gn.beta", np.zeros(self.c, dtype=dtype))
        self.conv.create(store, rng, dtype)
        if self.cfg.use_norm:
            store.add(self.name + ".ln.gamma", np.ones(self.c, dtype=dtype))
            store.add(self.name + ".ln.beta", np.zeros(self.c, dtype=dtype))
        self.mlp1.create(store, rng, dtype)
        self.mlp2.create(store, rng, dtype)

    def forward(self, store, x):
        caches = {}
        t = x
        if self.cfg.use_norm:
            t, caches["gn"] = nn.group_norm_forward(
                t, store[self.name + ".gn.gamma"], store[self.name + ".gn.beta"], self.cfg.group_norm_groups
            )
        if self.cfg.use_activation:
            t, caches["act1"] = nn.gelu_forward(t)
        t, caches["conv"] = self.conv.forward(store, t)
        if self.cfg.use_norm:
            t, caches["ln"] = nn.layer_norm_forward(t, store[self.name + ".ln.gamma"], store[self.name + ".ln.beta"])
        t, caches["mlp1"] = self.mlp1.forward(store, t)
        if self.cfg.use_activation:
            t, caches["act2"] = nn.gelu_forward(t)
        t, caches["mlp2"] = self.mlp2.forward(store, t)
        return x + t, caches

    def backward(self, store, gy, caches, grads):
        gt = self.mlp2.backward(store, gy, caches["mlp2"], grads)
        if self.cfg.use_activation:
            gt = nn.gelu_backward(gt, caches["act2"])
        gt = self.mlp1.backward(store, gt, caches["mlp1"], grads)
        if self.cfg.use_norm:
            gt, gg, gb = nn.layer_norm_backward(gt, caches["ln"])
            grads[self.name + ".ln.gamma"] += gg
            grads[self.name + ".ln.beta"] += gb
        gt = self.conv.backward(store, gt, caches["conv"], grads)
        if self.cfg.use_activation:
            gt = nn.gelu_backward(gt, caches["act1"])
        if self.cfg.use_norm:
            gt, gg, gb = nn.group_norm_backward(gt, caches["gn"])
            grads[self.name + ".gn.gamma"] += gg
            grads[self.name + ".gn.beta"] += gb
        return gy + gt


def _build_layers(config: CodecConfig):
    h = config.hidden_channels
    k = config.kernel_size
    s1, s2 = config.strides
    d = config.input_dim
    enc = [
        _Conv("enc.in_proj", h // 2, d, 1),
        _Conv("enc.down1", h, h // 2, k, stride=s1),
        _Res("enc.res1", h, config),
        _Conv("enc.down2", h, h, k, stride=s2),
        _Res("enc.res2", h, config),
        _Conv("enc.to_latent", config.latent_dim, h, 1),
    ]
    dec = [
        _Conv("dec.from_latent", h, config.latent_dim, 1),
        _Res("dec.res1", h, config),
        _Conv("dec.up1", h, h, k, stride=s2, up=True),
        _Res("dec.res2", h, config),
        _Conv("dec.up2", h // 2, h, k, stride=s1, up=True),
        _Conv("dec.out_proj", d, h // 2, 1, zero=True),
    ]
    return enc, dec


@dataclass
class CodecParams:
    """Weights for one codec instance; tensors in declaration order."""

    config: CodecConfig
    store: nn.ParamStore
    causal: bool = False

    def copy(self) -> "CodecParams":
        return CodecParams(self.config, self.store.copy(), self.causal)


def init_params(config: CodecConfig, seed: int = 0, dtype=np.float64, zero_out_proj: bool = True) -> CodecParams:
    rng = np.random.Generator(np.random.PCG64(seed))
    store = nn.ParamStore()
    enc, dec = _build_layers(config)
    for layer in enc + dec:
        layer.create(store, rng, dtype)
    if not zero_out_proj:
        w = store["dec.out_proj.w"]
        store["dec.out_proj.w"] = rng.normal(0.0, 1.0 / np.sqrt(w.shape[1]), size=w.shape).astype(dtype)
    return CodecParams(config, store)


def _run_stack(layers, store, x):
    caches = []
    for layer in layers:
        x, c = layer.forward(store, x)
        caches.append(c)
    return x, caches


def _back_stack(layers, store, gy, caches, grads):
    for layer, cache in zip(reversed(layers), reversed(caches)):
        gy = layer.backward(store, gy, cache, grads)
    return gy


def features_of(window) -> np.ndarray:
    if isinstance(window, MotionSequence):
        return np.asarray(window.dof)
    return np.asarray(window, dtype=np.float64)


def encode(window, params: CodecParams) -> np.ndarray:
    """Window of N frames -> N / downsample local token ids (int64)."""
    cfg = params.config
    x = features_of(window)
    if x.ndim != 2 or x.shape[1] != cfg.input_dim:
        raise ValueError(f"expected (N, {cfg.input_dim}) features, got {x.shape}")
    if x.shape[0] % cfg.downsample:
        raise ValueError(f"window length {x.shape[0]} not divisible by downsample {cfg.downsample}")
    x = x[None].astype(params.store[params.store.names[0]].dtype)
    enc, _ = _build_layers(cfg)
    z, _ = _run_stack(enc, params.store, x)
    codes = fsq_quantize(z[0], cfg.levels)
    return code_index(codes, cfg.levels)


def decode_offline(tokens, params: CodecParams) -> np.ndarray:
    """Local token ids -> (len(tokens) * downsample, input_dim) frames."""
    cfg = params.config
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.size == 0:
        return np.zeros((0, cfg.input_dim))
    lat = tokens_to_latents(tokens, cfg.levels)
    dtype = params.store[params.store.names[0]].dtype
    _, dec = _build_layers(cfg)
    y, _ = _run_stack(dec, params.store, lat[None].astype(dtype))
    return y[0].astype(np.float64)


def reconstruct(window, params: CodecParams) -> np.ndarray:
    return decode_offline(encode(window, params), params)


def forward_loss(params: CodecParams, batch: np.ndarray, offsets: np.ndarray | None = None):
    """Training forward: reconstruction MSE with the straight-through quantizer.

    With `offsets` given (captured as quantized-minus-tanh at some base
    point), the rounding step is replaced by adding the fixed offsets;
    that surface is what the analytic backward differentiates, so the
    gradient check runs against it.
    """
    cfg = params.config
    store = params.store
    enc, dec = _build_layers(cfg)
    z, enc_caches = _run_stack(enc, store, batch)
    g = np.tanh(z)
    if offsets is None:
        lv = np.asarray(cfg.levels, dtype=np.float64)
        u = 0.5 * (g + 1.0) * (lv - 1.0)
        v = np.clip(round_half_away(u), 0, lv - 1)
        q = (2.0 * v / (lv - 1.0) - 1.0).astype(g.dtype)
    else:
        q = g + offsets
    xhat, dec_caches = _run_stack(dec, store, q)
    loss, loss_cache = nn.mse_loss_forward(xhat, batch)
    caches = {"enc": enc_caches, "dec": dec_caches, "g": g, "q": q, "loss": loss_cache, "layers": (enc, dec)}
    return loss, caches


def backward_loss(params: CodecParams, caches) -> dict:
    store = params.store
    enc, dec = caches["layers"]
    grads = store.zero_grads()
    gy = nn.mse_loss_backward(caches["loss"])
    gq = _back_stack(dec, store, gy, caches["dec"], grads)
    g = caches["g"]
    gz = gq * (1.0 - g * g)  # straight-through: identity across rounding, through tanh
    _back_stack(enc, store, gz, caches["enc"], grads)
    return grads
