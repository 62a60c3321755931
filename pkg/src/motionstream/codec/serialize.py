"""Parameter file container (shared by the offline codec and the causal
streaming decoder).

Layout: text header starting `UACODEC 1`, a `causal 0|1` flag, config
key/value lines, one `tensor <name> <d0,d1,...>` line per tensor in
declaration order, `end`, then raw little-endian float32 tensor data,
then an 8-byte little-endian checksum (crc32 << 32 | adler32) of every
preceding byte.
"""

import zlib

import numpy as np

from . import nn
from .model import CodecConfig, CodecParams

CODEC_MAGIC = b"UACODEC 1"


def _checksum(data: bytes) -> int:
    return (zlib.crc32(data) << 32) | zlib.adler32(data)


def write_container(path, causal: bool, config_items: dict, store) -> None:
    lines = [CODEC_MAGIC.decode(), f"causal {1 if causal else 0}"]
    for k, v in config_items.items():
        lines.append(f"{k} {v}")
    for name in store.names:
        dims = ",".join(str(d) for d in store.tensors[name].shape)
        lines.append(f"tensor {name} {dims}")
    lines.append("end")
    blob = ("\n".join(lines) + "\n").encode()
    for name in store.names:
        blob += np.ascontiguousarray(store.tensors[name], dtype="<f4").tobytes()
    blob += _checksum(blob).to_bytes(8, "little")
    with open(path, "wb") as f:
        f.write(blob)


def read_container(path):
    """Returns (causal, config_items, store-of-float32-tensors)."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 16 or not blob.startswith(CODEC_MAGIC):
        raise ValueError(f"{path}: not a codec parameter file")
    body, tail = blob[:-8], blob[-8:]
    if _checksum(body) != int.from_bytes(tail, "little"):
        raise ValueError(f"{path}: checksum mismatch (corrupt file)")
    header_end = body.index(b"\nend\n") + len(b"\nend\n")
    header = body[:header_end].decode().splitlines()
    data = body[header_end:]
    causal = False
    config_items = {}
    tensor_specs = []
    for line in header[1:]:
        if line == "end":
            break
        key, _, value = line.partition(" ")
        if key == "causal":
            causal = value == "1"
        elif key == "tensor":
            name, dims = value.split()
            shape = tuple(int(d) for d in dims.split(","))
            tensor_specs.append((name, shape))
        else:
            config_items[key] = value
    store = nn.ParamStore()
    off = 0
    for name, shape in tensor_specs:
        n = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f4", count=n, offset=off).reshape(shape).copy()
        store.add(name, arr)
        off += 4 * n
    if off != len(data):
        raise ValueError(f"{path}: tensor data length mismatch")
    return causal, config_items, store


def _codec_config_items(cfg: CodecConfig) -> dict:
    return {
        "levels": ",".join(str(l) for l in cfg.levels),
        "latent_dim": cfg.latent_dim,
        "hidden_channels": cfg.hidden_channels,
        "kernel_size": cfg.kernel_size,
        "downsample": cfg.downsample,
        "input_dim": cfg.input_dim,
        "group_norm_groups": cfg.group_norm_groups,
        "expansion": cfg.expansion,
        "use_norm": 1 if cfg.use_norm else 0,
        "use_activation": 1 if cfg.use_activation else 0,
    }


def _codec_config_from_items(items: dict) -> CodecConfig:
    return CodecConfig(
        levels=tuple(int(l) for l in items["levels"].split(",")),
        latent_dim=int(items["latent_dim"]),
        hidden_channels=int(items["hidden_channels"]),
        kernel_size=int(items["kernel_size"]),
        downsample=int(items["downsample"]),
        input_dim=int(items["input_dim"]),
        group_norm_groups=int(items["group_norm_groups"]),
        expansion=int(items["expansion"]),
        use_norm=items["use_norm"] == "1",
        use_activation=items["use_activation"] == "1",
    )


def save_codec(params: CodecParams, path) -> None:
    write_container(path, False, _codec_config_items(params.config), params.store)


def load_codec(path, dtype=np.float32) -> CodecParams:
    causal, items, store = read_container(path)
    if causal:
        raise ValueError(f"{path}: holds causal decoder parameters, not codec parameters")
    if dtype is not np.float32:
        for n in store.names:
            store.tensors[n] = store.tensors[n].astype(dtype)
    return CodecParams(_codec_config_from_items(items), store)
