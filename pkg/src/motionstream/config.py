"""Flat key = value run configuration with [sections].

Unknown sections or keys are rejected by name; values are type-checked
against the schema below, which doubles as the documentation of every
numeric default.
"""

SCHEMA = {
    "paths": {
        "codec_file": (str, ""),
        "causal_file": (str, ""),
        "model_file": (str, ""),
        "vocab_file": (str, ""),
        "music_codec_file": (str, ""),
        "kinematic_model_file": (str, ""),
    },
    "codec": {
        "hidden_channels": (int, 48),
        "kernel_size": (int, 7),
        "downsample": (int, 2),
        "group_norm_groups": (int, 8),
        "expansion": (int, 2),
        "window": (int, 64),
        "batch": (int, 8),
        "steps": (int, 20000),
        "lr": (float, 2e-3),
        "optimizer": (str, "adam"),
        "target_rms": (float, 0.10),
        "eval_every": (int, 250),
        "dtype": (str, "f4"),
    },
    "causal": {
        "hidden": (int, 64),
        "layers": (int, 2),
        "kernel_size": (int, 7),
        "steps": (int, 1500),
        "batch": (int, 8),
        "lr": (float, 2e-3),
    },
    "generator": {
        "order": (int, 4),
        "discount": (float, 0.5),
        "window": (int, 50),
        "max_tokens": (int, 250),
        "temperature": (float, 1.0),
    },
    "streaming": {
        "host": (str, "127.0.0.1"),
        "port": (int, 8765),
        "chunk_tokens": (int, 5),
        "history_len": (int, 10),
        "cache_capacity": (int, 4096),
    },
    "augment": {
        "minutes": (float, 30.0),
        "history_capacity": (int, 8),
        "max_dof_delta": (float, 0.35),
        "max_root_jump": (float, 0.05),
    },
    "noise": {
        "sigma_base": (float, 0.01),
        "p_burst": (float, 0.05),
        "sigma_burst": (float, 0.1),
        "p_jitter": (float, 0.001),
        "sigma_jitter": (float, 0.3),
    },
    "seeds": {
        "train": (int, 0),
        "generate": (int, 0),
        "augment": (int, 0),
        "corrupt": (int, 0),
    },
}


class ConfigError(ValueError):
    pass


def default_config() -> dict:
    return {sec: {k: v for k, (_, v) in keys.items()} for sec, keys in SCHEMA.items()}


def parse_config(text: str, source: str = "<config>") -> dict:
    cfg = default_config()
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"{source}:{ln}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{ln}: expected key = value")
        if section is None:
            raise ConfigError(f"{source}:{ln}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA[section]:
            raise ConfigError(f"{source}:{ln}: unknown key {key!r} in [{section}]")
        typ, _ = SCHEMA[section][key]
        try:
            cfg[section][key] = typ(value)
        except ValueError:
            raise ConfigError(f"{source}:{ln}: {key} must be {typ.__name__}, got {value!r}") from None
    return cfg


def load_config(path) -> dict:
    with open(path) as f:
        return parse_config(f.read(), source=str(path))


def require(cfg: dict, section: str, key: str):
    """Fetch a value that must have been set to something non-empty."""
    val = cfg[section][key]
    if val == "" or val is None:
        raise ConfigError(f"missing required config key [{section}] {key}")
    return val
