from .fsq import code_index, codebook_size, dequantize, fsq_quantize, index_code, tokens_to_latents
from .model import CodecConfig, CodecParams, decode_offline, default_motion_config, default_music_config, encode, init_params, reconstruct
from .serialize import load_codec, save_codec
from .train import TrainingError, TrainResult, TrainSettings, eval_rms, gradient_check, train_codec

__all__ = [
    "CodecConfig",
    "CodecParams",
    "TrainingError",
    "TrainResult",
    "TrainSettings",
    "code_index",
    "codebook_size",
    "decode_offline",
    "default_motion_config",
    "default_music_config",
    "dequantize",
    "encode",
    "eval_rms",
    "fsq_quantize",
    "gradient_check",
    "index_code",
    "init_params",
    "load_codec",
    "reconstruct",
    "save_codec",
    "tokens_to_latents",
    "train_codec",
]
