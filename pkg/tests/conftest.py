import numpy as np
import pytest

from motionstream.causal import CausalConfig, CausalTrainSettings, train_causal
from motionstream.codec import CodecConfig, TrainSettings, train_codec
from motionstream.kinematics import default_model
from motionstream.synth import sinusoid_corpus


@pytest.fixture(scope="session")
def model():
    return default_model()


@pytest.fixture(scope="session")
def small_corpus():
    return sinusoid_corpus(60, length=128, seed=7)


@pytest.fixture(scope="session")
def trained_codec(small_corpus):
    """A codec good enough for roundtrip-dependent tests (not the acceptance run)."""
    cfg = CodecConfig(hidden_channels=32, group_norm_groups=8)
    settings = TrainSettings(steps=700, batch=8, window=64, lr=2e-3, optimizer="adam", dtype="f4")
    return train_codec([s.dof for s in small_corpus], cfg, settings, seed=5).params


@pytest.fixture(scope="session")
def trained_causal(trained_codec, small_corpus):
    cfg = CausalConfig(levels=trained_codec.config.levels, hidden=32, layers=2,
                       upsample=trained_codec.config.downsample, output_dim=29)
    params, losses = train_causal(
        trained_codec,
        [s.dof for s in small_corpus[:30]],
        cfg,
        CausalTrainSettings(steps=400, batch=6, lr=2e-3, dtype="f4"),
        seed=9,
    )
    assert losses[-1] < losses[0]
    return params


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
