"""Real-time multimodal motion tokenization and streaming engine.

Compresses 29-DOF humanoid joint motion into discrete tokens with a
finite-scalar-quantized convolutional codec, unifies text / music /
trajectory conditions in one token vocabulary, generates motion tokens
autoregressively, and streams causally decoded frames to a fixed-rate
playback client.
"""

__version__ = "0.1.0"

from .motion import CANONICAL_FPS, NUM_DOF, MotionSequence, RootState, load_motion, resample, save_motion
from .kinematics import KinematicModel, compose_cross_modal, default_model, forward_kinematics, mpjpe

__all__ = [
    "CANONICAL_FPS",
    "KinematicModel",
    "MotionSequence",
    "NUM_DOF",
    "RootState",
    "compose_cross_modal",
    "default_model",
    "forward_kinematics",
    "load_motion",
    "mpjpe",
    "resample",
    "save_motion",
    "__version__",
]
