"""Agent-based model of emotional chat networks with affective Bots, plus the
time-series and correlation-network analyses used to read its output."""

__version__ = "0.1.0"

from .emokernel import EmotionState, MapParams, update_emotion  # noqa: E402,F401
from .simulator import SimConfig, BotSpec, run  # noqa: E402,F401
