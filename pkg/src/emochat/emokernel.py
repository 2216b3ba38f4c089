"""Emotional-state dynamics of a single agent.

Each agent carries two bounded variables, arousal a in [0, 1] and valence
v in [-1, 1].  Both follow the same kind of nonlinear map

    x(t+1) = (1 - gamma) x(t)
             + fired * (h + q h_mf) / (1 + q) * (1 + c2 x (1 - x**k)) * (1 - |x|)

with k = 2 for arousal and k = 3 for valence.  The relaxation part runs on
every tick; the driven part only on ticks where the agent's delay expires.

The fields h are built from recent messages: arousal fields are windowed
means of message arousal, valence fields weigh positive and negative message
counts by the receiver's own valence sign.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

logger = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"
NEUTRAL = "neutral"

K_AROUSAL = 2
K_VALENCE = 3


@dataclass(frozen=True)
class EmotionState:
    arousal: float
    valence: float


@dataclass(frozen=True)
class MapParams:
    """Constants of the emotion maps.

    ``gamma`` is the shared relaxation rate, ``q_mf`` the weight of the mean
    field relative to the direct field, ``c2`` the nonlinearity strength and
    ``t0_window`` the width (in ticks) of the message window feeding the fields.
    """

    gamma: float = 0.06
    q_mf: float = 0.4
    c2: float = 0.5
    t0_window: int = 5
    eps: float = 0.01
    k_arousal: int = K_AROUSAL
    k_valence: int = K_VALENCE

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.q_mf < 0:
            raise ValueError(f"q_mf must be >= 0, got {self.q_mf}")
        if self.t0_window < 1:
            raise ValueError(f"t0_window must be >= 1, got {self.t0_window}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.k_arousal != K_AROUSAL or self.k_valence != K_VALENCE:
            raise ValueError("k_arousal=2 and k_valence=3 are fixed")


@dataclass(frozen=True)
class FieldSample:
    h_arousal: float = 0.0
    h_valence: float = 0.0
    n_inputs: int = 0


EMPTY_FIELD = FieldSample()


def _drive(x: float, h: float, h_mf: float, q: float, c2: float, k: int) -> float:
    return (h + q * h_mf) / (1.0 + q) * (1.0 + c2 * x * (1.0 - x**k)) * (1.0 - abs(x))


# The maps are only self-bounded for weak fields (for arousal at full drive
# this needs c2 <= gamma), so the clamp can engage; count it, warn once.
_clamp_events = 0


def clamp_events(reset: bool = False) -> int:
    """Number of times the range clamp engaged in this process."""
    global _clamp_events
    n = _clamp_events
    if reset:
        _clamp_events = 0
    return n


def _clamp(x: float, lo: float, hi: float, what: str) -> float:
    global _clamp_events
    if x < lo or x > hi:
        _clamp_events += 1
        level = logging.WARNING if _clamp_events == 1 else logging.DEBUG
        logger.log(level, "%s left its range (%r); clamping. Check model parameters "
                   "(further clamps logged at DEBUG).", what, x)
        return min(max(x, lo), hi)
    return x


def update_emotion(
    state: EmotionState,
    h_direct: FieldSample,
    h_mf: FieldSample,
    params: MapParams,
    fired: bool,
) -> EmotionState:
    """Advance one agent's (arousal, valence) by one tick."""
    relax = 1.0 - params.gamma
    a = relax * state.arousal
    v = relax * state.valence
    if fired:
        a += _drive(state.arousal, h_direct.h_arousal, h_mf.h_arousal,
                    params.q_mf, params.c2, params.k_arousal)
        v += _drive(state.valence, h_direct.h_valence, h_mf.h_valence,
                    params.q_mf, params.c2, params.k_valence)
    return EmotionState(_clamp(a, 0.0, 1.0, "arousal"), _clamp(v, -1.0, 1.0, "valence"))


def classify_valence(v: float, eps: float) -> str:
    if v > eps:
        return POSITIVE
    if v < -eps:
        return NEGATIVE
    return NEUTRAL


def sign(v: float) -> int:
    return (v > 0) - (v < 0)


def in_window(tick: int, now: int, t0: int) -> bool:
    """True for message ticks in the half-open window (now - t0, now - 1]."""
    return now - t0 < tick <= now - 1


def arousal_field(inbox: Iterable, now: int, t0: int) -> float:
    """Mean arousal of the messages inside the window; 0 when there are none.

    ``inbox`` holds objects with ``tick`` and ``arousal`` attributes.
    """
    total = 0.0
    n = 0
    for m in inbox:
        if in_window(m.tick, now, t0):
            total += m.arousal
            n += 1
    return total / n if n else 0.0


def valence_field(n_pos: int, n_neg: int, receiver_valence_sign: int) -> float:
    """Valence field from positive/negative message counts.

    The receiver's own sign r damps same-sign messages and amplifies
    opposite-sign ones: (1 - 0.4 r)/1.4 * n_pos/N - (1 + 0.4 r)/1.4 * n_neg/N.
    """
    n_emo = n_pos + n_neg
    if n_emo == 0:
        return 0.0
    r = receiver_valence_sign
    return ((1.0 - 0.4 * r) * n_pos - (1.0 + 0.4 * r) * n_neg) / (1.4 * n_emo)


def _window_stats(messages: Iterable, now: int, t0: int, eps: float):
    total = 0.0
    n = n_pos = n_neg = 0
    for m in messages:
        if not in_window(m.tick, now, t0):
            continue
        n += 1
        total += m.arousal
        label = classify_valence(m.valence, eps)
        if label == POSITIVE:
            n_pos += 1
        elif label == NEGATIVE:
            n_neg += 1
    return n, total, n_pos, n_neg


def direct_fields(inbox: Iterable, now: int, t0: int, receiver_valence_sign: int,
                  eps: float = 0.01) -> FieldSample:
    """Arousal and valence fields from the agent's own directed messages."""
    n, total, n_pos, n_neg = _window_stats(inbox, now, t0, eps)
    if n == 0:
        return EMPTY_FIELD
    return FieldSample(total / n, valence_field(n_pos, n_neg, receiver_valence_sign), n)


def mean_fields(channel: Iterable, now: int, t0: int, receiver_valence_sign: int,
                eps: float = 0.01) -> FieldSample:
    """Same field formulas evaluated over the recent channel messages."""
    return direct_fields(channel, now, t0, receiver_valence_sign, eps)


def fields_from_counts(n: int, arousal_sum: float, n_pos: int, n_neg: int,
                       receiver_valence_sign: int) -> FieldSample:
    """Build a FieldSample from pre-aggregated window statistics."""
    if n == 0:
        return EMPTY_FIELD
    return FieldSample(arousal_sum / n, valence_field(n_pos, n_neg, receiver_valence_sign), n)
