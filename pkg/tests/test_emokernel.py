import math
from fractions import Fraction
from types import SimpleNamespace as Msg

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emochat.emokernel import (EmotionState, FieldSample, MapParams, arousal_field,
                               classify_valence, direct_fields, mean_fields, update_emotion,
                               valence_field)

unit = st.floats(0.0, 1.0)
signed = st.floats(-1.0, 1.0)


def _reference_update(x, h, h_mf, gamma, q, c2, k):
    # exact rational evaluation of one fired step
    x, h, h_mf, gamma, q, c2 = map(Fraction, (x, h, h_mf, gamma, q, c2))
    drive = (h + q * h_mf) / (1 + q) * (1 + c2 * x * (1 - x**k)) * (1 - abs(x))
    return (1 - gamma) * x + drive


def test_pure_relaxation():
    p = MapParams(gamma=0.1)
    out = update_emotion(EmotionState(0.5, 0.5), FieldSample(0.9, 0.9, 1),
                         FieldSample(0.9, 0.9, 1), p, fired=False)
    assert out == EmotionState(pytest.approx(0.45), pytest.approx(0.45))


def test_zero_state_is_fixed_under_zero_field():
    out = update_emotion(EmotionState(0.0, 0.0), FieldSample(), FieldSample(), MapParams(), True)
    assert out == EmotionState(0.0, 0.0)


def test_golden_fired_step():
    # hand-evaluated constants: a = 2147/3125, v = 7853/93750
    p = MapParams(gamma=0.1, q_mf=0.5, c2=0.5)
    out = update_emotion(EmotionState(0.4, -0.2), FieldSample(0.6, 0.5, 1),
                         FieldSample(0.2, 0.1, 1), p, fired=True)
    assert out.arousal == pytest.approx(2147 / 3125, abs=1e-15)
    assert out.valence == pytest.approx(7853 / 93750, abs=1e-15)


def test_golden_matches_rational_reference():
    a = _reference_update(0.4, 0.6, 0.2, 0.1, 0.5, 0.5, 2)
    v = _reference_update(-0.2, 0.5, 0.1, 0.1, 0.5, 0.5, 3)
    assert float(a) == pytest.approx(2147 / 3125, abs=1e-15)
    assert float(v) == pytest.approx(7853 / 93750, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(unit, signed, unit, signed, unit, signed,
       st.floats(0.01, 0.5), st.floats(0.0, 2.0), st.floats(0.0, 0.5))
def test_update_matches_reference(a, v, ha, hv, ma, mv, gamma, q, c2):
    p = MapParams(gamma=gamma, q_mf=q, c2=c2)
    out = update_emotion(EmotionState(a, v), FieldSample(ha, hv, 1), FieldSample(ma, mv, 1),
                         p, True)
    ra = min(max(float(_reference_update(a, ha, ma, gamma, q, c2, 2)), 0.0), 1.0)
    rv = min(max(float(_reference_update(v, hv, mv, gamma, q, c2, 3)), -1.0), 1.0)
    assert out.arousal == pytest.approx(ra, abs=1e-12)
    assert out.valence == pytest.approx(rv, abs=1e-12)


def test_boundedness_long_random_iteration():
    rng = np.random.default_rng(0)
    p = MapParams()
    s = EmotionState(0.5, 0.0)
    draws = rng.uniform(size=(100_000, 4))
    for ha, hv, ma, mv in draws:
        s = update_emotion(s, FieldSample(ha, 2 * hv - 1, 1), FieldSample(ma, 2 * mv - 1, 1),
                           p, fired=bool(ha > 0.3))
        assert 0.0 <= s.arousal <= 1.0 and -1.0 <= s.valence <= 1.0


@given(unit, signed, st.integers(0, 200), st.floats(0.01, 0.9))
def test_relaxation_only_decay(a, v, t, gamma):
    p = MapParams(gamma=gamma)
    s = EmotionState(a, v)
    for _ in range(t):
        s = update_emotion(s, FieldSample(), FieldSample(), p, fired=False)
    assert abs(s.valence) == pytest.approx((1 - gamma) ** t * abs(v), rel=1e-9, abs=1e-300)
    assert s.arousal == pytest.approx((1 - gamma) ** t * a, rel=1e-9, abs=1e-300)


def test_arousal_field_examples():
    inbox = [Msg(tick=9, arousal=0.2), Msg(tick=8, arousal=0.8)]
    assert arousal_field(inbox, now=10, t0=3) == pytest.approx(0.5)
    assert arousal_field([], now=10, t0=2) == 0.0
    # window is (now - t0, now - 1]
    assert arousal_field([Msg(tick=10, arousal=1.0), Msg(tick=9, arousal=1.0)], 10, 2) == 1.0
    assert arousal_field([Msg(tick=10, arousal=1.0)], 10, 2) == 0.0


def test_arousal_field_random_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(200):
        now, t0 = int(rng.integers(0, 30)), int(rng.integers(1, 8))
        msgs = [Msg(tick=int(t), arousal=float(a))
                for t, a in zip(rng.integers(-5, 35, 12), rng.uniform(size=12))]
        sel = [m.arousal for m in msgs if now - t0 < m.tick <= now - 1]
        expect = sum(sel) / len(sel) if sel else 0.0
        assert arousal_field(msgs, now, t0) == pytest.approx(expect, abs=1e-12)


def test_valence_field_examples():
    assert valence_field(5, 0, +1) == pytest.approx(3 / 7)
    assert valence_field(0, 5, -1) == pytest.approx(-3 / 7)
    assert valence_field(4, 4, 0) == 0.0
    assert valence_field(0, 0, 1) == 0.0


@given(st.integers(0, 500), st.integers(0, 500), st.sampled_from([-1, 0, 1]))
def test_valence_field_antisymmetry_and_range(a, b, r):
    assert valence_field(a, b, r) == pytest.approx(-valence_field(b, a, -r), abs=1e-15)
    assert abs(valence_field(a, b, r)) <= 1.0


def test_mean_fields_consistent_with_component_fields():
    rng = np.random.default_rng(5)
    eps = 0.01
    for _ in range(100):
        now, t0 = 20, int(rng.integers(1, 6))
        msgs = [Msg(tick=int(t), arousal=float(a), valence=float(v)) for t, a, v in
                zip(rng.integers(10, 22, 10), rng.uniform(size=10), rng.uniform(-1, 1, 10))]
        r = int(rng.integers(-1, 2))
        win = [m for m in msgs if now - t0 < m.tick <= now - 1]
        n_pos = sum(m.valence > eps for m in win)
        n_neg = sum(m.valence < -eps for m in win)
        f = mean_fields(msgs, now, t0, r, eps)
        assert f.n_inputs == len(win)
        assert f.h_arousal == pytest.approx(arousal_field(msgs, now, t0), abs=1e-12)
        assert f.h_valence == pytest.approx(valence_field(n_pos, n_neg, r), abs=1e-12)
        assert f == direct_fields(msgs, now, t0, r, eps)
    assert mean_fields([], 3, 2, 1) == FieldSample(0.0, 0.0, 0)


def test_classify_valence():
    assert classify_valence(0.5, 0.01) == "positive"
    assert classify_valence(0.0, 0.3) == "neutral"
    assert classify_valence(-0.005, 0.01) == "neutral"
    assert classify_valence(-0.5, 0.01) == "negative"


@given(st.floats(allow_nan=False), st.floats(0, 10))
def test_classify_valence_partitions_reals(v, eps):
    labels = [classify_valence(v, eps) == k for k in ("positive", "negative", "neutral")]
    assert sum(labels) == 1


@pytest.mark.parametrize("kw", [{"gamma": 0.0}, {"q_mf": -1.0}, {"t0_window": 0},
                                {"eps": -0.1}, {"k_arousal": 3}])
def test_bad_params_rejected(kw):
    with pytest.raises(ValueError):
        MapParams(**kw)


def test_clamp_logs_once(caplog):
    from emochat import emokernel
    emokernel.clamp_events(reset=True)
    p = MapParams(gamma=0.01, c2=2.0)
    s = EmotionState(0.9, 0.0)
    with caplog.at_level("DEBUG", logger="emochat.emokernel"):
        for _ in range(5):
            s = update_emotion(s, FieldSample(1.0, 0.0, 1), FieldSample(1.0, 0.0, 1), p, True)
    assert emokernel.clamp_events() >= 1
    assert sum(r.levelname == "WARNING" for r in caplog.records) <= 1
    assert math.isfinite(s.arousal) and s.arousal <= 1.0
