import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emochat.botengine import (NEUTRAL_MESSAGE, BotTable, BotTableError, load_bot_table,
                               next_message, save_bot_table, synthesize_bot_table)


def _table_text(profile, rows):
    lines = [f"{profile} {len(rows)} {max(len(r) for r in rows.values())}"]
    for j, row in rows.items():
        lines += [f"{j} {k} {a} {v}" for k, (a, v) in enumerate(row, start=1)]
    return io.StringIO("\n".join(lines) + "\n")


def test_load_full_positive_table():
    rng = np.random.default_rng(0)
    rows = {j: [(float(a), float(v)) for a, v in zip(rng.uniform(0.3, 0.8, 35),
                                                  rng.uniform(0.1, 0.9, 35))]
            for j in range(1, 92)}
    t = load_bot_table(_table_text("positive", rows))
    assert len(t.rows) == 91 and all(len(r) == 35 for r in t.rows.values())
    assert all(c == 0 for c in t.cursors.values())


def test_out_of_range_names_the_row():
    rows = {1: [(0.5, 0.2)], 7: [(0.5, 1.5)]}
    with pytest.raises(BotTableError, match="row 7") as err:
        load_bot_table(_table_text("positive", rows))
    assert err.value.row == 7


def test_profile_mismatch():
    with pytest.raises(BotTableError, match="not neutral"):
        load_bot_table(_table_text("neutral", {1: [(0.5, 0.4), (0.5, 0.4)]}))


def test_ragged_rows_accepted_and_gaps_rejected():
    t = load_bot_table(_table_text("negative", {1: [(0.5, -0.2)], 2: [(0.4, -0.3)] * 4}))
    assert [len(t.rows[1]), len(t.rows[2])] == [1, 4]
    bad = io.StringIO("negative 1 3\n1 1 0.5 -0.2\n1 3 0.5 -0.2\n")
    with pytest.raises(BotTableError, match="row 1"):
        load_bot_table(bad)


def test_cursor_wraps_after_last_entry():
    t = BotTable("positive", {3: [(0.1, 0.2), (0.3, 0.4)]})
    t.cursors[3] = 1
    assert next_message(t, 3) == (0.3, 0.4)
    assert t.cursors[3] == 0


def test_non_target_gets_neutral_message():
    t = synthesize_bot_table("negative", seed=1)
    assert next_message(t, 999) == NEUTRAL_MESSAGE == (0.5, 0.0)
    assert next_message(t, None) == (0.5, 0.0)


def test_row_sequence_in_order():
    t = synthesize_bot_table("positive", seed=2)
    got = [next_message(t, 5) for _ in range(35)]
    assert got == t.rows[5]


@given(st.integers(1, 12), st.integers(0, 40))
def test_cycling(length, k):
    row = [(0.5, 0.01 * (i + 1)) for i in range(length)]
    t = BotTable("positive", {1: row})
    seq = [next_message(t, 1) for _ in range(length + k + 1)]
    assert seq[length + k] == seq[k]


@pytest.mark.parametrize("profile", ["positive", "negative", "neutral"])
def test_synthesized_tables(profile, tmp_path):
    a = synthesize_bot_table(profile, seed=9)
    b = synthesize_bot_table(profile, seed=9)
    assert a.rows == b.rows
    vals = np.array([v for r in a.rows.values() for _, v in r])
    assert vals.shape == (91 * 35,)
    if profile == "positive":
        assert np.all(vals > 0)
    elif profile == "negative":
        assert np.all(vals < 0)
    else:
        assert all(abs(np.mean([v for _, v in r])) <= 0.01 for r in a.rows.values())
    save_bot_table(a, tmp_path / "t.txt")
    assert load_bot_table(tmp_path / "t.txt").rows == a.rows


def test_unknown_profile():
    with pytest.raises(BotTableError):
        synthesize_bot_table("angry", seed=0)
