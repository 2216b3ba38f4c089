"""Affective Bots as cyclic per-target message tables.

A Bot owns one row of (arousal, valence) pairs per target agent.  Each time
it answers target ``j`` it emits the next pair of row ``j`` and wraps around
when the row is exhausted.  Everyone who is not a target gets a neutral
message (0.5, 0.0).

Table file layout (whitespace separated)::

    <profile> <n_rows> <row_len>
    <j> <k> <arousal> <valence>
    ...

``j`` is the 1-based row (target) index and ``k`` the 1-based position in
the row.  Rows may have different lengths; ``row_len`` is informational.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .emokernel import NEGATIVE, NEUTRAL, POSITIVE

PROFILES = (POSITIVE, NEGATIVE, NEUTRAL)
NEUTRAL_MESSAGE = (0.5, 0.0)
N_ROWS = 91
ROW_LEN = 35

# Synthetic content ranges, chosen clear of the +-0.01 valence dead band.
_VALENCE_RANGES = {
    POSITIVE: (0.2, 0.9),
    NEGATIVE: (-0.9, -0.2),
    NEUTRAL: (-0.05, 0.05),
}
_AROUSAL_RANGE = (0.3, 0.8)


class BotTableError(ValueError):
    """Malformed or inconsistent Bot table."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


@dataclass
class BotTable:
    profile: str
    rows: Dict[int, List[Tuple[float, float]]]
    cursors: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for j in self.rows:
            self.cursors.setdefault(j, 0)

    def copy(self) -> "BotTable":
        return BotTable(self.profile, {j: list(r) for j, r in self.rows.items()},
                        dict(self.cursors))

    def reset(self) -> None:
        for j in self.cursors:
            self.cursors[j] = 0


def validate_table(table: BotTable, eps: float = 0.01) -> None:
    """Check ranges and profile consistency row by row."""
    if table.profile not in PROFILES:
        raise BotTableError(f"unknown profile {table.profile!r}")
    for j in sorted(table.rows):
        row = table.rows[j]
        if not row:
            raise BotTableError("empty row", j)
        for a, v in row:
            if not 0.0 <= a <= 1.0:
                raise BotTableError(f"arousal {a} outside [0, 1]", j)
            if not -1.0 <= v <= 1.0:
                raise BotTableError(f"valence {v} outside [-1, 1]", j)
        mean_v = sum(v for _, v in row) / len(row)
        if table.profile == POSITIVE and not mean_v > 0:
            raise BotTableError(f"mean valence {mean_v:.4g} is not positive", j)
        if table.profile == NEGATIVE and not mean_v < 0:
            raise BotTableError(f"mean valence {mean_v:.4g} is not negative", j)
        if table.profile == NEUTRAL and abs(mean_v) > eps:
            raise BotTableError(f"mean valence {mean_v:.4g} is not neutral (eps={eps})", j)


def load_bot_table(source, eps: float = 0.01) -> BotTable:
    """Read a table file (path or open text stream); cursors start at 0."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return load_bot_table(fh, eps)

    lines = [ln for ln in (raw.strip() for raw in source) if ln and not ln.startswith("#")]
    if not lines:
        raise BotTableError("empty table file")
    header = lines[0].split()
    if len(header) != 3:
        raise BotTableError(f"bad header {lines[0]!r}; expected 'profile n_rows row_len'")
    profile = header[0]
    try:
        int(header[1]), int(header[2])
    except ValueError:
        raise BotTableError(f"bad header {lines[0]!r}; n_rows and row_len must be integers")

    cells: Dict[int, Dict[int, Tuple[float, float]]] = {}
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        try:
            j, k = int(parts[0]), int(parts[1])
            a, v = float(parts[2]), float(parts[3])
            if len(parts) != 4:
                raise ValueError
        except (ValueError, IndexError):
            raise BotTableError(f"line {lineno}: cannot parse {ln!r}")
        row = cells.setdefault(j, {})
        if k in row:
            raise BotTableError(f"duplicate position k={k}", j)
        row[k] = (a, v)

    rows = {}
    for j, row in cells.items():
        ks = sorted(row)
        if ks != list(range(1, len(ks) + 1)):
            raise BotTableError("positions must run 1..len without gaps", j)
        rows[j] = [row[k] for k in ks]
    table = BotTable(profile, rows)
    validate_table(table, eps)
    return table


def save_bot_table(table: BotTable, path) -> None:
    row_len = max((len(r) for r in table.rows.values()), default=0)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.profile} {len(table.rows)} {row_len}\n")
        for j in sorted(table.rows):
            for k, (a, v) in enumerate(table.rows[j], start=1):
                fh.write(f"{j} {k} {a!r} {v!r}\n")


def next_message(table: BotTable, target: Optional[int]) -> Tuple[float, float]:
    """Next (arousal, valence) pair for ``target``; neutral for non-targets."""
    row = table.rows.get(target) if target is not None else None
    if row is None:
        return NEUTRAL_MESSAGE
    k = table.cursors[target]
    table.cursors[target] = (k + 1) % len(row)
    return row[k]


def synthesize_bot_table(profile: str, n_rows: int = N_ROWS, row_len: int = ROW_LEN,
                         rng: Optional[np.random.Generator] = None, seed: Optional[int] = None,
                         eps: float = 0.01) -> BotTable:
    """Random table with profile-consistent content (stand-in for recorded dialogs)."""
    if profile not in PROFILES:
        raise BotTableError(f"unknown profile {profile!r}")
    if rng is None:
        rng = np.random.default_rng(seed)
    lo, hi = _VALENCE_RANGES[profile]
    rows = {}
    for j in range(1, n_rows + 1):
        a = rng.uniform(*_AROUSAL_RANGE, size=row_len)
        v = rng.uniform(lo, hi, size=row_len)
        # neutral rows must also pass the |mean| <= eps check
        while profile == NEUTRAL and abs(v.mean()) > eps:
            v = rng.uniform(lo, hi, size=row_len)
        rows[j] = [(float(x), float(y)) for x, y in zip(a, v)]
    table = BotTable(profile, rows)
    validate_table(table, eps)
    return table
