"""Event-log files: one message per line, tab separated, fixed header.

Senders and recipients are agent ids, or the tokens ``bot`` and ``channel``.
Floats are written with ``repr`` so a log read back is bit-identical to the
one that was written.
"""
from __future__ import annotations

import io
import os
from typing import Iterable, List, TextIO, Union

from .simulator import BOT_ID, CHANNEL, EventLog, Message

HEADER = ("tick", "sender", "recipient", "arousal", "valence")

_TOKEN = {BOT_ID: "bot", CHANNEL: "channel"}
_ID = {v: k for k, v in _TOKEN.items()}


class LogFormatError(ValueError):
    pass


def _endpoint(x: int) -> str:
    return _TOKEN.get(x, str(x))


def _parse_endpoint(tok: str, lineno: int) -> int:
    if tok in _ID:
        return _ID[tok]
    try:
        v = int(tok)
    except ValueError:
        raise LogFormatError(f"line {lineno}: bad endpoint {tok!r}")
    if v < 0:
        raise LogFormatError(f"line {lineno}: negative agent id {v}")
    return v


def format_message(m: Message) -> str:
    return (f"{m.tick}\t{_endpoint(m.sender)}\t{_endpoint(m.recipient)}"
            f"\t{float(m.arousal)!r}\t{float(m.valence)!r}\n")


def write_log(log: Iterable[Message], dest: Union[str, os.PathLike, TextIO]) -> None:
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            return write_log(log, fh)
    dest.write("\t".join(HEADER) + "\n")
    for m in log:
        dest.write(format_message(m))


def dumps(log: Iterable[Message]) -> str:
    buf = io.StringIO()
    write_log(log, buf)
    return buf.getvalue()


def read_log(source: Union[str, os.PathLike, TextIO]) -> EventLog:
    """Parse and validate a log; ticks must be non-decreasing."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_log(fh)
    first = source.readline()
    if tuple(first.rstrip("\n").split("\t")) != HEADER:
        raise LogFormatError(f"line 1: expected header {' '.join(HEADER)!r}")
    out: List[Message] = []
    last = None
    for lineno, line in enumerate(source, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise LogFormatError(f"line {lineno}: expected 5 fields, got {len(parts)}")
        try:
            tick = int(parts[0])
            a, v = float(parts[3]), float(parts[4])
        except ValueError:
            raise LogFormatError(f"line {lineno}: cannot parse {line!r}")
        s = _parse_endpoint(parts[1], lineno)
        r = _parse_endpoint(parts[2], lineno)
        if s == CHANNEL:
            raise LogFormatError(f"line {lineno}: the channel cannot send")
        if not 0.0 <= a <= 1.0 or not -1.0 <= v <= 1.0:
            raise LogFormatError(f"line {lineno}: arousal/valence out of range")
        if last is not None and tick < last:
            raise LogFormatError(f"line {lineno}: tick {tick} goes backwards")
        last = tick
        out.append(Message(tick, s, r, a, v))
    return out


def n_ticks(log: EventLog) -> int:
    return log[-1].tick + 1 if log else 0
