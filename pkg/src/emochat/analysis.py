"""Log-level analysis: charge, persistence, spectra and avalanche statistics.

:func:`analyze_log` turns an event log into plain tables (numpy arrays keyed
by name) and a dictionary of fitted numbers; :func:`write_tables` dumps them
as tab-separated files ready for any plotting tool.
"""
from __future__ import annotations

import json
import math
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import tsanalysis as ts
from .emokernel import NEGATIVE, POSITIVE

DEFAULTS: Dict[str, Any] = {
    "detrend_window": 1441,
    "n_min": 8,
    "n_max": 80,
    "per_decade": 16,
    "spectrum_fit": None,
    "bins_per_decade": 16,
    "avalanche_baseline": 0.0,
    # "residual": runs above the local trend; "counts": runs of raw counts
    "avalanche_series": "residual",
    "q_min": 0.80,
    "q_max": 1.95,
    "q_step": 0.01,
}

SERIES_KINDS = ("all", POSITIVE, NEGATIVE)


def quarter_means(q: Sequence[float]):
    """Mean of the first and of the last quarter of a series."""
    q = np.asarray(q, dtype=float)
    k = len(q) // 4
    if k < 1:
        raise ts.InsufficientDataError("series too short for quarter means")
    return float(q[:k].mean()), float(q[-k:].mean())


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw), None
    except (ts.InsufficientDataError, ValueError) as exc:
        return None, str(exc)


def _tail_xmin(x: np.ndarray) -> Optional[float]:
    # fit the upper half of the distribution's support on a log scale
    x = x[x > 0]
    if len(x) == 0:
        return None
    return float(max(1.0, math.sqrt(x.min() * x.max())))


def analyze_log(log, n_ticks: int, settings: Optional[Dict[str, Any]] = None,
                eps: float = 0.01) -> Dict[str, Any]:
    """Run the full time-series pipeline on one log.

    Returns ``{"tables": {name: (header, 2-d array)}, "fits": {...}}``.
    Fits that lack data are reported with an ``error`` entry instead of
    raising, so one sparse series does not sink the others.
    """
    cfg = dict(DEFAULTS)
    cfg.update(settings or {})
    if n_ticks < ts.MIN_SPECTRUM_LENGTH:
        raise ts.InsufficientDataError(
            f"insufficient length: analysis needs >= {ts.MIN_SPECTRUM_LENGTH} ticks, "
            f"got {n_ticks}")
    log = list(log)
    tables: Dict[str, Any] = {}
    fits: Dict[str, Any] = {"settings": cfg, "n_ticks": n_ticks, "n_messages": len(log)}

    counts = {k: ts.count_series(log, k, eps, n_ticks=n_ticks) for k in SERIES_KINDS}
    q = ts.charge_series(log, eps, n_ticks=n_ticks)
    ticks = np.arange(n_ticks)
    tables["charge"] = (("tick", "charge", "positive", "negative", "all"),
                        np.column_stack([ticks, q.values, counts[POSITIVE].values,
                                         counts[NEGATIVE].values, counts["all"].values]))
    first, last = quarter_means(q.values)
    fits["charge"] = {"mean": float(q.values.mean()), "first_quarter": first,
                      "last_quarter": last}

    series = dict(counts)
    series["charge"] = q
    window = cfg["detrend_window"]
    if window > n_ticks:
        window = n_ticks if n_ticks % 2 else n_ticks - 1
    resid = {}
    cols, head = [ticks], ["tick"]
    for name, s in series.items():
        trend, r = ts.detrend(s, window)
        resid[name] = r
        cols += [s.values, trend.values, r.values]
        head += [name, f"{name}_trend", f"{name}_residual"]
    tables["trend"] = (tuple(head), np.column_stack(cols))

    # fluctuation function of each detrended series
    ns = ts.scale_values(cfg["n_min"], cfg["n_max"], cfg["per_decade"])
    f_cols, f_head = [ns], ["n"]
    fits["hurst"] = {}
    for name, r in resid.items():
        ff, err = _safe(ts.fluctuation_function, r, ns)
        f_head.append(f"F2_{name}")
        f_cols.append(np.array([f for _, f in ff]) if ff else np.full(len(ns), np.nan))
        h, err = _safe(ts.hurst, r, cfg["n_min"], cfg["n_max"])
        fits["hurst"][name] = {"H": h[0], "stderr": h[1]} if h else {"error": err}
    tables["fluctuation"] = (tuple(f_head), np.column_stack(f_cols))

    fits["spectrum"] = {}
    for name, s in series.items():
        spectrum, err = _safe(ts.power_spectrum, s, cfg["bins_per_decade"])
        if spectrum is None:
            fits["spectrum"][name] = {"error": err}
            continue
        tables[f"spectrum_{name}"] = (("frequency", "power"),
                                      np.column_stack([spectrum.bin_freq, spectrum.bin_power]))
        fr = tuple(cfg["spectrum_fit"]) if cfg["spectrum_fit"] else None
        phi, err = _safe(ts.spectral_exponent, spectrum, fr)
        fits["spectrum"][name] = {"phi": phi[0], "stderr": phi[1]} if phi else {"error": err}

    q_grid = np.round(np.arange(cfg["q_min"], cfg["q_max"] + cfg["q_step"] / 2,
                                cfg["q_step"]), 10)
    fits["avalanches"] = {}
    for name in SERIES_KINDS:
        src = resid[name] if cfg["avalanche_series"] == "residual" else counts[name]
        av = ts.extract_avalanches(src, cfg["avalanche_baseline"])
        tables[f"avalanches_{name}"] = (("start", "duration", "size"),
                                        np.column_stack([av.starts, av.durations, av.sizes])
                                        if len(av) else np.zeros((0, 3)))
        entry: Dict[str, Any] = {"count": len(av)}
        for obs, data in (("duration", av.durations), ("size", av.sizes)):
            data = np.asarray(data, dtype=float)
            sub: Dict[str, Any] = {}
            dens, err = _safe(ts.log_binned_density, data, cfg["bins_per_decade"])
            if dens is not None and len(data):
                tables[f"hist_{obs}_{name}"] = (("x", "density", "count"),
                                                np.column_stack(dens))
            qfit, err = _safe(ts.fit_q_exponential, data, q_grid, cfg["bins_per_decade"])
            sub["q_exponential"] = (_fit_dict(qfit) if qfit else {"error": err})
            xmin = _tail_xmin(data)
            pfit, err = (_safe(ts.fit_power_law_tail, data, xmin) if xmin
                         else (None, "no positive samples"))
            sub["power_law_tail"] = (_fit_dict(pfit) if pfit else {"error": err})
            entry[obs] = sub
        fits["avalanches"][name] = entry
    return {"tables": tables, "fits": fits}


def _fit_dict(fr: ts.FitResult) -> Dict[str, Any]:
    return {"params": fr.params, "stderr": fr.stderr, "fit_range": list(fr.fit_range),
            "goodness": fr.goodness, "n_samples": fr.n_samples}


def _fmt(x) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def write_table(path, header: Sequence[str], data: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in np.atleast_2d(data) if len(data) else []:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        return None if not math.isfinite(float(o)) else float(o)
    if isinstance(o, np.integer):
        return int(o)
    return o


def dump_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_tables(result: Dict[str, Any], out_dir) -> List[str]:
    """Write every table as ``<name>.tsv`` plus ``fits.json``; returns file names."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for name, (header, data) in sorted(result["tables"].items()):
        fname = f"{name}.tsv"
        write_table(os.path.join(out_dir, fname), header, data)
        names.append(fname)
    dump_json(os.path.join(out_dir, "fits.json"), result["fits"])
    names.append("fits.json")
    return names
