"""Run configuration: one declarative file (TOML or JSON) per run.

Sections and their keys mirror the library objects::

    out = "runs/positive"        # output directory (CLI --out overrides)

    [sim]        ticks, seed, n0, n_targets, n_moderators, forward_fraction,
                 arousal_threshold, newcomers_fire_on_arrival, initial_valence
    [map]        gamma, q_mf, c2, t0_window, eps
    [population] lambda0, circadian_amplitude, day_length,
                 g, n_c, delay_ordinary, delay_moderator   (distribution tables)
    [bot]        profile, table_file, table_seed, delay, n_rows, row_len
    [analysis]   detrend_window, n_min, n_max, per_decade, spectrum_fit,
                 bins_per_decade, avalanche_baseline, avalanche_series,
                 q_min, q_max, q_step
    [corrnet]    c0, filter, resolution, restarts, seed, reference

Distribution tables look like ``{name = "geometric", mean = 5.0}``; a
tabulated law reads ``{name = "tabulated", file = "delays.tsv"}``.  Relative
paths are resolved against the config file's directory.  Unknown keys are
errors reported with their full key path.

A manifest written by ``simulate`` is itself a valid config file.
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .analysis import DEFAULTS as ANALYSIS_DEFAULTS
from .emokernel import MapParams
from .population import DistributionError, DistributionSet, make_distribution
from .simulator import BotSpec, ConfigError, SimConfig

try:  # Python >= 3.11
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

MANIFEST_FORMAT = "emochat-manifest/1"


def _library_defaults() -> Dict[str, Any]:
    # single source of truth: the dataclass defaults of the library objects
    sim = SimConfig()
    dists = sim.dists
    return {
        "sim": {
            "ticks": sim.ticks, "seed": sim.seed, "n0": sim.n0, "n_targets": sim.n_targets,
            "n_moderators": sim.n_moderators, "forward_fraction": sim.forward_fraction,
            "arousal_threshold": sim.arousal_threshold,
            "newcomers_fire_on_arrival": sim.newcomers_fire_on_arrival,
            "initial_valence": sim.initial_valence,
        },
        "map": {"gamma": sim.map.gamma, "q_mf": sim.map.q_mf, "c2": sim.map.c2,
                "t0_window": sim.map.t0_window, "eps": sim.map.eps},
        "population": {
            "g": dists.g_dist.params(), "n_c": dists.nc_dist.params(),
            "delay_ordinary": dists.delay_ordinary.params(),
            "delay_moderator": dists.delay_moderator.params(),
            "lambda0": dists.lambda0, "circadian_amplitude": dists.circadian_amplitude,
            "day_length": dists.day_length,
        },
        "bot": {"profile": sim.bot.profile, "table_file": None, "table_seed": None,
                "delay": sim.bot.delay, "n_rows": sim.bot.n_rows, "row_len": sim.bot.row_len},
        "analysis": dict(ANALYSIS_DEFAULTS),
        "corrnet": {"c0": 0.4, "filter": True, "resolution": 1.0, "restarts": 8, "seed": 0,
                    "reference": None},
    }


_DIST_KEYS = ("g", "n_c", "delay_ordinary", "delay_moderator")
_PATH_KEYS = {("bot", "table_file"), ("corrnet", "reference")}


def default_dict() -> Dict[str, Any]:
    d = _library_defaults()
    d["out"] = "out"
    return d


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, plus where to put its files."""

    sim: SimConfig
    analysis: Dict[str, Any]
    corrnet: Dict[str, Any]
    out: str = "out"
    raw: Dict[str, Any] = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.sim.seed

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved, JSON-serializable form (paths made absolute)."""
        return copy.deepcopy(self.raw)


def _merge(defaults: Dict[str, Any], given: Dict[str, Any], path: str) -> Dict[str, Any]:
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        kp = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"{kp}: unknown key")
        if key in _DIST_KEYS and path == "population":
            if not isinstance(val, dict):
                raise ConfigError(f"{kp}: expected a table like {{name = ..., ...}}")
            out[key] = dict(val)  # replaced wholesale, never merged
        elif isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{kp}: expected a table")
            out[key] = _merge(defaults[key], val, kp)
        else:
            out[key] = val
    return out


def _check_type(kp: str, val, kind) -> None:
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        return
    if kind is int and isinstance(val, bool):
        raise ConfigError(f"{kp}: expected an integer, got {val!r}")
    if not isinstance(val, kind):
        raise ConfigError(f"{kp}: expected {kind.__name__}, got {val!r}")


def _typecheck(d: Dict[str, Any], defaults: Dict[str, Any], path: str = "") -> None:
    for key, dval in defaults.items():
        kp = f"{path}.{key}" if path else key
        val = d[key]
        if isinstance(dval, dict) and not (path == "population" and key in _DIST_KEYS):
            _typecheck(val, dval, kp)
        elif dval is None or val is None:
            continue
        elif isinstance(dval, bool):
            _check_type(kp, val, bool)
        elif isinstance(dval, int):
            _check_type(kp, val, int)
        elif isinstance(dval, float):
            _check_type(kp, val, float)
        elif isinstance(dval, str):
            _check_type(kp, val, str)


def _resolve_dist(kp: str, entry: Dict[str, Any], base_dir: Optional[str]):
    entry = dict(entry)
    if entry.get("name") == "tabulated" and "file" in entry and base_dir is not None:
        if not os.path.isabs(entry["file"]):
            entry["file"] = os.path.normpath(os.path.join(base_dir, entry["file"]))
    try:
        return make_distribution(entry), entry
    except (DistributionError, OSError) as exc:
        raise ConfigError(f"{kp}: {exc}")


def from_dict(given: Dict[str, Any], base_dir: Optional[str] = None) -> RunConfig:
    """Validate a (possibly partial) config mapping and build a RunConfig."""
    if not isinstance(given, dict):
        raise ConfigError("config must be a table/object at the top level")
    if given.get("format") == MANIFEST_FORMAT:
        if "config" not in given:
            raise ConfigError("manifest has no 'config' section")
        given = given["config"]
    d = _merge(default_dict(), given, "")
    _typecheck(d, default_dict())

    for sec, key in _PATH_KEYS:
        p = d[sec][key]
        if p is not None and base_dir is not None and not os.path.isabs(p):
            d[sec][key] = os.path.normpath(os.path.join(base_dir, p))

    pop = d["population"]
    dists = {}
    for key in _DIST_KEYS:
        dists[key], pop[key] = _resolve_dist(f"population.{key}", pop[key], base_dir)
    try:
        dset = DistributionSet(
            g_dist=dists["g"], nc_dist=dists["n_c"],
            delay_ordinary=dists["delay_ordinary"], delay_moderator=dists["delay_moderator"],
            lambda0=float(pop["lambda0"]), circadian_amplitude=float(pop["circadian_amplitude"]),
            day_length=int(pop["day_length"]))
        mp = MapParams(**{k: d["map"][k] for k in ("gamma", "q_mf", "c2", "eps")},
                       t0_window=int(d["map"]["t0_window"]))
    except (DistributionError, ValueError) as exc:
        raise ConfigError(str(exc))
    b = d["bot"]
    bot = BotSpec(profile=b["profile"], table_file=b["table_file"], table_seed=b["table_seed"],
                  delay=int(b["delay"]), n_rows=int(b["n_rows"]), row_len=int(b["row_len"]))
    s = d["sim"]
    sim = SimConfig(map=mp, dists=dset, bot=bot, **s)
    try:
        sim.validate()
    except DistributionError as exc:
        raise ConfigError(f"population: {exc}")

    a = d["analysis"]
    if a["detrend_window"] < 3 or a["detrend_window"] % 2 == 0:
        raise ConfigError("analysis.detrend_window: must be an odd integer >= 3")
    if not 1 <= a["n_min"] < a["n_max"]:
        raise ConfigError("analysis.n_min/n_max: need 1 <= n_min < n_max")
    if a["spectrum_fit"] is not None:
        sf = a["spectrum_fit"]
        if not (isinstance(sf, list) and len(sf) == 2 and 0 < sf[0] < sf[1]):
            raise ConfigError("analysis.spectrum_fit: expected [f_lo, f_hi] with 0 < f_lo < f_hi")
    if a["avalanche_series"] not in ("residual", "counts"):
        raise ConfigError("analysis.avalanche_series: must be 'residual' or 'counts'")
    if not 0.0 < a["q_min"] < a["q_max"] < 2.0 or a["q_step"] <= 0:
        raise ConfigError("analysis.q_min/q_max/q_step: need 0 < q_min < q_max < 2, q_step > 0")
    c = d["corrnet"]
    if not -1.0 < c["c0"] < 1.0:
        raise ConfigError("corrnet.c0: must lie in (-1, 1)")
    if c["resolution"] <= 0:
        raise ConfigError("corrnet.resolution: must be > 0")
    if c["restarts"] < 1:
        raise ConfigError("corrnet.restarts: must be >= 1")
    return RunConfig(sim, a, c, d["out"], d)


def parse_text(text: str, fmt: str) -> Dict[str, Any]:
    try:
        if fmt == "json":
            return json.loads(text)
        return _toml.loads(text)
    except (ValueError, _toml.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {fmt}: {exc}")


def load(path) -> RunConfig:
    """Load a .toml or .json config (or a manifest) from disk."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    fmt = "json" if path.endswith(".json") or text.lstrip().startswith("{") else "toml"
    return from_dict(parse_text(text, fmt), base_dir=os.path.dirname(os.path.abspath(path)))


def with_overrides(cfg: RunConfig, **flat) -> RunConfig:
    """Return a new config with ``section.key=value`` style overrides applied."""
    d = cfg.to_dict()
    for dotted, val in flat.items():
        if val is None:
            continue
        parts = dotted.split(".")
        node = d
        for p in parts[:-1]:
            node = node[p]
        node[parts[-1]] = val
    return from_dict(d)


def to_toml(d: Dict[str, Any]) -> str:
    """Minimal TOML writer for config mappings (None values are omitted)."""
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return repr(v)
        if isinstance(v, str):
            return json.dumps(v)
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        if isinstance(v, dict):
            return "{" + ", ".join(f"{k} = {fmt(x)}" for k, x in v.items() if x is not None) + "}"
        raise TypeError(v)

    lines = [f"{k} = {fmt(v)}" for k, v in d.items() if not isinstance(v, dict) and v is not None]
    for sec, body in d.items():
        if not isinstance(body, dict):
            continue
        lines.append("")
        lines.append(f"[{sec}]")
        for k, v in body.items():
            if v is not None:
                lines.append(f"{k} = {fmt(v)}")
    return "\n".join(lines) + "\n"
