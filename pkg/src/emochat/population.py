"""Agent profiles, the distributions they are drawn from, and population growth.

The empirical chat-room distributions behind the original model are not
public, so every distribution here is a named parametric family that can be
swapped from config, including a tabulated family read from a
``value probability`` file for plugging in real data.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

UNLIMITED = math.inf

ORDINARY = "ordinary"
MODERATOR = "moderator"
BOT = "bot"


class DistributionError(ValueError):
    pass


class Distribution:
    """Base class; subclasses draw ``size`` samples from a numpy Generator."""

    name = ""

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def median(self) -> float:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass
class Beta(Distribution):
    a: float = 2.0
    b: float = 2.0
    name = "beta"

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DistributionError("beta parameters must be positive")

    def sample(self, rng, size=None):
        return rng.beta(self.a, self.b, size=size)

    def median(self):
        # numeric median from a fine quantile grid; only used for sanity checks
        xs = np.linspace(0, 1, 20001)
        pdf = xs ** (self.a - 1) * (1 - xs) ** (self.b - 1)
        pdf[~np.isfinite(pdf)] = 0.0
        cdf = np.cumsum(pdf)
        return float(xs[np.searchsorted(cdf, cdf[-1] / 2)])

    def params(self):
        return {"name": self.name, "a": self.a, "b": self.b}


@dataclass
class Uniform(Distribution):
    low: float = 0.0
    high: float = 1.0
    name = "uniform"

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size=size)

    def median(self):
        return 0.5 * (self.low + self.high)

    def params(self):
        return {"name": self.name, "low": self.low, "high": self.high}


@dataclass(eq=False)
class Tabulated(Distribution):
    """Discrete distribution over explicit values."""

    values: Sequence[float]
    probs: Sequence[float]
    source: Optional[str] = None
    name = "tabulated"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if self.values.ndim != 1 or self.values.shape != p.shape or len(p) == 0:
            raise DistributionError("values and probabilities must be equal-length 1-d")
        if np.any(p < 0) or p.sum() <= 0:
            raise DistributionError("probabilities must be non-negative with positive sum")
        self.probs = p / p.sum()
        self._cdf = np.cumsum(self.probs)
        self._cdf[-1] = 1.0

    def sample(self, rng, size=None):
        u = rng.random(size=size)
        out = self.values[np.searchsorted(self._cdf, u, side="right")]
        return out if size is not None else float(out)

    def median(self):
        return float(self.values[np.searchsorted(self._cdf, 0.5)])

    def params(self):
        if self.source is not None:
            return {"name": self.name, "file": self.source}
        return {"name": self.name, "values": self.values.tolist(), "probs": self.probs.tolist()}

    @classmethod
    def from_file(cls, path) -> "Tabulated":
        values, probs = [], []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    v, p = line.split()
                    values.append(float(v))
                    probs.append(float(p))
                except ValueError:
                    raise DistributionError(f"{path}:{lineno}: expected 'value probability'")
        order = np.argsort(values, kind="stable")
        return cls(np.asarray(values)[order], np.asarray(probs)[order], source=str(path))


class DiscretePowerLaw(Tabulated):
    """P(k) ~ k**-exponent on the integers xmin..cutoff."""

    name = "discrete_power_law"

    def __init__(self, exponent: float, cutoff: int, xmin: int = 1):
        if exponent <= 0:
            raise DistributionError("power-law exponent must be positive")
        if cutoff < xmin or xmin < 1:
            raise DistributionError("need 1 <= xmin <= cutoff")
        self.exponent = float(exponent)
        self.cutoff = int(cutoff)
        self.xmin = int(xmin)
        ks = np.arange(self.xmin, self.cutoff + 1, dtype=float)
        super().__init__(ks, ks ** -self.exponent)

    def params(self):
        return {"name": self.name, "exponent": self.exponent, "cutoff": self.cutoff,
                "xmin": self.xmin}


@dataclass
class Geometric(Distribution):
    """Geometric law on 1, 2, ... with the given mean."""

    mean: float = 3.0
    name = "geometric"

    def __post_init__(self):
        if self.mean < 1:
            raise DistributionError("geometric mean must be >= 1")

    def sample(self, rng, size=None):
        return rng.geometric(1.0 / self.mean, size=size)

    def median(self):
        p = 1.0 / self.mean
        if p == 1.0:
            return 1.0
        return float(math.ceil(math.log(0.5) / math.log(1.0 - p)))

    def params(self):
        return {"name": self.name, "mean": self.mean}


@dataclass
class Constant(Distribution):
    value: float = 1.0
    name = "constant"

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def median(self):
        return self.value

    def params(self):
        return {"name": self.name, "value": self.value}


_FAMILIES = {
    "beta": Beta,
    "uniform": Uniform,
    "geometric": Geometric,
    "constant": Constant,
}


def make_distribution(entry: dict, base_dir=None) -> Distribution:
    """Build a distribution from a ``{"name": ..., <params>}`` mapping."""
    entry = dict(entry)
    try:
        name = entry.pop("name")
    except KeyError:
        raise DistributionError("distribution needs a 'name'")
    try:
        if name == "discrete_power_law":
            return DiscretePowerLaw(**entry)
        if name == "tabulated":
            if "file" in entry:
                path = entry.pop("file")
                if entry:
                    raise TypeError(f"unexpected keys {sorted(entry)}")
                if base_dir is not None and not os.path.isabs(path):
                    path = os.path.join(base_dir, path)
                return Tabulated.from_file(path)
            return Tabulated(**entry)
        if name in _FAMILIES:
            return _FAMILIES[name](**entry)
    except TypeError as exc:
        raise DistributionError(f"bad parameters for {name!r}: {exc}")
    raise DistributionError(f"unknown distribution {name!r}")


@dataclass
class DistributionSet:
    g_dist: Distribution = field(default_factory=lambda: Beta(2.0, 2.0))
    nc_dist: Distribution = field(default_factory=lambda: DiscretePowerLaw(2.5, 1000))
    delay_ordinary: Distribution = field(default_factory=lambda: DiscretePowerLaw(1.1, 1440))
    delay_moderator: Distribution = field(default_factory=lambda: Geometric(7.0))
    lambda0: float = 0.05
    circadian_amplitude: float = 0.5
    day_length: int = 1440

    def validate(self) -> None:
        if self.lambda0 < 0:
            raise DistributionError("lambda0 must be >= 0")
        if not 0 <= self.circadian_amplitude <= 1:
            raise DistributionError("circadian_amplitude must lie in [0, 1]")
        if self.day_length < 1:
            raise DistributionError("day_length must be >= 1")
        if self.delay_moderator.median() > self.delay_ordinary.median():
            raise DistributionError("moderator delays must be shorter: moderator median "
                                    f"{self.delay_moderator.median()} > ordinary median "
                                    f"{self.delay_ordinary.median()}")

    def rate(self, t) -> float:
        lam = self.lambda0 * (1.0 + self.circadian_amplitude *
                              np.sin(2.0 * np.pi * np.asarray(t) / self.day_length))
        return np.maximum(lam, 0.0)


@dataclass(frozen=True)
class AgentProfile:
    g: float
    n_c: float  # integer budget, or UNLIMITED
    is_moderator: bool = False
    delay_class: str = ORDINARY


def sample_delay(dists: DistributionSet, delay_class: str, rng) -> int:
    if delay_class == MODERATOR:
        d = dists.delay_moderator.sample(rng)
    else:
        d = dists.delay_ordinary.sample(rng)
    return max(1, int(d))


def sample_profile(dists: DistributionSet, moderator: bool, rng: np.random.Generator
                   ) -> AgentProfile:
    g = float(np.clip(dists.g_dist.sample(rng), 0.0, 1.0))
    n_c = max(1, int(dists.nc_dist.sample(rng)))
    if moderator:
        return AgentProfile(g, UNLIMITED, True, MODERATOR)
    return AgentProfile(g, n_c, False, ORDINARY)


def arrivals(t: int, dists: DistributionSet, rng: np.random.Generator) -> int:
    """Number of newcomers joining at tick ``t`` (inhomogeneous Poisson)."""
    lam = float(dists.rate(t))
    if lam <= 0:
        return 0
    return int(rng.poisson(lam))


def designate_targets(moderator_flags: Sequence[bool], n_targets: int, n_moderators: int,
                      rng: np.random.Generator) -> List[int]:
    """Pick the Bot's target agents: ``n_moderators`` moderators plus ordinary agents.

    Returns agent ids sorted ascending; position ``j - 1`` holds the agent
    served by Bot table row ``j``.
    """
    flags = np.asarray(moderator_flags, dtype=bool)
    if n_targets > len(flags):
        raise ValueError(f"population of {len(flags)} cannot supply {n_targets} targets")
    if n_moderators > n_targets:
        raise ValueError("n_moderators exceeds n_targets")
    mods = np.flatnonzero(flags)
    ords = np.flatnonzero(~flags)
    if len(mods) < n_moderators:
        raise ValueError(f"only {len(mods)} moderators available, need {n_moderators}")
    if len(ords) < n_targets - n_moderators:
        raise ValueError(f"only {len(ords)} ordinary agents available, "
                         f"need {n_targets - n_moderators}")
    chosen = np.concatenate([
        rng.choice(mods, size=n_moderators, replace=False),
        rng.choice(ords, size=n_targets - n_moderators, replace=False),
    ])
    return sorted(int(i) for i in chosen)


def initial_moderator_flags(n0: int, n_moderators: int, rng: np.random.Generator) -> List[bool]:
    if n_moderators > n0:
        raise ValueError(f"cannot place {n_moderators} moderators in {n0} agents")
    flags = np.zeros(n0, dtype=bool)
    flags[rng.choice(n0, size=n_moderators, replace=False)] = True
    return flags.tolist()


def describe(dists: DistributionSet) -> Dict[str, object]:
    return {
        "g_dist": dists.g_dist.params(),
        "nc_dist": dists.nc_dist.params(),
        "delay_ordinary": dists.delay_ordinary.params(),
        "delay_moderator": dists.delay_moderator.params(),
        "lambda0": dists.lambda0,
        "circadian_amplitude": dists.circadian_amplitude,
        "day_length": dists.day_length,
    }
