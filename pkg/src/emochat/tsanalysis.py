"""Time-series observables of a simulated chat.

Counts of (positive / negative / all) messages per tick, the charge
Q(t) = N+(t) - N-(t), removal of the slow cyclic trend, the fluctuation
function F2(n) ~ n**H, periodogram scaling S(nu) ~ nu**-phi, avalanches above
a baseline and the two tail models used for avalanche statistics:
the decaying q-exponential A e_q(-x/x0) = A (1 + (q - 1) x / x0) ** (-1 / (q - 1)),
which tends to A exp(-x/x0) as q -> 1, and a pure power law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .emokernel import NEGATIVE, POSITIVE, classify_valence

BINS_PER_DECADE = 16


class InsufficientDataError(ValueError):
    pass


@dataclass
class Series:
    values: np.ndarray
    origin: int = 0
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("a series needs at least one sample")

    def __len__(self):
        return len(self.values)

    @property
    def ticks(self) -> np.ndarray:
        return self.origin + np.arange(len(self.values))


def _values(series) -> np.ndarray:
    if isinstance(series, Series):
        return series.values
    return np.asarray(series, dtype=float)


# --------------------------------------------------------------------------- counts

def count_series(log: Iterable, kind: str = "all", eps: float = 0.01,
                 exclude_bot: bool = True, n_ticks: Optional[int] = None,
                 bot_id: int = -1) -> Series:
    """Messages per tick; ``kind`` is 'all', 'positive' or 'negative'."""
    if kind not in ("all", POSITIVE, NEGATIVE):
        raise ValueError(f"unknown kind {kind!r}")
    log = list(log)
    if n_ticks is None:
        n_ticks = (max(m.tick for m in log) + 1) if log else 1
    out = np.zeros(n_ticks)
    for m in log:
        if exclude_bot and m.sender == bot_id:
            continue
        if kind != "all" and classify_valence(m.valence, eps) != kind:
            continue
        out[m.tick] += 1
    return Series(out, 0, kind)


def charge_series(log: Iterable, eps: float = 0.01, exclude_bot: bool = True,
                  n_ticks: Optional[int] = None, bot_id: int = -1) -> Series:
    """Q(t) = N+(t) - N-(t), Bot messages dropped when ``exclude_bot``."""
    log = list(log)
    pos = count_series(log, POSITIVE, eps, exclude_bot, n_ticks, bot_id)
    neg = count_series(log, NEGATIVE, eps, exclude_bot, n_ticks, bot_id)
    return Series(pos.values - neg.values, 0, "charge")


# --------------------------------------------------------------------------- trend

def detrend(series, window: int) -> Tuple[Series, Series]:
    """Centered moving average (symmetric, shrinking at the edges) and residual.

    ``trend.values + residual.values`` reproduces the input exactly.
    """
    x = _values(series)
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    if window > len(x):
        raise InsufficientDataError(f"window {window} longer than series ({len(x)})")
    n = len(x)
    half = window // 2
    idx = np.arange(n)
    h = np.minimum(half, np.minimum(idx, n - 1 - idx))
    csum = np.concatenate([[0.0], np.cumsum(x)])
    trend = (csum[idx + h + 1] - csum[idx - h]) / (2 * h + 1)
    residual = x - trend
    origin = series.origin if isinstance(series, Series) else 0
    label = series.label if isinstance(series, Series) else ""
    return Series(trend, origin, label + ":trend"), Series(residual, origin, label + ":residual")


# --------------------------------------------------------------------------- Hurst

def scale_values(n_min: int = 8, n_max: int = 80, per_decade: int = BINS_PER_DECADE
                 ) -> np.ndarray:
    """Log-spaced distinct integer window lengths in [n_min, n_max]."""
    if n_min < 2 or n_max < n_min:
        raise ValueError("need 2 <= n_min <= n_max")
    k = max(2, int(round(per_decade * math.log10(n_max / n_min))) + 1)
    return np.unique(np.round(np.logspace(math.log10(n_min), math.log10(n_max), k)).astype(int))


def fluctuation_function(series, n_values: Sequence[int]) -> List[Tuple[int, float]]:
    """F2(n) for each window length n.

    The series is integrated into its profile Y(k) = sum_{j<=k} (x_j - <x>),
    cut into non-overlapping windows of length n; F2(n) is the RMS over
    windows of the standard deviation of Y around each window's mean.
    """
    x = _values(series)
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ValueError("no window lengths given")
    if len(x) < 4 * max(n_values):
        raise InsufficientDataError(
            f"series of length {len(x)} too short for n up to {max(n_values)}")
    profile = np.cumsum(x - x.mean())
    out = []
    for n in n_values:
        if n < 2:
            raise ValueError("window lengths must be >= 2")
        m = len(profile) // n
        seg = profile[: m * n].reshape(m, n)
        var = seg.var(axis=1)
        out.append((n, float(np.sqrt(var.mean()))))
    return out


def _loglog_slope(x, y) -> Tuple[float, float]:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if len(lx) < 3:
        raise InsufficientDataError("need at least three points for a slope fit")
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = len(lx) - 2
    s2 = resid @ resid / dof
    se = math.sqrt(s2 / np.sum((lx - lx.mean()) ** 2))
    return float(coef[0]), se


def hurst(series, n_min: int = 8, n_max: int = 80) -> Tuple[float, float]:
    """Hurst exponent and its standard error from F2(n) over [n_min, n_max]."""
    ff = fluctuation_function(series, scale_values(n_min, n_max))
    ns, fs = zip(*ff)
    if min(fs) <= 0:
        raise InsufficientDataError("flat series: F2(n) vanishes")
    return _loglog_slope(ns, fs)


# --------------------------------------------------------------------------- spectra

MIN_SPECTRUM_LENGTH = 256


@dataclass
class Spectrum:
    freq: np.ndarray          # cycles per tick, excludes 0
    power: np.ndarray
    bin_freq: np.ndarray      # log-binned
    bin_power: np.ndarray
    bin_log_power: np.ndarray  # bin mean of log power, used for the slope fit


def log_bin_means(x: np.ndarray, y: np.ndarray, bins_per_decade: int = BINS_PER_DECADE
                  ) -> Tuple[np.ndarray, np.ndarray]:
    """Average y within logarithmic bins of x (x > 0); empty bins dropped."""
    lx = np.log10(x)
    lo = math.floor(lx.min() * bins_per_decade) / bins_per_decade
    idx = np.floor((lx - lo) * bins_per_decade + 1e-9).astype(int)
    nb = idx.max() + 1
    counts = np.bincount(idx, minlength=nb)
    keep = counts > 0
    # geometric-mean abscissa, arithmetic-mean ordinate
    bx = np.exp(np.bincount(idx, weights=np.log(x), minlength=nb)[keep] / counts[keep])
    by = np.bincount(idx, weights=y, minlength=nb)[keep] / counts[keep]
    return bx, by


def power_spectrum(series, bins_per_decade: int = BINS_PER_DECADE) -> Spectrum:
    """Periodogram |FFT|^2 / N at frequencies k/N, k = 1..N/2, plus its log-binned form."""
    x = _values(series)
    n = len(x)
    if n < MIN_SPECTRUM_LENGTH:
        raise InsufficientDataError(
            f"insufficient length: spectrum needs >= {MIN_SPECTRUM_LENGTH} samples, got {n}")
    X = np.fft.rfft(x - x.mean())
    power = (np.abs(X) ** 2 / n)[1:]
    freq = np.fft.rfftfreq(n)[1:]
    bf, bp = log_bin_means(freq, power, bins_per_decade)
    with np.errstate(divide="ignore"):
        lp = np.log(power)
    # a zero ordinate (exact cancellation) must not poison its bin
    lp[~np.isfinite(lp)] = np.log(np.finfo(float).tiny)
    _, blp = log_bin_means(freq, lp, bins_per_decade)
    return Spectrum(freq, power, bf, bp, blp)


def spectral_exponent(spectrum: Spectrum, fit_range: Optional[Tuple[float, float]] = None
                      ) -> Tuple[float, float]:
    """phi such that S(nu) ~ nu**-phi, fitted on the log-binned spectrum.

    The fit uses bin means of log power: periodogram ordinates scatter as
    S(nu) times an exponential variable, whose log is offset by the same
    constant in every bin, while the log of an arithmetic bin mean is offset
    by an amount that shrinks with bin occupancy and would bend the slope.
    """
    f, lp = spectrum.bin_freq, spectrum.bin_log_power
    mask = np.ones(len(f), dtype=bool)
    if fit_range is not None:
        lo, hi = fit_range
        mask &= (f >= lo) & (f <= hi)
    slope, se = _loglog_slope(f[mask], np.exp(lp[mask]))
    return -slope, se


# --------------------------------------------------------------------------- avalanches

@dataclass
class AvalancheSet:
    starts: np.ndarray
    durations: np.ndarray
    sizes: np.ndarray
    baseline: float

    def __len__(self):
        return len(self.starts)

    def as_tuples(self) -> List[Tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in
                zip(self.starts, self.durations, self.sizes)]


def extract_avalanches(series, baseline: float = 0.0) -> AvalancheSet:
    """Maximal runs strictly above ``baseline``.

    Duration is the run length in ticks, size the summed signal over the run.
    """
    x = _values(series)
    above = np.concatenate([[False], x > baseline, [False]])
    d = np.diff(above.astype(np.int8))
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    sizes = csum[ends] - csum[starts]
    origin = series.origin if isinstance(series, Series) else 0
    return AvalancheSet(starts + origin, ends - starts, sizes, float(baseline))


# --------------------------------------------------------------------------- fits

@dataclass
class FitResult:
    model: str
    params: Dict[str, float]
    stderr: Dict[str, float]
    fit_range: Tuple[float, float]
    goodness: float
    n_samples: int
    extra: Dict[str, object] = field(default_factory=dict)


def log_binned_density(samples, bins_per_decade: int = BINS_PER_DECADE,
                       discrete: Optional[bool] = None):
    """Empirical density on logarithmic bins.

    Returns (centers, density, counts).  For integer data the bin width is
    the number of integers the bin holds, and bins holding none are dropped.
    """
    x = np.asarray(samples, dtype=float)
    x = x[x > 0]
    if len(x) == 0:
        raise InsufficientDataError("no positive samples")
    if discrete is None:
        discrete = bool(np.all(x == np.round(x)))
    lx = np.log10(x)
    lo = math.floor(lx.min() * bins_per_decade) / bins_per_decade
    hi = math.floor(lx.max() * bins_per_decade) / bins_per_decade + 1.0 / bins_per_decade
    nb = int(round((hi - lo) * bins_per_decade))
    edges = 10.0 ** (lo + np.arange(nb + 1) / bins_per_decade)
    counts, _ = np.histogram(x, bins=edges)
    if discrete:
        # integers k with edges[i] <= k < edges[i+1]
        width = np.ceil(edges[1:] - 1e-9) - np.ceil(edges[:-1] - 1e-9)
        first = np.ceil(edges[:-1] - 1e-9)
        last = first + width - 1
        centers = np.sqrt(first * np.maximum(last, first))
        ok = width > 0
    else:
        width = np.diff(edges)
        centers = np.sqrt(edges[:-1] * edges[1:])
        ok = np.ones(nb, dtype=bool)
    ok &= counts > 0
    density = np.zeros(nb)
    density[ok] = counts[ok] / (len(x) * width[ok])
    return centers[ok], density[ok], counts[ok]


def q_exponential_logpdf(x, q: float, x0: float) -> np.ndarray:
    """log of (2-q)/x0 * (1 + (q-1) x/x0) ** (-1/(q-1)), normalised on its support.

    Valid for q < 2; for q < 1 the support ends at x0 / (1 - q).
    """
    x = np.asarray(x, dtype=float)
    log_a = math.log((2.0 - q) / x0)
    if abs(q - 1.0) < 1e-9:
        return log_a - x / x0
    base = 1.0 + (q - 1.0) * x / x0
    out = np.full(x.shape, -np.inf)
    ok = base > 0
    out[ok] = log_a - np.log(base[ok]) / (q - 1.0)
    return out


def sample_q_exponential(q: float, x0: float, size: int, rng: np.random.Generator
                         ) -> np.ndarray:
    """Inverse-CDF draws; the survival function is (1+(q-1)x/x0)^(-(2-q)/(q-1))."""
    u = 1.0 - rng.random(size)
    if abs(q - 1.0) < 1e-9:
        return -x0 * np.log(u)
    return x0 / (q - 1.0) * (u ** (-(q - 1.0) / (2.0 - q)) - 1.0)


def _golden_min(f, a: float, b: float, tol: float = 1e-6, maxiter: int = 200
                ) -> Tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


_LOG_PENALTY = 50.0
MIN_FIT_SAMPLES = 100


def fit_q_exponential(samples, q_grid: Optional[Sequence[float]] = None,
                      bins_per_decade: int = BINS_PER_DECADE,
                      discrete: Optional[bool] = None) -> FitResult:
    """Weighted least-squares fit of a q-exponential to the log of the log-binned density.

    For each q on the grid, x0 is found by golden-section search in log
    space with A fixed by normalisation, A = (2 - q) / x0; the best grid
    point is then refined by a golden-section search over q.
    """
    x = np.asarray(samples, dtype=float)
    if len(x) < MIN_FIT_SAMPLES:
        raise InsufficientDataError(f"need >= {MIN_FIT_SAMPLES} samples, got {len(x)}")
    if np.all(x == x[0]):
        raise InsufficientDataError("degenerate sample: all values equal")
    if np.any(x < 0):
        raise ValueError("samples must be non-negative")
    centers, dens, counts = log_binned_density(x, bins_per_decade, discrete)
    if len(centers) < 4:
        raise InsufficientDataError("too few populated bins for a fit")
    target = np.log(dens)
    # var(log count) ~ 1/count, so weight each bin by sqrt(count)
    weight = np.sqrt(counts)

    def resid(q, log_x0):
        model = q_exponential_logpdf(centers, q, math.exp(log_x0))
        r = target - model
        r[~np.isfinite(r)] = _LOG_PENALTY
        return weight * r

    def sse(q, log_x0):
        r = resid(q, log_x0)
        return float(r @ r)

    scale = math.log(float(np.mean(x)))
    lo_x0, hi_x0 = scale - 8.0, scale + 8.0

    def best_x0(q):
        return _golden_min(lambda lx: sse(q, lx), lo_x0, hi_x0, tol=1e-7)

    if q_grid is None:
        q_grid = np.round(np.arange(0.80, 1.951, 0.01), 10)
    scores = [(best_x0(q)[1], q) for q in q_grid]
    _, q_best = min(scores)
    step = float(np.min(np.diff(np.sort(q_grid)))) if len(q_grid) > 1 else 0.01
    q_lo = max(min(q_grid), q_best - step)
    q_hi = min(max(q_grid), q_best + step)
    q_hat, _ = _golden_min(lambda q: best_x0(q)[1], q_lo, q_hi, tol=1e-6)
    lx_hat, sse_hat = best_x0(q_hat)

    # standard errors from the Gauss-Newton covariance of (q, log x0)
    m, p = len(centers), 2
    J = np.empty((m, p))
    h = (1e-5, 1e-5)
    J[:, 0] = (resid(q_hat + h[0], lx_hat) - resid(q_hat - h[0], lx_hat)) / (2 * h[0])
    J[:, 1] = (resid(q_hat, lx_hat + h[1]) - resid(q_hat, lx_hat - h[1])) / (2 * h[1])
    s2 = sse_hat / max(m - p, 1)
    try:
        cov = s2 * np.linalg.inv(J.T @ J)
        se_q = math.sqrt(max(cov[0, 0], 0.0))
        se_x0 = math.exp(lx_hat) * math.sqrt(max(cov[1, 1], 0.0))
    except np.linalg.LinAlgError:
        se_q = se_x0 = math.nan

    x0 = math.exp(lx_hat)
    return FitResult(
        model="q_exponential",
        params={"q": float(q_hat), "x0": x0, "A": (2.0 - q_hat) / x0},
        stderr={"q": se_q, "x0": se_x0},
        fit_range=(float(centers.min()), float(centers.max())),
        goodness=math.sqrt(sse_hat / m),
        n_samples=len(x),
        extra={"bin_centers": centers, "bin_density": dens},
    )


def fit_power_law_tail(samples, xmin: float) -> FitResult:
    """Continuous maximum-likelihood exponent of p(x) ~ x**-alpha for x >= xmin."""
    if xmin <= 0:
        raise ValueError("xmin must be positive")
    x = np.asarray(samples, dtype=float)
    tail = x[x >= xmin]
    n = len(tail)
    if n < MIN_FIT_SAMPLES:
        raise InsufficientDataError(
            f"need >= {MIN_FIT_SAMPLES} samples at or above xmin={xmin}, got {n}")
    logs = np.log(tail / xmin).sum()
    if logs <= 0:
        raise InsufficientDataError("tail has no spread above xmin")
    alpha = 1.0 + n / logs
    se = (alpha - 1.0) / math.sqrt(n)
    # KS distance between the empirical and fitted tail CDFs
    xs = np.sort(tail)
    model_cdf = 1.0 - (xs / xmin) ** (1.0 - alpha)
    emp = np.arange(1, n + 1) / n
    ks = float(np.max(np.maximum(np.abs(emp - model_cdf), np.abs(emp - 1.0 / n - model_cdf))))
    return FitResult("power_law", {"alpha": float(alpha), "xmin": float(xmin)},
                     {"alpha": float(se)}, (float(xmin), float(xs[-1])), ks, n)
