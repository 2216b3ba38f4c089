"""Independent reference generators and brute-force counterparts used by tests."""
import math

import numpy as np


def fgn_davies_harte(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant embedding."""
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * ((k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    if np.any(lam < 0):
        raise ValueError("embedding not positive definite")
    m = len(row)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(lam / m) * z)
    return w.real[:n]


def power_law_noise(n: int, phi: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian series with spectrum ~ nu**-phi (random phases and Rayleigh amplitudes)."""
    f = np.fft.rfftfreq(n)
    amp = np.zeros_like(f)
    amp[1:] = f[1:] ** (-phi / 2)
    coef = amp * (rng.standard_normal(len(f)) + 1j * rng.standard_normal(len(f)))
    coef[0] = 0
    return np.fft.irfft(coef, n)


def runs_above(x, baseline=0.0):
    """Single pass scanner: list of (start, duration, size)."""
    out, start, total = [], None, 0.0
    for i, v in enumerate(x):
        if v > baseline:
            if start is None:
                start, total = i, 0.0
            total += v
        elif start is not None:
            out.append((start, i - start, total))
            start = None
    if start is not None:
        out.append((start, len(x) - start, total))
    return out


def pearson(a, b) -> float:
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    num = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    da = math.sqrt(sum((x - ma) ** 2 for x in a))
    db = math.sqrt(sum((y - mb) ** 2 for y in b))
    return num / (da * db)


def charge_counts(log, n_ticks, eps):
    q = [0] * n_ticks
    for t in range(n_ticks):
        for m in log:
            if m.tick == t and m.sender != -1:
                if m.valence > eps:
                    q[t] += 1
                elif m.valence < -eps:
                    q[t] -= 1
    return q


def sample_pareto(alpha: float, xmin: float, size: int, rng) -> np.ndarray:
    return xmin * (1.0 - rng.random(size)) ** (-1.0 / (alpha - 1.0))


def sample_q_exp(q: float, x0: float, size: int, rng) -> np.ndarray:
    # survival S(x) = (1 + (q-1) x / x0) ** (-(2-q)/(q-1)); invert S = u
    u = 1.0 - rng.random(size)
    return x0 / (q - 1.0) * (u ** (-(q - 1.0) / (2.0 - q)) - 1.0)
