"""Long memory in message activity.

The all-message count series of a default run is detrended with a one-day
moving average, and its fluctuation function F2(n) is measured over one
decade of window sizes.  The slope is the Hurst exponent; a shuffled copy of
the same residual is the memoryless baseline it must beat.

    python demos/persistence.py [seed]
"""
import sys

import numpy as np

from emochat import analysis, tsanalysis as ts
from emochat.simulator import SimConfig, run


def main(seed: int = 1):
    res = run(SimConfig(seed=seed))
    counts = ts.count_series(res.log, "all", n_ticks=res.config.ticks)
    _, resid = ts.detrend(counts, analysis.DEFAULTS["detrend_window"])
    h, se = ts.hurst(resid)
    shuffled = np.random.default_rng(seed).permutation(resid.values)
    h0, _ = ts.hurst(shuffled)
    print(f"{int(counts.values.sum())} agent messages over {len(counts)} ticks")
    print(f"H = {h:.3f} +- {se:.3f}   (shuffled: {h0:.3f})")
    print("   n     F2(n)   F2 shuffled")
    ns = ts.scale_values(8, 80)
    for (n, f), (_, g) in zip(ts.fluctuation_function(resid, ns),
                              ts.fluctuation_function(shuffled, ns)):
        print(f"{n:4d}  {f:8.3f}  {g:8.3f}")
    spectrum = ts.power_spectrum(resid)
    phi, phi_se = ts.spectral_exponent(spectrum)
    print(f"spectral exponent of the residual: phi = {phi:.3f} +- {phi_se:.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
