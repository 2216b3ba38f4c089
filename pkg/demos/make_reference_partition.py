"""Regenerate the packaged reference partition used by the overlap report.

No experimental user series ship with the package, so the reference is a
synthetic stand-in: 91 "users" whose valence sequences share one of two
latent moods (a large and a small block), run through the same correlation
pipeline as the simulated agents.  Replace the file with a partition derived
from real dialog data to get a meaningful comparison.
"""
import os
import sys

import numpy as np

from emochat import corrnet

N_USERS, N_DOMINANT, LENGTH, SEED = 91, 60, 35, 2024


def block_series(rng):
    moods = rng.normal(size=(2, LENGTH))
    block = np.where(rng.permutation(N_USERS) < N_DOMINANT, 0, 1)
    noise = rng.normal(size=(N_USERS, LENGTH))
    return moods[block] + 0.8 * noise


def main(path):
    rng = np.random.default_rng(SEED)
    series = block_series(rng)
    res = corrnet.analyze_series(list(series), list(range(1, N_USERS + 1)))
    corrnet.write_partition(path, res.groups.as_dict())
    with open(path, encoding="utf-8") as fh:
        body = fh.read()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# synthetic reference partition (two latent moods, seed %d); "
                 "see demos/make_reference_partition.py\n" % SEED)
        fh.write(body)
    print("groups", res.groups.sizes, "->", path)


if __name__ == "__main__":
    default = os.path.join(os.path.dirname(__file__), "..", "src", "emochat", "data",
                           "reference_groups.tsv")
    main(sys.argv[1] if len(sys.argv) > 1 else default)
