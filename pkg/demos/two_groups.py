"""Do the Bot's 91 partners split into two emotional camps?

Takes the per-tick valence of every target agent in a positive-Bot run,
correlates the series pairwise, filters the matrix, keeps links above
c0 = 0.4 and looks for communities.  The structure is then coarse-grained
into a dominant and a subdominant group and compared with the packaged
reference partition.

    python demos/two_groups.py [seed]
"""
import sys

import numpy as np

from emochat import cli, corrnet
from emochat.simulator import SimConfig, run


def main(seed: int = 1):
    res = run(SimConfig(seed=seed))
    ids = list(range(1, len(res.targets) + 1))
    ref = corrnet.two_groups_from_mapping(corrnet.read_partition(cli.REFERENCE_PARTITION))
    out = corrnet.analyze_series(list(res.target_valence.T), ids, c0=0.4, reference=ref)

    off = out.raw[~np.eye(len(ids), dtype=bool)]
    print(f"raw correlations: median {np.median(off):+.3f}, "
          f"{np.mean(off > 0.4):.1%} above 0.4")
    print(f"graph: {len(out.graph.edges())} edges, "
          f"{corrnet.n_components(out.graph.weights)} connected components")
    print(f"communities: {out.partition.n_communities} (Q = {out.partition.modularity:.3f})")
    d, s = out.groups.sizes
    print(f"coarse-grained ({out.groups.method}): dominant {d}, subdominant {s}")
    mods = {j for j, a in enumerate(res.targets, start=1) if res.profiles[a].is_moderator}
    print(f"moderators among the dominant group: {len(mods & out.groups.dominant)} of {len(mods)}")
    j1, j2, d1, d2 = out.overlap
    print(f"Jaccard vs reference: dominant {j1:.3f}, subdominant {j2:.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
