"""Valence-correlation networks, their communities and group overlaps.

Pipeline: per-node valence series -> Pearson matrix -> optional
meta-correlation filter -> threshold graph (positive weights only) ->
maximum-modularity communities -> coarse-grained two-group split ->
Jaccard overlap against a second (e.g. experimental) partition.

Graphs are small (about a hundred nodes), so everything works on dense
numpy matrices.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np


class CorrnetError(ValueError):
    pass


def _as_array(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float)


# -- correlation matrices -----------------------------------------------------------

def pearson_matrix(series_set: Sequence) -> np.ndarray:
    """C_ij = (<v_i v_j> - <v_i><v_j>) / (sigma_i sigma_j) over aligned samples.

    Series of unequal length are truncated to the shortest one by index.
    Population standard deviations are used, as in the plain definition.
    """
    arrays = [_as_array(s) for s in series_set]
    if len(arrays) < 2:
        raise CorrnetError("need at least 2 series")
    n = min(len(a) for a in arrays)
    if n < 2:
        raise CorrnetError("every series needs at least 2 samples")
    X = np.vstack([a[:n] for a in arrays])
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    sd = np.sqrt(np.mean(Xc * Xc, axis=1))
    bad = np.flatnonzero(sd <= 1e-12 * np.maximum(1.0, np.abs(mean)))
    if len(bad):
        raise CorrnetError(f"zero-variance series at index {int(bad[0])}")
    C = (Xc @ Xc.T) / n / np.outer(sd, sd)
    np.clip(C, -1.0, 1.0, out=C)
    np.fill_diagonal(C, 1.0)
    return C


def filter_matrix(C: np.ndarray) -> np.ndarray:
    """Meta-correlation filter.

    V_ij is the Pearson correlation between rows C_i. and C_j. after dropping
    columns i and j from both, so pairs that relate to the rest of the system
    in the same way get enhanced.  Pairs whose reduced rows are constant get 0.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    if C.ndim != 2 or C.shape[1] != n:
        raise CorrnetError("matrix must be square")
    if n < 3:
        raise CorrnetError("filtering needs n >= 3")
    m = n - 2
    d = np.diag(C)
    R = C.sum(axis=1)
    Q2 = (C * C).sum(axis=1)
    # reduced sums for row i when columns i and j are removed, indexed [i, j]
    S = R[:, None] - d[:, None] - C
    SS = Q2[:, None] - (d**2)[:, None] - C**2
    X = C @ C.T - d[:, None] * C.T - C * d[None, :]
    num = m * X - S * S.T
    var = m * SS - S**2
    den2 = var * var.T
    V = np.zeros_like(C)
    ok = den2 > 1e-24 * np.maximum(1.0, m * m)
    V[ok] = num[ok] / np.sqrt(den2[ok])
    V = 0.5 * (V + V.T)
    np.clip(V, -1.0, 1.0, out=V)
    np.fill_diagonal(V, 1.0)
    return V


# -- graphs -------------------------------------------------------------------------

@dataclass
class WeightedGraph:
    """Undirected weighted graph as a dense symmetric matrix (no self-loops)."""

    ids: List[Hashable]
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.ids), len(self.ids)):
            raise CorrnetError("weight matrix does not match the id list")
        if len(set(self.ids)) != len(self.ids):
            raise CorrnetError("node ids must be unique")

    @property
    def n(self) -> int:
        return len(self.ids)

    def edges(self) -> List[Tuple[Hashable, Hashable, float]]:
        iu, ju = np.nonzero(np.triu(self.weights, k=1))
        return [(self.ids[i], self.ids[j], float(self.weights[i, j])) for i, j in zip(iu, ju)]

    def degree(self) -> np.ndarray:
        return self.weights.sum(axis=1)


def threshold_graph(M: np.ndarray, c0: float, ids: Optional[Sequence] = None) -> WeightedGraph:
    """Keep edge (i, j) with weight M_ij iff M_ij > c0; isolated nodes stay."""
    if not -1.0 < c0 < 1.0:
        raise CorrnetError(f"threshold must lie in (-1, 1), got {c0}")
    M = np.asarray(M, dtype=float)
    if ids is None:
        ids = list(range(M.shape[0]))
    # only positive correlations ever become edges
    keep = (M > c0) & (M > 0)
    W = np.where(keep, M, 0.0)
    np.fill_diagonal(W, 0.0)
    return WeightedGraph(list(ids), W)


# -- modularity ---------------------------------------------------------------------

@dataclass
class CommunityPartition:
    """``labels[i]`` is the community of node ``ids[i]``; labels are 0..k-1."""

    ids: List[Hashable]
    labels: np.ndarray
    modularity: float
    resolution: float = 1.0

    @property
    def n_communities(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def groups(self) -> List[frozenset]:
        return [frozenset(self.ids[i] for i in np.flatnonzero(self.labels == c))
                for c in range(self.n_communities)]

    def as_dict(self) -> Dict[Hashable, int]:
        return {i: int(c) for i, c in zip(self.ids, self.labels)}


def modularity(W: np.ndarray, labels: Sequence[int], resolution: float = 1.0) -> float:
    """Weighted modularity, evaluated directly from its pair-sum definition."""
    W = np.asarray(W, dtype=float)
    labels = np.asarray(labels)
    m2 = W.sum()
    if m2 <= 0:
        return 0.0
    k = W.sum(axis=1)
    same = labels[:, None] == labels[None, :]
    return float(((W - resolution * np.outer(k, k) / m2) * same).sum() / m2)


def _canonical(labels: np.ndarray) -> np.ndarray:
    # relabel by first appearance so that equal partitions compare equal
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(labels.max() + 1, dtype=int)
    remap[np.unique(labels)[order]] = np.arange(len(order))
    return remap[labels]


def _move_nodes(W: np.ndarray, resolution: float, order: np.ndarray) -> Tuple[np.ndarray, bool]:
    n = W.shape[0]
    k = W.sum(axis=1)
    m2 = k.sum()
    comm = np.arange(n)
    tot = k.copy()
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            tot[ci] -= k[i]
            w_to = np.bincount(comm, weights=W[i], minlength=n)
            w_to[ci] -= W[i, i]
            gain = w_to - resolution * tot * k[i] / m2
            cand = np.flatnonzero(w_to > 0)
            best = ci
            best_gain = gain[ci]
            if len(cand):
                j = cand[np.argmax(gain[cand])]  # first maximum = lowest label
                if gain[j] > best_gain + 1e-12:
                    best, best_gain = j, gain[j]
            tot[best] += k[i]
            if best != ci:
                comm[i] = best
                improved = True
                moved_any = True
    return _canonical(comm), moved_any


def _louvain(W: np.ndarray, resolution: float, order: np.ndarray,
             rng: Optional[np.random.Generator]) -> np.ndarray:
    n = W.shape[0]
    labels = np.arange(n)
    current = W
    node_order = order
    while True:
        comm, moved = _move_nodes(current, resolution, node_order)
        if not moved:
            break
        labels = comm[labels]
        c = comm.max() + 1
        S = np.zeros((current.shape[0], c))
        S[np.arange(current.shape[0]), comm] = 1.0
        current = S.T @ current @ S
        if rng is None:
            node_order = np.arange(c)
        else:
            node_order = rng.permutation(c)
        if c == 1:
            break
    return _canonical(labels)


def detect_communities(g: WeightedGraph, resolution: float = 1.0, restarts: int = 8,
                       seed: int = 0) -> CommunityPartition:
    """Louvain-style modularity maximization.

    The first pass sweeps nodes in ascending id order; further restarts use
    seeded random sweep orders.  The best modularity wins, ties going to the
    lexicographically smallest canonical labelling.
    """
    if g.n == 0:
        raise CorrnetError("graph has no nodes")
    W = g.weights
    if W.sum() <= 0:
        labels = np.arange(g.n)
        return CommunityPartition(list(g.ids), labels, 0.0, resolution)
    rng = np.random.default_rng(seed)
    best = None
    for r in range(max(1, restarts)):
        if r == 0:
            labels = _louvain(W, resolution, np.arange(g.n), None)
        else:
            labels = _louvain(W, resolution, rng.permutation(g.n), rng)
        q = modularity(W, labels, resolution)
        key = (-round(q, 12), tuple(labels))
        if best is None or key < best[0]:
            best = (key, labels, q)
    _, labels, q = best
    return CommunityPartition(list(g.ids), labels, q, resolution)


# -- two-group split ----------------------------------------------------------------

@dataclass
class TwoGroups:
    dominant: frozenset
    subdominant: frozenset
    resolution: float = 1.0
    method: str = "modularity"

    def as_dict(self) -> Dict[Hashable, str]:
        out = {i: "dominant" for i in self.dominant}
        out.update({i: "subdominant" for i in self.subdominant})
        return out

    @property
    def sizes(self) -> Tuple[int, int]:
        return len(self.dominant), len(self.subdominant)


def _order_groups(a, b, ids) -> Tuple[frozenset, frozenset]:
    a, b = frozenset(a), frozenset(b)
    if len(b) > len(a):
        return b, a
    if len(b) == len(a) and b and a:
        pos = {x: i for i, x in enumerate(ids)}
        if min(pos[x] for x in b) < min(pos[x] for x in a):
            return b, a
    return a, b


def _eigen_split(g: WeightedGraph, resolution: float) -> Optional[np.ndarray]:
    W = g.weights
    m2 = W.sum()
    if m2 <= 0:
        return None
    k = W.sum(axis=1)
    B = W - resolution * np.outer(k, k) / m2
    vals, vecs = np.linalg.eigh(B)
    if vals[-1] <= 1e-12:
        return None
    u = vecs[:, -1]
    side = u > 0
    if side.all() or not side.any():
        return None
    return side


def _two_from_many(g: WeightedGraph, labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Keep the two largest communities; attach the rest by connection weight.

    Leftover communities with no edge to either core join the larger core.
    """
    sizes = np.bincount(labels)
    order = np.lexsort((np.arange(len(sizes)), -sizes))
    a, b = order[0], order[1]
    in_a = labels == a
    in_b = labels == b
    W = g.weights
    for c in order[2:]:
        members = labels == c
        wa = W[np.ix_(members, in_a)].sum()
        wb = W[np.ix_(members, in_b)].sum()
        if wb > wa:
            in_b = in_b | members
        else:
            in_a = in_a | members
    return in_a, in_b


def n_components(W: np.ndarray) -> int:
    """Connected components of the graph with adjacency ``W != 0``."""
    n = W.shape[0]
    seen = np.zeros(n, dtype=bool)
    adj = W != 0
    k = 0
    for s in range(n):
        if seen[s]:
            continue
        k += 1
        frontier = np.zeros(n, dtype=bool)
        frontier[s] = True
        while frontier.any():
            seen |= frontier
            frontier = adj[frontier].any(axis=0) & ~seen
    return k


def coarse_grain(p: CommunityPartition, g: WeightedGraph, restarts: int = 8, seed: int = 0,
                 max_halvings: int = 40) -> TwoGroups:
    """Reduce a community structure to a dominant and a subdominant group.

    The resolution is halved and detection re-run until at most two
    communities remain.  A single community is split along the leading
    eigenvector of the modularity matrix.  If disconnected pieces keep more
    than two communities alive, the two largest absorb the rest.
    """
    ids = list(g.ids)
    part = p
    res = p.resolution
    method = "modularity"
    halvings = 0
    # modularity never merges across components, so stop once that floor is hit
    floor = max(2, n_components(g.weights))
    while part.n_communities > floor and halvings < max_halvings:
        res /= 2.0
        halvings += 1
        part = detect_communities(g, res, restarts, seed)
    labels = part.labels
    idx = np.arange(g.n)
    if part.n_communities > 2:
        in_a, in_b = _two_from_many(g, labels)
        method = "merged"
    elif part.n_communities == 2:
        in_a, in_b = labels == 0, labels == 1
    else:
        side = _eigen_split(g, res)
        method = "eigenvector"
        if side is None:
            in_a, in_b = np.ones(g.n, dtype=bool), np.zeros(g.n, dtype=bool)
        else:
            in_a, in_b = side, ~side
    dom, sub = _order_groups((ids[i] for i in idx[in_a]), (ids[i] for i in idx[in_b]), ids)
    return TwoGroups(dom, sub, res, method)


# -- overlaps -----------------------------------------------------------------------

def jaccard(a, b) -> float:
    """|a & b| / |a | b|, and 1 for two empty sets."""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def group_overlap(agents: TwoGroups, users: TwoGroups) -> Tuple[float, float, float, float]:
    """Jaccard of dominant-dominant and subdominant-subdominant pairs, plus 1 - J."""
    ids_a = agents.dominant | agents.subdominant
    ids_u = users.dominant | users.subdominant
    if ids_a != ids_u:
        missing = sorted(map(str, ids_a ^ ids_u))[:5]
        raise CorrnetError(f"partitions cover different ids (e.g. {', '.join(missing)})")
    j1 = jaccard(agents.dominant, users.dominant)
    j2 = jaccard(agents.subdominant, users.subdominant)
    return j1, j2, 1.0 - j1, 1.0 - j2


@dataclass
class CorrnetResult:
    ids: List[Hashable]
    raw: np.ndarray
    matrix: np.ndarray
    graph: WeightedGraph
    partition: CommunityPartition
    groups: TwoGroups
    overlap: Optional[Tuple[float, float, float, float]] = None
    settings: dict = field(default_factory=dict)


def analyze_series(series_set: Sequence, ids: Optional[Sequence] = None, c0: float = 0.4,
                   use_filter: bool = True, resolution: float = 1.0, restarts: int = 8,
                   seed: int = 0, reference: Optional[TwoGroups] = None) -> CorrnetResult:
    """Run the whole chain on aligned series."""
    if ids is None:
        ids = list(range(len(series_set)))
    ids = list(ids)
    C = pearson_matrix(series_set)
    M = filter_matrix(C) if use_filter else C
    g = threshold_graph(M, c0, ids)
    part = detect_communities(g, resolution, restarts, seed)
    groups = coarse_grain(part, g, restarts, seed)
    overlap = group_overlap(groups, reference) if reference is not None else None
    settings = {"c0": c0, "filter": use_filter, "resolution": resolution,
                "restarts": restarts, "seed": seed}
    return CorrnetResult(ids, C, M, g, part, groups, overlap, settings)


# -- file formats -------------------------------------------------------------------

def _parse_id(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def write_matrix(path, M: np.ndarray, ids: Sequence) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["id"] + [str(i) for i in ids])
        for i, row in zip(ids, np.asarray(M)):
            w.writerow([str(i)] + [repr(float(x)) for x in row])


def read_matrix(path) -> Tuple[List, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter="\t") if r]
    ids = [_parse_id(t) for t in rows[0][1:]]
    M = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    if M.shape != (len(ids), len(ids)):
        raise CorrnetError(f"{path}: matrix is not square over its ids")
    return ids, M


def write_edges(path, g: WeightedGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("source\ttarget\tweight\n")
        for a, b, wt in g.edges():
            fh.write(f"{a}\t{b}\t{wt!r}\n")


def write_partition(path, mapping: Dict[Hashable, object]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id\tgroup\n")
        for k in sorted(mapping, key=lambda x: (str(type(x)), x)):
            fh.write(f"{k}\t{mapping[k]}\n")


def read_partition(path) -> Dict[Hashable, str]:
    out = {}
    header = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if header is None:
                header = parts
                if header[:2] != ["id", "group"]:
                    raise CorrnetError(f"{path}: expected header 'id group'")
                continue
            if len(parts) != 2:
                raise CorrnetError(f"{path}:{lineno}: expected 'id group'")
            out[_parse_id(parts[0])] = parts[1]
    if header is None:
        raise CorrnetError(f"{path}: empty partition file")
    return out


def two_groups_from_mapping(mapping: Dict[Hashable, str]) -> TwoGroups:
    """Build a TwoGroups from an id -> label map with at most two labels.

    Labels 'dominant'/'subdominant' are honoured; any other pair of labels
    is ordered by group size.
    """
    labels = sorted(set(mapping.values()))
    if len(labels) > 2:
        raise CorrnetError(f"expected at most 2 groups, found {len(labels)}")
    if set(labels) <= {"dominant", "subdominant"}:
        dom = frozenset(k for k, v in mapping.items() if v == "dominant")
        sub = frozenset(k for k, v in mapping.items() if v == "subdominant")
        return TwoGroups(dom, sub, method="file")
    groups = [frozenset(k for k, v in mapping.items() if v == lab) for lab in labels]
    groups += [frozenset()] * (2 - len(groups))
    ids = sorted(mapping, key=lambda x: (str(type(x)), x))
    dom, sub = _order_groups(groups[0], groups[1], ids)
    return TwoGroups(dom, sub, method="file")


def write_overlap_report(path, overlap: Tuple[float, float, float, float],
                         agents: TwoGroups, users: TwoGroups) -> None:
    j1, j2, d1, d2 = overlap
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("group\tsize_agents\tsize_reference\tjaccard\tdissimilarity\n")
        fh.write(f"dominant\t{len(agents.dominant)}\t{len(users.dominant)}\t{j1!r}\t{d1!r}\n")
        fh.write(f"subdominant\t{len(agents.subdominant)}\t{len(users.subdominant)}"
                 f"\t{j2!r}\t{d2!r}\n")


def read_series_table(path) -> Tuple[List, List[np.ndarray]]:
    """Per-node series from a TSV file.

    Two layouts are accepted: wide (header row of node ids, one column per
    node, blank cells allowed at the end of shorter columns) and long (header
    ``node tick value``, one sample per line, sorted by tick within a node).
    """
    with open(path, encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter="\t")
                if r and not r[0].startswith("#")]
    if not rows:
        raise CorrnetError(f"{path}: empty series file")
    header = [h.strip() for h in rows[0]]
    if header == ["node", "tick", "value"]:
        data: Dict[Hashable, List[Tuple[float, float]]] = {}
        for lineno, r in enumerate(rows[1:], start=2):
            try:
                node, tick, val = _parse_id(r[0]), float(r[1]), float(r[2])
            except (ValueError, IndexError):
                raise CorrnetError(f"{path}:{lineno}: expected 'node tick value'")
            data.setdefault(node, []).append((tick, val))
        ids = list(data)
        series = []
        for node in ids:
            pts = sorted(data[node], key=lambda p: p[0])
            series.append(np.array([v for _, v in pts]))
        return ids, series
    ids = [_parse_id(h) for h in header]
    cols: List[List[float]] = [[] for _ in ids]
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) > len(ids):
            raise CorrnetError(f"{path}:{lineno}: more cells than columns")
        for c, cell in enumerate(r):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                cols[c].append(float(cell))
            except ValueError:
                raise CorrnetError(f"{path}:{lineno}: bad number {cell!r}")
    return ids, [np.array(c) for c in cols]


def write_series_table(path, ids: Sequence, series: Sequence) -> None:
    arrays = [_as_array(s) for s in series]
    n = max((len(a) for a in arrays), default=0)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(str(i) for i in ids) + "\n")
        for t in range(n):
            fh.write("\t".join(repr(float(a[t])) if t < len(a) else "" for a in arrays) + "\n")
