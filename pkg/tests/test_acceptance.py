"""Acceptance criteria AC-1 .. AC-8, one test each.

Every test records a single ``AC-n PASS|FAIL`` line (shown in the pytest
terminal summary and printed to stdout) before asserting.
"""
import os
import time
from types import SimpleNamespace

import numpy as np
import pytest

from emochat import analysis, cli, corrnet as cn, tsanalysis as ts
from emochat.emokernel import arousal_field, mean_fields, valence_field
from emochat.simulator import Message

import oracles
from conftest import AC_LINES


def record(ac: str, ok: bool, detail: str) -> None:
    line = f"{ac} {'PASS' if ok else 'FAIL'}: {detail}"
    AC_LINES[ac] = line
    print(line)
    assert ok, line


# -- AC-1 -------------------------------------------------------------------------

def _ac1_checks(rng, n_inst=120):
    worst = 0.0
    exact_ok = True
    for _ in range(n_inst):
        # pearson matrix
        X = rng.standard_normal((int(rng.integers(2, 7)), int(rng.integers(3, 25))))
        C = cn.pearson_matrix(list(X))
        for i in range(len(X)):
            for j in range(len(X)):
                worst = max(worst, abs(C[i, j] - oracles.pearson(X[i], X[j])))

        # fields over a random message list
        now, t0, eps = int(rng.integers(0, 20)), int(rng.integers(1, 6)), 0.01
        msgs = [SimpleNamespace(tick=int(t), arousal=float(a), valence=float(v))
                for t, a, v in zip(rng.integers(-3, 22, 15), rng.uniform(size=15),
                                   rng.uniform(-1, 1, 15))]
        r = int(rng.integers(-1, 2))
        win = [m for m in msgs if now - t0 < m.tick <= now - 1]
        ha = sum(m.arousal for m in win) / len(win) if win else 0.0
        npos = sum(m.valence > eps for m in win)
        nneg = sum(m.valence < -eps for m in win)
        hv = (((1 - 0.4 * r) * npos - (1 + 0.4 * r) * nneg) / (1.4 * (npos + nneg))
              if npos + nneg else 0.0)
        f = mean_fields(msgs, now, t0, r, eps)
        worst = max(worst, abs(arousal_field(msgs, now, t0) - ha), abs(f.h_arousal - ha),
                    abs(f.h_valence - hv), abs(valence_field(npos, nneg, r) - hv))

        # avalanches (exact on integer signals)
        x = rng.integers(0, 4, int(rng.integers(1, 60))) * (rng.uniform(size=1) < 2)
        x = np.where(rng.uniform(size=len(x)) < 0.4, 0, x)
        got = ts.extract_avalanches(x, 0).as_tuples()
        exact_ok &= got == [(s, d, float(z)) for s, d, z in oracles.runs_above(x, 0)]

        # charge series (exact counts)
        log = sorted(Message(int(rng.integers(0, 8)), int(rng.integers(-1, 6)), -2, 0.5,
                             float(rng.uniform(-1, 1))) for _ in range(int(rng.integers(0, 30))))
        q = ts.charge_series(log, 0.01, n_ticks=8).values.tolist()
        exact_ok &= q == oracles.charge_counts(log, 8, 0.01)

        # jaccard (exact)
        a = set(rng.integers(0, 12, int(rng.integers(0, 8))).tolist())
        b = set(rng.integers(0, 12, int(rng.integers(0, 8))).tolist())
        u = len(a | b)
        exact_ok &= cn.jaccard(a, b) == (len(a & b) / u if u else 1.0)
    return worst, exact_ok


def test_ac1_oracle_equivalence():
    t0 = time.perf_counter()
    worst, exact_ok = _ac1_checks(np.random.default_rng(101))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and exact_ok and dt < 10
    record("AC-1", ok, f"120 instances per operation, max deviation {worst:.1e}, "
                       f"counting ops exact={exact_ok}, {dt:.2f}s")


# -- AC-2 -------------------------------------------------------------------------

def test_ac2_estimator_recovery():
    rng = np.random.default_rng(202)
    t0 = time.perf_counter()
    h_iid, _ = ts.hurst(rng.standard_normal(2**16))
    h_fgn, _ = ts.hurst(oracles.fgn_davies_harte(2**16, 0.7, rng))
    phi_1, _ = ts.spectral_exponent(ts.power_spectrum(oracles.power_law_noise(2**16, 1.0, rng)))
    phi_0, _ = ts.spectral_exponent(ts.power_spectrum(rng.standard_normal(2**16)))
    dt = time.perf_counter() - t0
    ok = (abs(h_iid - 0.5) <= 0.05 and abs(h_fgn - 0.7) <= 0.05 and abs(phi_1 - 1) <= 0.15
          and abs(phi_0) <= 0.1 and dt < 30)
    record("AC-2", ok, f"H(iid)={h_iid:.3f} H(fGn 0.7)={h_fgn:.3f} "
                       f"phi(1/f)={phi_1:.3f} phi(white)={phi_0:.3f}, {dt:.2f}s")


# -- AC-3 -------------------------------------------------------------------------

def test_ac3_fit_recovery():
    rng = np.random.default_rng(303)
    t0 = time.perf_counter()
    q = ts.fit_q_exponential(oracles.sample_q_exp(1.33, 10.0, 100_000, rng)).params["q"]
    alphas = {a: ts.fit_power_law_tail(oracles.sample_pareto(a, 1.0, 100_000, rng), 1.0)
              .params["alpha"] for a in (1.66, 1.88)}
    dt = time.perf_counter() - t0
    ok = abs(q - 1.33) <= 0.1 and all(abs(v - a) <= 0.05 for a, v in alphas.items()) and dt < 30
    record("AC-3", ok, f"q={q:.3f} (1.33), alpha={alphas[1.66]:.3f} (1.66), "
                       f"alpha={alphas[1.88]:.3f} (1.88), {dt:.2f}s")


# -- AC-4 -------------------------------------------------------------------------

def _direct_modularity(W, labels):
    k = W.sum(axis=1)
    m2 = W.sum()
    same = labels[:, None] == labels[None, :]
    return float(((W - np.outer(k, k) / m2) * same).sum() / m2)


def test_ac4_community_detection():
    t0 = time.perf_counter()
    k = 10
    W = np.zeros((2 * k, 2 * k))
    W[:k, :k] = W[k:, k:] = 1
    np.fill_diagonal(W, 0)
    W[k - 1, k] = W[k, k - 1] = 1
    p = cn.detect_communities(cn.WeightedGraph(list(range(2 * k)), W))
    planted = p.labels.tolist() == [0] * k + [1] * k
    dq = abs(p.modularity - _direct_modularity(W, p.labels))
    K = np.ones((12, 12)) - np.eye(12)
    single = cn.detect_communities(cn.WeightedGraph(list(range(12)), K)).n_communities == 1
    dt = time.perf_counter() - t0
    ok = planted and dq <= 1e-12 and single and dt < 5
    record("AC-4", ok, f"planted recovered={planted}, |Q - direct|={dq:.1e}, "
                       f"complete graph single community={single}, {dt:.2f}s")


# -- AC-5 -------------------------------------------------------------------------

def test_ac5_charge_sign_signature(default_runs):
    qm = {}
    for p, res in default_runs.items():
        q = ts.charge_series(res.log, res.config.map.eps, n_ticks=res.config.ticks)
        qm[p] = analysis.quarter_means(q.values)
    (pf, pl), (nf, nl), (_, zl) = qm["positive"], qm["negative"], qm["neutral"]
    slowest = max(default_runs.seconds.values())
    ok = (pl > pf and nl < nf and abs(zl) < abs(pl) and abs(zl) < abs(nl) and slowest < 60)
    record("AC-5", ok, f"positive Q {pf:.3f}->{pl:.3f}, negative Q {nf:.3f}->{nl:.3f}, "
                       f"neutral last |Q|={abs(zl):.3f}; slowest run {slowest:.1f}s")


# -- AC-6 -------------------------------------------------------------------------

def test_ac6_persistence_signature(default_runs):
    res = default_runs["positive"]
    counts = ts.count_series(res.log, "all", res.config.map.eps, n_ticks=res.config.ticks)
    _, resid = ts.detrend(counts, analysis.DEFAULTS["detrend_window"])
    h, se = ts.hurst(resid)
    shuffled = np.random.default_rng(606).permutation(resid.values)
    h_s, _ = ts.hurst(shuffled)
    ok = 0.55 < h < 0.75 and abs(h_s - 0.5) <= 0.05
    record("AC-6", ok, f"H={h:.3f}+-{se:.3f}, shuffled H={h_s:.3f}")


# -- AC-7 -------------------------------------------------------------------------

def test_ac7_two_group_structure(default_runs):
    res = default_runs["positive"]
    ids = list(range(1, len(res.targets) + 1))
    ref = cn.two_groups_from_mapping(cn.read_partition(cli.REFERENCE_PARTITION))
    out = cn.analyze_series(list(res.target_valence.T), ids, c0=0.4, reference=ref)
    d, s = out.groups.sizes
    j1, j2, _, _ = out.overlap
    ok = s > 0 and d > s and d + s == len(ids) and 0 <= j1 <= 1 and 0 <= j2 <= 1
    record("AC-7", ok, f"{out.partition.n_communities} communities -> groups {d}/{s} "
                       f"({out.groups.method}), Jaccard vs reference {j1:.3f}/{j2:.3f}")


# -- AC-8 -------------------------------------------------------------------------

def test_ac8_determinism(tmp_path):
    seed_dir = tmp_path / "seed"
    assert cli.main(["simulate", "--out", str(seed_dir)]) == 0
    manifest = str(seed_dir / "manifest.json")
    logs = []
    for name in ("a", "b"):
        assert cli.main(["simulate", "--config", manifest, "--out", str(tmp_path / name)]) == 0
        logs.append((tmp_path / name / "events.tsv").read_bytes())
    ok = logs[0] == logs[1] == (seed_dir / "events.tsv").read_bytes()
    record("AC-8", ok, f"two runs from one manifest: {len(logs[0])} bytes each, "
                       f"identical={logs[0] == logs[1]}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([os.path.abspath(__file__), "-q", "-s"]))
