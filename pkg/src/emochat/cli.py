"""Command line front end: ``emochat simulate | analyze | corrnet | report``.

Every run is driven by one config file; flags only override config keys.
Outputs are tab-separated text with headers plus a JSON manifest, and a
manifest can be fed back to ``simulate --config`` to redo the run.

Exit codes: 0 success, 1 invalid input/config, 2 runtime failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import os
import platform
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from . import analysis, config as cfgmod, corrnet, eventlog
from .botengine import BotTableError
from .corrnet import CorrnetError
from .eventlog import LogFormatError
from .population import DistributionError
from .simulator import BOT_ID, ConfigError, SimResult, run
from .tsanalysis import InsufficientDataError

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("emochat")

REFERENCE_PARTITION = os.path.join(os.path.dirname(__file__), "data", "reference_groups.tsv")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest(rc: cfgmod.RunConfig, out_dir: str, files: Sequence[str], command: str) -> Dict:
    return {
        "format": cfgmod.MANIFEST_FORMAT,
        "command": command,
        "config": rc.to_dict(),
        "seed": rc.seed,
        "versions": {"emochat": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "files": {f: _sha256(os.path.join(out_dir, f)) for f in files},
    }


def _load_config(path: Optional[str]) -> cfgmod.RunConfig:
    if path is None:
        return cfgmod.from_dict({})
    return cfgmod.load(path)


# -- simulate -----------------------------------------------------------------------

def write_run(res: SimResult, out_dir: str) -> List[str]:
    """Write the log, network, population and target series of one run."""
    os.makedirs(out_dir, exist_ok=True)
    p = lambda f: os.path.join(out_dir, f)  # noqa: E731
    eventlog.write_log(res.log, p("events.tsv"))
    with open(p("network.tsv"), "w", encoding="utf-8") as fh:
        fh.write("sender\trecipient\tcount\n")
        for (s, r), c in sorted(res.network.edges.items()):
            fh.write(f"{eventlog._endpoint(s)}\t{eventlog._endpoint(r)}\t{c}\n")
    with open(p("population.tsv"), "w", encoding="utf-8") as fh:
        fh.write("tick\tagents\n")
        for t, n in enumerate(res.network.population):
            fh.write(f"{t}\t{n}\n")
    with open(p("targets.tsv"), "w", encoding="utf-8") as fh:
        fh.write("row\tagent\tmoderator\n")
        for j, a in enumerate(res.targets, start=1):
            fh.write(f"{j}\t{a}\t{int(res.profiles[a].is_moderator)}\n")
    # per-tick valence of the Bot's targets, one column per table row
    rows = list(range(1, len(res.targets) + 1))
    corrnet.write_series_table(p("target_valence.tsv"), rows, res.target_valence.T)
    return ["events.tsv", "network.tsv", "population.tsv", "targets.tsv", "target_valence.tsv"]


def cmd_simulate(args) -> int:
    rc = _load_config(args.config)
    rc = cfgmod.with_overrides(rc, **{"sim.seed": args.seed, "sim.ticks": args.ticks,
                                      "bot.profile": args.profile})
    out = args.out or rc.out
    res = run(rc.sim)
    files = write_run(res, out)
    rc.raw["out"] = out
    analysis.dump_json(os.path.join(out, "manifest.json"), _manifest(rc, out, files, "simulate"))
    logger.info("simulate: %d messages over %d ticks -> %s", len(res.log), rc.sim.ticks, out)
    return EXIT_OK


# -- analyze ------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    rc = _load_config(args.config)
    log = eventlog.read_log(args.log)
    n_ticks = args.ticks or (rc.sim.ticks if args.config else eventlog.n_ticks(log))
    if log and log[-1].tick >= n_ticks:
        raise CliError(f"log reaches tick {log[-1].tick} but only {n_ticks} ticks requested",
                       EXIT_VALIDATION)
    res = analysis.analyze_log(log, n_ticks, rc.analysis, rc.sim.map.eps)
    out = args.out or os.path.join(rc.out, "analysis")
    files = analysis.write_tables(res, out)
    logger.info("analyze: wrote %d files to %s", len(files), out)
    return EXIT_OK


# -- corrnet ------------------------------------------------------------------------

def run_corrnet(series_path: str, c: Dict, out: str, reference: Optional[str],
                optional_reference: bool = False) -> Dict:
    """Full correlation-network chain on one series file.

    With ``optional_reference`` a reference whose ids do not match the series
    is skipped with a warning (used for the bundled default) instead of failing.
    """
    ids, series = corrnet.read_series_table(series_path)
    ref = None
    if reference:
        ref = corrnet.two_groups_from_mapping(corrnet.read_partition(reference))
        if optional_reference and set(ref.as_dict()) != set(ids):
            logger.warning("reference %s does not cover the %d series ids; "
                           "skipping the overlap report", reference, len(ids))
            ref = None
    res = corrnet.analyze_series(series, ids, c0=c["c0"], use_filter=c["filter"],
                                 resolution=c["resolution"], restarts=c["restarts"],
                                 seed=c["seed"], reference=ref)
    os.makedirs(out, exist_ok=True)
    corrnet.write_matrix(os.path.join(out, "correlation.tsv"), res.raw, ids)
    corrnet.write_matrix(os.path.join(out, "filtered.tsv"), res.matrix, ids)
    corrnet.write_edges(os.path.join(out, "edges.tsv"), res.graph)
    corrnet.write_partition(os.path.join(out, "communities.tsv"), res.partition.as_dict())
    corrnet.write_partition(os.path.join(out, "groups.tsv"), res.groups.as_dict())
    summary = {
        "n_nodes": len(ids), "n_edges": len(res.graph.edges()),
        "n_communities": res.partition.n_communities, "modularity": res.partition.modularity,
        "group_sizes": list(res.groups.sizes), "coarse_resolution": res.groups.resolution,
        "coarse_method": res.groups.method, "settings": res.settings,
    }
    if res.overlap is not None:
        corrnet.write_overlap_report(os.path.join(out, "overlap.tsv"), res.overlap,
                                     res.groups, ref)
        j1, j2, d1, d2 = res.overlap
        summary["overlap"] = {"jaccard_dominant": j1, "jaccard_subdominant": j2,
                              "d_dominant": d1, "d_subdominant": d2,
                              "reference": os.path.abspath(reference)}
    analysis.dump_json(os.path.join(out, "corrnet.json"), summary)
    return summary


def cmd_corrnet(args) -> int:
    rc = _load_config(args.config)
    c = dict(rc.corrnet)
    if args.c0 is not None:
        c["c0"] = args.c0
    if args.no_filter:
        c["filter"] = False
    reference = args.reference or c.get("reference")
    fallback = reference is None and not args.no_reference
    if fallback:
        reference = REFERENCE_PARTITION
    out = args.out or os.path.join(rc.out, "corrnet")
    summary = run_corrnet(args.series, c, out, reference, optional_reference=fallback)
    logger.info("corrnet: %d nodes, groups %s -> %s", summary["n_nodes"],
                summary["group_sizes"], out)
    return EXIT_OK


# -- report -------------------------------------------------------------------------

def cmd_report(args) -> int:
    """simulate + analyze + corrnet into one bundle with a single manifest."""
    rc = _load_config(args.config)
    rc = cfgmod.with_overrides(rc, **{"sim.seed": args.seed, "bot.profile": args.profile})
    out = args.out or rc.out
    res = run(rc.sim)
    files = write_run(res, out)
    an = analysis.analyze_log(res.log, rc.sim.ticks, rc.analysis, rc.sim.map.eps)
    files += [os.path.join("analysis", f)
              for f in analysis.write_tables(an, os.path.join(out, "analysis"))]
    reference = rc.corrnet.get("reference")
    run_corrnet(os.path.join(out, "target_valence.tsv"), rc.corrnet,
                os.path.join(out, "corrnet"), reference or REFERENCE_PARTITION,
                optional_reference=reference is None)
    files += [os.path.join("corrnet", f) for f in sorted(os.listdir(os.path.join(out, "corrnet")))]
    rc.raw["out"] = out
    analysis.dump_json(os.path.join(out, "manifest.json"), _manifest(rc, out, files, "report"))
    logger.info("report: bundle with %d files in %s", len(files), out)
    return EXIT_OK


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emochat", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"emochat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run the agent model and write its event log")
    s.add_argument("--config", help="TOML/JSON config or a manifest.json")
    s.add_argument("--out", help="output directory (default: config 'out')")
    s.add_argument("--seed", type=int)
    s.add_argument("--ticks", type=int)
    s.add_argument("--profile", choices=("positive", "negative", "neutral"))
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="charge, fluctuation, spectrum and avalanche tables")
    a.add_argument("--log", required=True, help="events.tsv written by simulate")
    a.add_argument("--config")
    a.add_argument("--out")
    a.add_argument("--ticks", type=int, help="series length (default: from config or log)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("corrnet", help="correlation network, communities and overlaps")
    c.add_argument("--series", required=True, help="per-node series (wide or long TSV)")
    c.add_argument("--config")
    c.add_argument("--out")
    c.add_argument("--reference", help="two-group partition file to compare against")
    c.add_argument("--no-reference", action="store_true",
                   help="skip the overlap report when no reference is configured")
    c.add_argument("--c0", type=float)
    c.add_argument("--no-filter", action="store_true")
    c.set_defaults(func=cmd_corrnet)

    r = sub.add_parser("report", help="simulate, analyze and corrnet in one bundle")
    r.add_argument("--config")
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--profile", choices=("positive", "negative", "neutral"))
    r.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, DistributionError, BotTableError, LogFormatError, CorrnetError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InsufficientDataError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
