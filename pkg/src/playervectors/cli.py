"""``playervectors`` command line: one subcommand per pipeline stage plus reports."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline
from .config import ConfigError, Config
from .events import IngestError
from .positions import ClusteringError
from .similarity import ReportError, write_report, write_style_rows_csv
from .store import FingerprintMismatch, MissingArtifact
from .styles import StyleError
from .synth import SynthError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEPENDENCY = 4

log = logging.getLogger("playervectors")


def build_parser():
    p = argparse.ArgumentParser(prog="playervectors", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML config file (defaults apply when omitted)")
    common.add_argument("--force", action="store_true",
                        help="accept upstream artifacts built with a different config")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for stage in pipeline.STAGES:
        sub.add_parser(stage, parents=[common], help=f"run the {stage} stage")
    sub.add_parser("pipeline", parents=[common], help="run every stage in order")
    cmp_ = sub.add_parser("compare", parents=[common], help="comparison report for two players")
    cmp_.add_argument("player_a")
    cmp_.add_argument("player_b")
    cmp_.add_argument("-o", "--out", help="write the JSON report here instead of stdout")
    cmp_.add_argument("--csv", help="also write the per-style rows as CSV")
    sim = sub.add_parser("similar", parents=[common], help="most similar players")
    sim.add_argument("player")
    sim.add_argument("--top", type=int, default=10)
    syn = sub.add_parser("synth", parents=[common], help="generate a synthetic season")
    syn.add_argument("--out", help="directory for events.csv, records.csv and truth.csv "
                                   "(defaults to the configured input paths)")
    syn.add_argument("--seed", type=int, help="override the synth seed stream")
    return p


def _print_silhouettes(meta):
    print("k  silhouette")
    for k, s in sorted(meta["silhouette_by_k"].items(), key=lambda kv: int(kv[0])):
        mark = "  *" if int(k) == meta["k"] else ""
        print(f"{int(k):<2} {s:.4f}{mark}")


def _run(args):
    cfg = Config.load(args.config)
    if args.command == "synth":
        paths, season = pipeline.run_synth(cfg, args.out, args.seed)
        print(f"wrote {len(season.events)} events, {len(season.records)} records")
        for kind, path in paths.items():
            print(f"{kind}: {path}")
        return
    store = pipeline.open_store(cfg)
    if args.command in pipeline.STAGE_FUNCS:
        meta = pipeline.STAGE_FUNCS[args.command](cfg, store, args.force)
        if args.command == "cluster-positions":
            _print_silhouettes(meta)
        print(f"{args.command}: done -> {store.stage_dir(pipeline.STAGE_DIRS[args.command])}")
    elif args.command == "pipeline":
        metas = pipeline.run_pipeline(cfg, store, args.force)
        _print_silhouettes(metas["cluster-positions"])
        print(f"pipeline: done -> {store.root}")
    elif args.command == "compare":
        report = pipeline.compare(cfg, store, args.player_a, args.player_b, args.force)
        if args.out:
            write_report(args.out, report)
        else:
            json.dump(report, sys.stdout, indent=2, sort_keys=True)
            print()
        if args.csv:
            write_style_rows_csv(args.csv, report)
    elif args.command == "similar":
        results, population = pipeline.similar(cfg, store, args.player, args.top, args.force)
        print(f"population {len(population)} players, d_max {population.d_max:.6g}")
        for r in results:
            print(f"{r.player_b}\t{r.manhattan:.6g}\t{r.percent:.2f}%")


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MissingArtifact, FingerprintMismatch) as exc:
        print(f"dependency error: {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    except (IngestError, ClusteringError, StyleError, SynthError, ReportError, KeyError,
            FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"data error: {msg}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
