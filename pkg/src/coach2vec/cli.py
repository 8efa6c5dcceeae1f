"""Command line entry point: ``coach2vec <subcommand> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import nn, pipeline, similarity, synth
from .errors import Coach2VecError
from .model import write_store

log = logging.getLogger("coach2vec")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store", default=None, help=f"directory with events.jsonl/matches.jsonl (env {pipeline.STORE_ENV})")
    p.add_argument("--out", default="coach2vec_out", help="artifact directory")
    p.add_argument("--manifest", default=None, help="take every setting from an existing manifest")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--cluster-seed", type=int, default=0)
    p.add_argument("--train-seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--elbow-k-min", type=int, default=2)
    p.add_argument("--elbow-k-max", type=int, default=15)
    p.add_argument("--min-events", type=int, default=2)
    p.add_argument("--min-duration", type=float, default=0.0)
    p.add_argument("--strict", action="store_true", help="abort on the first malformed record")
    p.add_argument("--epochs", type=int, default=3000)
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--hidden", type=int, default=32, help="hidden layer width")
    p.add_argument("--code", type=int, default=5, help="encoding width")
    p.add_argument("--xg-intercept", type=float, default=-0.3)
    p.add_argument("--xg-per-meter", type=float, default=-0.09)
    p.add_argument("--xg-per-radian", type=float, default=1.8)
    p.add_argument("--workers", type=int, default=1)


def config_from_args(args) -> pipeline.PipelineConfig:
    if args.manifest:
        return pipeline.config_from_manifest(args.manifest, out_dir=args.out, workers=args.workers)
    width = 7 * args.k
    train = nn.TrainConfig(
        epochs=args.epochs, rho=args.rho, eps=args.eps, seed=args.train_seed,
        dims=(width, args.hidden, args.code, args.hidden, width),
    )
    kw = {}
    if args.store is not None:
        kw["store"] = args.store
    return pipeline.PipelineConfig(
        out_dir=args.out, k=args.k, cluster_seed=args.cluster_seed, restarts=args.restarts,
        max_iter=args.max_iter, tol=args.tol, elbow_k_min=args.elbow_k_min, elbow_k_max=args.elbow_k_max,
        min_events=args.min_events, min_duration=args.min_duration, strict=args.strict, train=train,
        xg=pipeline.profiles.XgModelParams(args.xg_intercept, args.xg_per_meter, args.xg_per_radian),
        workers=args.workers, **kw,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coach2vec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", *pipeline.STAGES):
        p = sub.add_parser(name, help="run the whole workflow" if name == "run" else f"run the {name} stage")
        _add_common(p)

    q = sub.add_parser("query", help="nearest coaches to one (coach, team) pair")
    _add_common(q)
    q.add_argument("--coach", required=True)
    q.add_argument("--team", default=None, help="omit to query by coach across teams")
    q.add_argument("--top", type=int, default=5)
    q.add_argument("--csv", default=None, help="also write the ranking to this file")

    s = sub.add_parser("synth", help="generate a synthetic event corpus")
    s.add_argument("--dest", required=True)
    s.add_argument("--coaches-per-archetype", type=int, default=8)
    s.add_argument("--matches-per-coach", type=int, default=30)
    s.add_argument("--possessions-per-match", type=int, default=40)
    s.add_argument("--seed", type=int, default=1)

    # the matrix files are always written; --pairwise also prints the (coach, team) matrix
    sub.choices["report"].add_argument("--pairwise", action="store_true", help="print the pairwise matrix")
    return parser


def _cmd_synth(args) -> int:
    cfg = synth.GeneratorConfig(
        coaches_per_archetype=args.coaches_per_archetype, matches_per_coach=args.matches_per_coach,
        possessions_per_match=args.possessions_per_match, seed=args.seed,
    )
    corpus = synth.generate_corpus(cfg)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    write_store(corpus.store, dest / pipeline.EVENTS_FILE, dest / pipeline.MATCHES_FILE)
    synth.write_ground_truth(dest / "ground_truth.csv", corpus.ground_truth)
    print(f"wrote {len(corpus.store)} events in {len(corpus.store.matches)} matches to {dest}")
    return 0


def _cmd_query(args, cfg) -> int:
    index = pipeline.read_encodings(cfg.out / "encodings.csv")
    key = (args.coach, args.team)
    if args.team is None:
        index = index.by_coach()
        key = (args.coach, "*")
    ranked = similarity.nearest(index, key, args.top)
    for rank, ((coach, team), d) in enumerate(ranked, 1):
        print(f"{rank}\t{coach}\t{team}\t{d:.6f}")
    if args.csv:
        similarity.write_nearest_csv(args.csv, key, ranked)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        cfg = config_from_args(args)
        if args.command == "query":
            return _cmd_query(args, cfg)
        if args.command == "run":
            manifest = pipeline.run_pipeline(cfg)
            print(f"{len(manifest['stages'])} stages complete; manifest at {cfg.out / 'manifest.json'}")
            return 0
        result = pipeline.run_stage(args.command, cfg)
        if args.command == "report" and args.pairwise:
            print((cfg.out / "pairwise.csv").read_text(), end="")
        elif args.command == "elbow":
            for k, s in result:
                print(f"{k}\t{s:.6f}")
        return 0
    except Coach2VecError as exc:
        print(f"coach2vec: error in stage {exc.stage or args.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"coach2vec: error in stage {getattr(exc, 'pipeline_stage', None) or args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
