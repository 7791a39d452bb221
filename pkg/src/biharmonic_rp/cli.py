"""Command-line entry point: ``python -m biharmonic_rp <subcommand> ...``.

Every subcommand reads an experiment config (default: the shipped 2D
reference), writes its artifacts under ``--out`` and a JSON manifest with the
config hash, seeds and library versions.
"""

import argparse
import os
import sys
from pathlib import Path

from . import pipeline
from .config import load_config, reference_config
from .errors import ConfigurationError

THREADS_ENV = "BIHARMONIC_RP_THREADS"


def _default_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="experiment config (JSON); default: shipped 2D reference")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default: the config's 'output')")
    common.add_argument("--seed", type=int, default=None, help="override master_seed")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")

    p = argparse.ArgumentParser(prog="biharmonic_rp",
                                description="Biharmonic backscattering in random media.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="draw and store random fields")
    s.add_argument("--count", type=int, default=None, help="number of fields (default: ensemble size)")

    s = sub.add_parser("forward", parents=[common], help="one dense Lippmann-Schwinger solve")
    s.add_argument("--k", type=float, default=None, help="frequency (default: band lo squared)")
    s.add_argument("--realization", type=int, default=0)

    s = sub.add_parser("sweep", parents=[common], help="backscattering frequency sweep")
    s.add_argument("--mode", choices=["ensemble", "single"], default="ensemble")
    s.add_argument("--count", type=int, default=None, help="realizations")

    s = sub.add_parser("estimate", parents=[common], help="T_hat from a stored sweep")
    s.add_argument("--sweep", type=Path, default=None, help="sweep directory (default: --out)")

    s = sub.add_parser("diagnose", parents=[common], help="Born-term report of a stored sweep")
    s.add_argument("--sweep", type=Path, default=None, help="sweep directory (default: --out)")

    s = sub.add_parser("invert", parents=[common], help="recover mu from a stored T_hat")
    s.add_argument("--estimate", type=Path, default=None,
                   help="directory holding T_hat.csv (default: --out)")
    s.add_argument("--lam", type=float, default=None, help="fixed regularization weight")

    s = sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    s.add_argument("--only", type=int, nargs="+", default=None, metavar="N",
                   help="run only these criteria")
    p.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    return p


def _version():
    from . import __version__

    return __version__


def _load(args):
    cfg = reference_config(2) if args.config is None else load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_overrides(master_seed=args.seed)
    return cfg


def run(argv=None):
    args = build_parser().parse_args(argv)
    threads = args.threads if args.threads is not None else _default_threads()
    try:
        cfg = _load(args)
    except ConfigurationError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else Path(cfg.data.get("output", "runs/default"))
    try:
        if args.command == "synth":
            man = pipeline.stage_synth(cfg, out, args.count, threads)
        elif args.command == "forward":
            man = pipeline.stage_forward(cfg, out, args.k, args.realization)
        elif args.command == "sweep":
            man = pipeline.stage_sweep(cfg, out, args.mode, count=args.count, threads=threads)
        elif args.command == "estimate":
            man = pipeline.stage_estimate(cfg, out, args.sweep)
        elif args.command == "diagnose":
            man = pipeline.stage_diagnose(cfg, out, args.sweep)
        elif args.command == "invert":
            man = pipeline.stage_invert(cfg, out, args.estimate, args.lam)
        else:
            return _validate(cfg, out, args.only, threads)
    except ConfigurationError as err:
        print(f"{args.command}: invalid input: {err}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as err:
        print(f"{args.command} failed: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    print(man)
    return 0


def _validate(cfg, out, only, threads):
    from .acceptance import run_acceptance
    from .io import write_manifest

    results, report = run_acceptance(cfg, out, only, threads,
                                     log=lambda msg: print(msg, flush=True))
    files = [out / "acceptance_report.json"]
    write_manifest(out, "validate", cfg.to_dict(), files, seeds=[cfg.master_seed])
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if report["all_passed"] else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
