"""Command-line entry point: ``rsura {sweep,converge,minEbN0} ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .metrics import BracketError
from .sim import SweepSpec, min_ebn0_search, run_convergence, run_sweep


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with SystemConfig keys")
    common.add_argument("--seed", type=int, help="master RNG seed")
    common.add_argument("--trials", type=int, help="trials per point")
    common.add_argument("--ka", type=int, help="number of active users")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--out", required=True, help="output CSV path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rsura", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="PUPE versus Eb/N0 or Ka")
    sweep.add_argument("--variable", choices=["ebn0_db", "ka"], default="ebn0_db")
    sweep.add_argument("--values", type=_floats, required=True, help="comma-separated grid")
    sweep.add_argument("--genie-detect", action="store_true",
                       help="inject the true active set instead of running SOMP")

    conv = sub.add_parser("converge", parents=[common],
                          help="BER per ESE iteration with genie detection")
    conv.add_argument("--ebn0", type=_floats, required=True, help="comma-separated Eb/N0 list (dB)")
    conv.add_argument("--genie-detect", action="store_true", default=True,
                      help="always on for convergence studies")

    search = sub.add_parser("minEbN0", parents=[common],
                            help="bisection for the Eb/N0 meeting a PUPE target")
    search.add_argument("--target", type=float, default=0.05)
    search.add_argument("--lo", type=float, required=True, help="lower bracket (dB)")
    search.add_argument("--hi", type=float, required=True, help="upper bracket (dB)")
    search.add_argument("--resolution", type=float, default=0.1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, trials=args.trials, ka=args.ka)
    except (OSError, ValueError) as exc:
        print(f"rsura: invalid configuration: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "sweep":
            spec = SweepSpec(args.variable, args.values, cfg.trials, args.out)
            run_sweep(spec, cfg, workers=args.workers, genie_detect=args.genie_detect)
        elif args.command == "converge":
            run_convergence(cfg, args.ebn0, cfg.trials, workers=args.workers, output_path=args.out)
        else:
            best, _ = min_ebn0_search(cfg, args.target, args.lo, args.hi, cfg.trials,
                                      workers=args.workers, resolution=args.resolution,
                                      output_path=args.out)
            print(f"min Eb/N0 for PUPE <= {args.target}: {best:.3f} dB")
    except BracketError as exc:
        print(f"rsura: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"rsura: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
