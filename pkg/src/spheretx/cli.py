"""Command-line entry point: ``spheretx <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 quadrature did not converge,
4 file system error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .config import ExperimentConfig, load_config
from .errors import (
    ConvergenceError,
    EmptyCurveError,
    GridMismatchError,
    ParseError,
    SpecError,
)
from .experiment import ExperimentResult, run_experiment
from .presets import FIGURES, load_preset

log = logging.getLogger("spheretx")

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_IO = 0, 2, 3, 4


def _common(parser: argparse.ArgumentParser, needs_config: bool = True) -> None:
    if needs_config:
        parser.add_argument("--config", required=True, help="experiment file")
    parser.add_argument("--out", help="output CSV (a directory for reproduce)")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--realizations", type=int, help="override the realization count")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for the simulator")
    parser.add_argument("--quiet", action="store_true", help="no progress messages")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spheretx",
        description="Impulse responses of spherical transmitters: analytic curves and particle simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("analytic", help="analytic curves only"))
    _common(sub.add_parser("simulate", help="particle simulation plus analytic reference"))
    _common(sub.add_parser("deviate", help="percent deviation of the point-transmitter curve"))
    _common(sub.add_parser("compare", help="simulate and report agreement with the analytic curve"))
    rep = sub.add_parser("reproduce", help="run every experiment of a figure preset")
    rep.add_argument("figure", choices=FIGURES)
    _common(rep, needs_config=False)
    return parser


def _analytic_only(cfg: ExperimentConfig) -> ExperimentConfig:
    outputs = tuple(c for c in cfg.outputs if c != "simulated") or ("volume_analytic", "pta")
    return replace(cfg, outputs=outputs)


def _with_simulation(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.sim is None:
        raise ParseError(f"{cfg.name or 'config'}: this command needs a [simulation] section")
    outputs = list(cfg.outputs)
    for curve in ("simulated", "volume_analytic"):
        if curve not in outputs:
            outputs.append(curve)
    return replace(cfg, outputs=tuple(outputs))


def _deviation_only(cfg: ExperimentConfig) -> ExperimentConfig:
    return replace(cfg, outputs=("volume_analytic", "pta", "deviation"), normalize=False)


SHAPERS = {
    "analytic": _analytic_only,
    "simulate": _with_simulation,
    "compare": _with_simulation,
    "deviate": _deviation_only,
}


def _jobs(args) -> List[Tuple[ExperimentConfig, Path]]:
    if args.command == "reproduce":
        out_dir = Path(args.out or Path("results") / args.figure)
        return [(cfg, out_dir / f"{stem}.csv") for stem, cfg in load_preset(args.figure)]
    cfg = SHAPERS[args.command](load_config(args.config))
    out = args.out or cfg.output_path or f"{cfg.name}.csv"
    return [(cfg, Path(out))]


def _report(result: ExperimentResult) -> str:
    rep = result.report
    if rep is None:
        return ""
    return (f"{result.config.name}: {rep.fraction_within:.1%} of {rep.points_considered} points "
            f"within {rep.k:g} SE, max relative error {rep.max_rel_error:.3g}")


def run(args) -> int:
    jobs = _jobs(args)
    results = []
    # compute everything first so a failure leaves no partial output
    for cfg, path in jobs:
        cfg = cfg.with_overrides(seed=args.seed, realizations=args.realizations)
        log.info("running %s", cfg.name or path.stem)
        results.append((run_experiment(cfg, threads=max(1, args.threads)), path))
    for result, path in results:
        csv_path, summary_path = result.write(path)
        log.info("wrote %s and %s", csv_path, summary_path)
        if args.command == "compare":
            print(_report(result))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        return run(args)
    except (ParseError, SpecError, GridMismatchError, EmptyCurveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
