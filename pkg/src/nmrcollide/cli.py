"""Command-line sweep runner.

Exit codes: 0 on success, 2 for usage or configuration errors, 3 for I/O
errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .sweep import (
    ConfigError,
    Mode,
    build_config,
    emit_csv,
    emit_svg,
    parse_config_text,
    run_sweep,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

log = logging.getLogger("nmrcollide")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="nmrcollide",
        description="Sweep collision strength and environment correlation; "
        "write the distance change per grid point as CSV and SVG.",
    )
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--eta-min", type=float)
    p.add_argument("--eta-max", type=float)
    p.add_argument("--eta-steps", type=int)
    p.add_argument(
        "--q",
        action="append",
        metavar="Q[,Q...]",
        help="environment correlation(s); repeat or comma-separate",
    )
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--delta-r", type=float, help="Bloch-vector uncertainty")
    p.add_argument("--shots", type=int, help="measurements per Pauli axis (tomography mode)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--svg", help="SVG output path (default: CSV path with .svg suffix)")
    p.add_argument("--no-svg", action="store_true", help="skip the SVG plot")
    p.add_argument("--threshold-rule", choices=["single", "difference"])
    p.add_argument("--perturb", action="store_true", help="add isotropic Bloch errors in tomography mode")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out = {}
    simple = {
        "eta_min": args.eta_min,
        "eta_max": args.eta_max,
        "eta_steps": args.eta_steps,
        "mode": args.mode,
        "delta_r": args.delta_r,
        "shots": args.shots,
        "seed": args.seed,
        "output_path": args.out,
        "threshold_rule": args.threshold_rule,
    }
    for key, value in simple.items():
        if value is not None:
            out[key] = str(value)
    if args.q:
        out["q_values"] = ",".join(args.q)
    if args.perturb:
        out["perturb"] = "true"
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    values = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        try:
            values = parse_config_text(text)
        except ConfigError as exc:
            print(f"error: {args.config}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    values.update(_overrides(args))
    try:
        cfg = build_config(values)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_USAGE

    log.info("sweeping %d points in %s mode", len(cfg.grid()), cfg.mode.value)
    result = run_sweep(cfg, workers=args.workers)
    try:
        csv_path = emit_csv(result)
        log.info("wrote %s", csv_path)
        if not args.no_svg:
            svg_path = emit_svg(result, args.svg)
            log.info("wrote %s", svg_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
