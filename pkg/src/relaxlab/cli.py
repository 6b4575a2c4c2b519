"""Command-line front end: run single experiments, eps sweeps, rate checks,
and a quick self-check of the spectral operators."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import default_config, parse_config, serialize_config
from .errors import RelaxLabError
from .reporting import (
    emit_csv,
    emit_json,
    emit_plotscript,
    render_figures,
    summary_text,
)
from .runner import assert_rates, eps_sweep, run_experiment


def _load_config(args):
    if args.config:
        cfg = parse_config(args.config)
    else:
        cfg = default_config(args.system)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg.validate()


def _emit(report, out_dir, figures=True):
    os.makedirs(out_dir, exist_ok=True)
    emit_csv(report, os.path.join(out_dir, "sweep.csv"))
    emit_json(report, os.path.join(out_dir, "sweep.json"))
    emit_plotscript(report, os.path.join(out_dir, "plot_rates.py"))
    if figures:
        render_figures(report, out_dir)


def _common_flags(sub):
    sub.add_argument("--config", help="path to a key = value config file")
    sub.add_argument("--system", default="euler", choices=["euler", "em"],
                     help="experiment family when no config file is given")
    sub.add_argument("--out-dir", default="out", help="report output directory")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker processes for the ladder rungs")
    sub.add_argument("--seed", type=int, default=None, help="override the data seed")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip matplotlib figure rendering")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    report = run_experiment(cfg, eps=args.eps, threads=args.threads)
    _emit(report, args.out_dir, figures=not args.no_figures)
    sys.stdout.write(summary_text(report))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    report = eps_sweep(cfg, threads=args.threads)
    _emit(report, args.out_dir, figures=not args.no_figures)
    sys.stdout.write(summary_text(report))
    if args.assert_rates:
        checks = assert_rates(report)
        if not checks or not all(c.passed for c in checks):
            return 1
    return 0


def cmd_rates(args) -> int:
    cfg = _load_config(args)
    report = eps_sweep(cfg, threads=args.threads)
    _emit(report, args.out_dir, figures=not args.no_figures)
    sys.stdout.write(summary_text(report))
    checks = assert_rates(report)
    return 0 if checks and all(c.passed for c in checks) else 1


def cmd_check(args) -> int:
    """Fast spectral-operator sanity check on a small grid."""
    from .spectral import (
        Grid,
        ScalarField,
        divergence,
        gradient,
        l2_norm,
        laplacian,
        sobolev_norm,
    )

    grid = Grid(args.d, 64)
    x = grid.nodes()[0]
    f = ScalarField(grid, np.cos(x) + np.zeros(grid.shape))
    worst = 0.0
    worst = max(worst, l2_norm(divergence(gradient(f)) - laplacian(f)))
    worst = max(worst, abs(l2_norm(f) ** 2 - np.pi * (2 * np.pi) ** (args.d - 1)))
    worst = max(worst, abs(sobolev_norm(f, 1) ** 2 - 2 * np.pi * (2 * np.pi) ** (args.d - 1)))
    ok = worst < 1e-10
    print(f"operator self-check (d={args.d}): worst residual {worst:.3e} "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_show_config(args) -> int:
    cfg = default_config(args.system)
    sys.stdout.write(serialize_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxlab",
        description="Pseudospectral relaxation-limit laboratory: stiff Euler and "
                    "Euler-Maxwell sweeps against their parabolic limits.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run a single ladder rung")
    _common_flags(p_run)
    p_run.add_argument("--eps", type=float, default=None,
                       help="relaxation parameter (default: top of the ladder)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = subs.add_parser("sweep", help="run the full eps ladder")
    _common_flags(p_sweep)
    p_sweep.add_argument("--assert-rates", action="store_true",
                         help="exit nonzero unless fitted slopes sit in the bands")
    p_sweep.set_defaults(func=cmd_sweep)

    p_rates = subs.add_parser("rates", help="sweep and enforce the slope bands")
    _common_flags(p_rates)
    p_rates.set_defaults(func=cmd_rates)

    p_check = subs.add_parser("check", help="spectral operator self-check")
    p_check.add_argument("--d", type=int, default=1, choices=[1, 2, 3])
    p_check.set_defaults(func=cmd_check)

    p_show = subs.add_parser("show-config", help="print the default config")
    p_show.add_argument("--system", default="euler", choices=["euler", "em"])
    p_show.set_defaults(func=cmd_show_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RelaxLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
