"""Command-line interface.

Subcommands::

    shrinkbeam run              per-snapshot mean SINR curves
    shrinkbeam sweep-snr        final-snapshot SINR over an input-SNR grid
    shrinkbeam sweep-snapshots  mean SINR at selected snapshot indices
    shrinkbeam flops            analytic complexity table over a sensor grid

Each command reads an optional key-value config file, applies flag
overrides (flags win), writes a CSV and, unless ``--no-figures`` is
given, a PNG figure next to it.  The default worker count can be set
through the ``SHRINKBEAM_WORKERS`` environment variable.
"""

import argparse
import os
import sys

from . import report
from .complexity import flop_table
from .config import ConfigError, RunConfig, apply_overrides, parse_config
from .harness import monte_carlo

FAILURE_QUORUM = 0.10


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="shrinkbeam",
        description="Robust adaptive beamforming experiments (SMI, LOCSME, LOCSME-CG).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-c", "--config", help="key-value config file")
        p.add_argument("-o", "--output", help="output CSV path")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--trials", type=int, help="Monte-Carlo repetitions")
        p.add_argument("--snapshots", type=int, help="snapshots per trial")
        p.add_argument("--snr-db", type=float, dest="snr_db", help="input SNR in dB")
        p.add_argument("--mismatch", choices=["none", "coherent", "incoherent"])
        p.add_argument("--algorithms", help="comma-separated algorithm list")
        p.add_argument("--forgetting", type=float, help="forgetting factor")
        p.add_argument("--step-bound", type=float, dest="step_bound",
                       help="step-size bound constant in [0, 0.5]")
        p.add_argument("--subspace-dim", type=int, dest="subspace_dim",
                       help="sector principal eigenvectors")
        p.add_argument("--steering-mode", choices=["scv-sv", "cg-sv"], dest="steering_mode")
        p.add_argument("--step-rule", choices=["bounded", "subspace"], dest="step_rule")
        p.add_argument("--workers", type=int, help="parallel trial workers")

    p_run = sub.add_parser("run", help="per-snapshot mean curves")
    common(p_run)

    p_snr = sub.add_parser("sweep-snr", help="final SINR over an SNR grid")
    common(p_snr)
    p_snr.add_argument("--snr-grid", dest="snr_grid",
                       help="comma-separated SNR grid in dB (default -10..30 step 5)")

    p_snap = sub.add_parser("sweep-snapshots", help="SINR at chosen snapshot indices")
    common(p_snap)
    p_snap.add_argument("--snapshot-grid", dest="snapshot_grid",
                        help="comma-separated snapshot indices")

    p_flops = sub.add_parser("flops", help="analytic complexity table")
    common(p_flops)
    p_flops.add_argument("--sensor-grid", dest="sensor_grid",
                         help="comma-separated sensor counts")
    return parser


def _load_config(args) -> RunConfig:
    config = parse_config(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("seed", "trials", "snapshots", "snr_db", "mismatch", "forgetting",
                "step_bound", "subspace_dim", "steering_mode", "step_rule",
                "workers", "output"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "algorithms", None):
        overrides["algorithms"] = tuple(
            v.strip().upper() for v in args.algorithms.split(",") if v.strip()
        )
    for key in ("snr_grid", "snapshot_grid", "sensor_grid"):
        raw = getattr(args, key, None)
        if raw:
            caster = float if key == "snr_grid" else int
            overrides[key] = tuple(caster(v.strip()) for v in raw.split(",") if v.strip())
    if "workers" not in overrides and "SHRINKBEAM_WORKERS" in os.environ:
        overrides["workers"] = int(os.environ["SHRINKBEAM_WORKERS"])
    return apply_overrides(config, overrides).validate()


def _default_output(command: str) -> str:
    return {
        "run": "curves.csv",
        "sweep-snr": "snr_sweep.csv",
        "sweep-snapshots": "snapshot_sweep.csv",
        "flops": "flops.csv",
    }[command]


def _check_quorum(results) -> None:
    for result in results:
        if result.failure_fraction > FAILURE_QUORUM:
            failed = len(result.failures)
            raise RuntimeError(
                f"{failed} trial runs failed "
                f"({100 * result.failure_fraction:.0f}% > {100 * FAILURE_QUORUM:.0f}% quorum); "
                f"first: {result.failures[0][2] if result.failures else ''}"
            )


def _figure_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".png"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = config.output or _default_output(args.command)
    settings = config.beamformer_settings()
    try:
        if args.command == "run":
            result = monte_carlo(
                config.scenario(), config.algorithms, config.trials,
                settings=settings, workers=config.workers,
            )
            _check_quorum([result])
            report.write_csv(out, report.curve_rows(result))
            if not args.no_figures:
                report.render_snapshot_curves(result, _figure_path(out))
        elif args.command == "sweep-snapshots":
            result = monte_carlo(
                config.scenario(), config.algorithms, config.trials,
                settings=settings, workers=config.workers,
            )
            _check_quorum([result])
            report.write_csv(out, report.curve_rows(result, config.snapshot_grid))
            if not args.no_figures:
                report.render_snapshot_curves(result, _figure_path(out))
        elif args.command == "sweep-snr":
            points = []
            for snr in config.snr_grid:
                result = monte_carlo(
                    config.scenario(snr_db=snr), config.algorithms, config.trials,
                    settings=settings, workers=config.workers,
                )
                points.append((snr, result))
            _check_quorum([r for _, r in points])
            report.write_csv(out, report.snr_sweep_rows(points))
            if not args.no_figures:
                report.render_snr_sweep(points, _figure_path(out))
        elif args.command == "flops":
            table = flop_table(config.sensor_grid)
            report.write_csv(out, report.flops_rows(table))
            if not args.no_figures:
                report.render_flops(table, _figure_path(out))
        else:  # pragma: no cover - argparse enforces the choices
            raise RuntimeError(f"unhandled command {args.command}")
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
