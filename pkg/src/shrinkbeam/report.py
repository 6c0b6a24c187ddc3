"""Delimited output and figure rendering for experiment results.

CSV files follow one fixed schema for every command::

    algorithm,snapshot_or_snr,mean_sinr_db,optimal_sinr_db,steering_cosine,trials

UTF-8, LF line endings, ``.`` decimal separator, floats at 6 significant
digits.  Writing is byte-deterministic for a fixed result, which the
acceptance suite checks end to end.  Alongside each CSV the report path
renders a matplotlib figure of the same curves unless figures are
disabled.
"""

from typing import Iterable, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

CSV_HEADER = "algorithm,snapshot_or_snr,mean_sinr_db,optimal_sinr_db,steering_cosine,trials"

Row = Tuple[str, object, object, object, object, int]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)):
        return str(value)
    return format(float(value), ".6g")


def write_csv(path: str, rows: Iterable[Row]) -> None:
    """Write schema rows byte-deterministically (UTF-8, LF, %.6g floats)."""
    lines = [CSV_HEADER]
    for row in rows:
        if len(row) != 6:
            raise ValueError(f"schema rows carry 6 columns, got {len(row)}")
        lines.append(",".join(_fmt(v) for v in row))
    data = ("\n".join(lines) + "\n").encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(data)


def curve_rows(result, indices: Sequence[int] = None) -> List[Row]:
    """Per-snapshot rows for each algorithm curve (1-based snapshot index)."""
    rows: List[Row] = []
    for name in result.curves:
        curve = result.curves[name]
        n = len(curve.mean_sinr_db)
        idx = range(1, n + 1) if indices is None else indices
        for i in idx:
            if not 1 <= i <= n:
                raise ValueError(f"snapshot index {i} outside 1..{n}")
            rows.append(
                (
                    name,
                    int(i),
                    curve.mean_sinr_db[i - 1],
                    curve.mean_optimal_sinr_db[i - 1],
                    curve.mean_steering_cosine[i - 1],
                    curve.trials,
                )
            )
    return rows


def snr_sweep_rows(points) -> List[Row]:
    """Final-snapshot rows per (snr, result) sweep point."""
    rows: List[Row] = []
    algorithms = []
    for _, result in points:
        for name in result.curves:
            if name not in algorithms:
                algorithms.append(name)
    for name in algorithms:
        for snr, result in points:
            if name not in result.curves:
                continue
            curve = result.curves[name]
            rows.append(
                (
                    name,
                    snr,
                    curve.mean_sinr_db[-1],
                    curve.mean_optimal_sinr_db[-1],
                    curve.mean_steering_cosine[-1],
                    curve.trials,
                )
            )
    return rows


def flops_rows(table) -> List[Row]:
    """Rows for the complexity table; unused stat columns carry zeros."""
    return [(name, m, flops, 0, 0, 0) for name, m, flops in table]


def _style_axes(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, linestyle="--", alpha=0.4)
    ax.legend()


def render_snapshot_curves(result, path: str) -> None:
    """SINR versus snapshot index for each algorithm plus the optimum."""
    fig, ax = plt.subplots(figsize=(7.2, 4.6))
    first = True
    for name, curve in result.curves.items():
        n = len(curve.mean_sinr_db)
        idx = range(1, n + 1)
        ax.plot(idx, curve.mean_sinr_db, label=name, linewidth=1.6)
        if first:
            ax.plot(
                idx,
                curve.mean_optimal_sinr_db,
                "k--",
                label="optimal",
                linewidth=1.1,
            )
            first = False
    _style_axes(ax, "snapshot", "output SINR (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_snr_sweep(points, path: str) -> None:
    """Final-snapshot SINR versus input SNR for each algorithm."""
    fig, ax = plt.subplots(figsize=(7.2, 4.6))
    names = []
    for _, result in points:
        for name in result.curves:
            if name not in names:
                names.append(name)
    for name in names:
        xs = [snr for snr, r in points if name in r.curves]
        ys = [r.curves[name].mean_sinr_db[-1] for _, r in points if name in r.curves]
        ax.plot(xs, ys, marker="o", label=name, linewidth=1.6)
    xs = [snr for snr, _ in points]
    ys = [r.curves[next(iter(r.curves))].mean_optimal_sinr_db[-1] for _, r in points]
    ax.plot(xs, ys, "k--", label="optimal", linewidth=1.1)
    _style_axes(ax, "input SNR (dB)", "output SINR (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_flops(table, path: str) -> None:
    """Flop counts versus sensor count on a log scale."""
    fig, ax = plt.subplots(figsize=(7.2, 4.6))
    by_name = {}
    for name, m, flops in table:
        by_name.setdefault(name, []).append((m, flops))
    for name, pairs in by_name.items():
        pairs.sort()
        ax.semilogy([m for m, _ in pairs], [f for _, f in pairs], marker="o", label=name)
    _style_axes(ax, "sensors M", "flops per snapshot")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
