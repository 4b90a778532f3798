"""Static figures from the CSV outputs of the protocols.

The figure kind is inferred from the CSV header, so ``emit_plots`` can be
pointed at any mix of learning curves, trajectories, metric series and
histograms.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = {
    ("generation", "mean", "max", "best_so_far"): "learning_curve",
    ("t", "robot_id", "x", "y", "heading", "light_raw"): "trajectory",
    ("bin_left", "bin_right", "count"): "histogram",
    ("tau", "c_bar"): "series",
    ("t", "std"): "series",
    ("t", "light"): "series",
}


class PlotError(ValueError):
    pass


def read_csv(path):
    """Return (kind, header, float rows); malformed rows raise PlotError."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise PlotError(f"{path}: empty file, no header") from None
        kind = KINDS.get(header)
        if kind is None:
            raise PlotError(f"{path}: unrecognised header {list(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise PlotError(f"{path}: row {lineno} has {len(row)} fields, "
                                f"expected {len(header)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise PlotError(f"{path}: row {lineno} has a non-numeric value") from None
    data = np.array(rows, dtype=np.float64).reshape(-1, len(header))
    return kind, header, data


def _learning_curve(ax, header, data):
    if len(data):
        ax.plot(data[:, 0], data[:, 1], label="mean")
        ax.plot(data[:, 0], data[:, 2], ".", label="max")
        ax.plot(data[:, 0], data[:, 3], "--", label="best so far")
        ax.legend()
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")


def _trajectory(ax, header, data):
    if len(data):
        for rid in np.unique(data[:, 1]):
            sel = data[data[:, 1] == rid]
            ax.plot(sel[:, 2], sel[:, 3], lw=0.6)
            ax.plot(sel[0, 2], sel[0, 3], "g^", ms=4)
            ax.plot(sel[-1, 2], sel[-1, 3], "y*", ms=6)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def _histogram(ax, header, data):
    if len(data):
        ax.bar(data[:, 0], data[:, 2], width=data[:, 1] - data[:, 0], align="edge")
    ax.set_xlabel("weight")
    ax.set_ylabel("count")


def _series(ax, header, data):
    if len(data):
        ax.plot(data[:, 0], data[:, 1])
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])


_DRAW = {"learning_curve": _learning_curve, "trajectory": _trajectory,
         "histogram": _histogram, "series": _series}


def emit_plots(csv_paths, out_dir, fmt="png"):
    """Render one image per CSV into ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for path in csv_paths:
        kind, header, data = read_csv(path)
        fig, ax = plt.subplots(figsize=(5, 4))
        _DRAW[kind](ax, header, data)
        ax.set_title(Path(path).stem)
        target = out / f"{Path(path).stem}.{fmt}"
        fig.tight_layout()
        fig.savefig(target)
        plt.close(fig)
        written.append(target)
    return written
