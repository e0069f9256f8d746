"""Render the three report figure kinds from residual-suite CSVs.

Input rows come from the harness suite CSV (columns curve, q, a_q, resid1,
resid2, ...).  Rendering never touches the input file and is deterministic:
fixed geometry, no timestamps in the output metadata, so re-rendering the
same CSV reproduces the same bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("hist_overlay", "scatter_q", "grid_by_aq")
REQUIRED_COLUMNS = ("curve", "q", "a_q", "resid1", "resid2")
DEFAULT_GRID_VALUES = (-20, -9, -6, -4, -3, -2, -1, 0, 1, 2, 3, 4, 6, 9, 20)
SAVE_OPTS = {"dpi": 100, "metadata": {"Software": None}}


class SchemaError(ValueError):
    """The CSV is missing columns the renderer needs."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_csv: str | Path
    output: str | Path
    bin_width: float = 0.0002
    q_range: tuple[int, int] = (2, 500)
    grid_values: tuple[int, ...] = DEFAULT_GRID_VALUES
    clip: tuple[float, float] = (-0.02, 0.02)
    column: str = "resid1"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.grid_values:
            raise SchemaError("the a_q grid needs a nonempty value list")
        if self.bin_width <= 0:
            raise SchemaError("bin width must be positive")


@dataclass
class Row:
    curve: str
    q: int
    a_q: int
    resid1: float
    resid2: float


def load_rows(path: str | Path) -> list[Row]:
    """Parse the suite CSV; rows with empty residuals (undefined empirical
    ratio) are skipped."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{path} is missing columns {missing}; expected at least "
                f"{list(REQUIRED_COLUMNS)}"
            )
        rows = []
        for rec in reader:
            if not rec["resid1"] or not rec["resid2"]:
                continue
            rows.append(
                Row(
                    curve=rec["curve"],
                    q=int(rec["q"]),
                    a_q=int(rec["a_q"]),
                    resid1=float(rec["resid1"]),
                    resid2=float(rec["resid2"]),
                )
            )
    return rows


def build_figure(spec: FigureSpec):
    """(figure, info) for the requested kind; info carries the counts the
    tests introspect."""
    rows = load_rows(spec.input_csv)
    rows = [r for r in rows if spec.q_range[0] <= r.q < spec.q_range[1]]
    if spec.kind == "hist_overlay":
        return _hist_overlay(spec, rows)
    if spec.kind == "scatter_q":
        return _scatter_q(spec, rows)
    return _grid_by_aq(spec, rows)


def render(spec: FigureSpec) -> Path:
    fig, _ = build_figure(spec)
    out = Path(spec.output)
    fig.savefig(out, **SAVE_OPTS)
    plt.close(fig)
    return out


def _hist_overlay(spec: FigureSpec, rows):
    lo, hi = spec.clip
    edges = np.arange(lo, hi + spec.bin_width / 2, spec.bin_width)
    r1 = [r.resid1 for r in rows if lo <= r.resid1 <= hi]
    r2 = [r.resid2 for r in rows if lo <= r.resid2 <= hi]
    fig, ax = plt.subplots(figsize=(8, 5))
    counts = {}
    for label, values, color in (
        ("first order", r1, "tab:blue"),
        ("second order", r2, "tab:orange"),
    ):
        n, _, _ = ax.hist(
            values, bins=edges, histtype="step", linewidth=1.5, label=label, color=color
        )
        counts[label] = int(np.sum(n))
    ax.set_xlabel("empirical ratio minus prediction")
    ax.set_ylabel(f"datasets per bin (width {spec.bin_width:g})")
    ax.legend(loc="upper right")
    ax.set_xlim(lo, hi)
    return fig, {"counts": counts, "n_rows": len(rows)}


def _scatter_q(spec: FigureSpec, rows):
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    qs = [r.q for r in rows]
    ax1.scatter(qs, [r.resid1 for r in rows], s=9, color="black")
    ax2.scatter(qs, [r.resid2 for r in rows], s=9, color="black")
    for ax, label in ((ax1, "first order"), (ax2, "second order")):
        ax.axhline(0.0, linewidth=0.6, color="gray")
        ax.set_ylabel(f"residual ({label})")
    ax2.set_xlabel("q")
    ax1.set_xlim(spec.q_range[0] - 1, spec.q_range[1])
    return fig, {"points": len(rows)}


def _grid_by_aq(spec: FigureSpec, rows):
    # one facet per a_q value present in the data (ascending), so every point
    # lands in exactly one facet; grid_values is the canonical panel list and
    # is kept for validation/reference, not as a filter
    values = sorted({r.a_q for r in rows})
    ncols = 3
    nrows = max(1, -(-max(len(values), 1) // ncols))
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.4 * nrows), squeeze=False,
        sharex=True,
    )
    per_facet = {}
    attr = spec.column
    for i, n in enumerate(values):
        ax = axes[i // ncols][i % ncols]
        sub = [r for r in rows if r.a_q == n]
        ax.scatter([r.q for r in sub], [getattr(r, attr) for r in sub], s=8, color="black")
        ax.axhline(0.0, linewidth=0.6, color="gray")
        ax.set_title(f"a_q = {n}", fontsize=9)
        per_facet[n] = len(sub)
    for j in range(len(values), nrows * ncols):
        axes[j // ncols][j % ncols].set_axis_off()
    fig.supxlabel("q")
    fig.supylabel(f"{attr} by a_q")
    fig.tight_layout()
    return fig, {"facets": values, "per_facet": per_facet, "n_rows": len(rows)}
