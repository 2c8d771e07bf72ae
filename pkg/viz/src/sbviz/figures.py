"""Renderers for the four figure kinds.

Every renderer reads CSV artifacts produced by the annealing CLI, checks
the columns it needs, and draws with a pinned style so re-running on the
same inputs yields byte-identical PNGs.  Rows are never dropped: flagged
or non-finite rows abort the figure with a message naming them.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt
import numpy as np

from .recipe import FigureRecipe

# canonical order and colors for level-diagram bands
LEVEL_COLORS = (
    ("solution", "tab:blue"),
    ("excited_solution", "tab:orange"),
    ("spin_error", "tab:red"),
    ("other", "0.6"),
)

_RC = {
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 4.0,
    "legend.fontsize": 8.0,
    "svg.hashsalt": "sbviz",
}


class SchemaError(ValueError):
    """Input table is missing required columns."""


class DataError(ValueError):
    """Input table has rows that cannot be plotted."""


def read_table(path: str | Path, required: tuple[str, ...]) -> dict[str, list[str]]:
    """Load a CSV into per-column string lists, insisting on `required`."""
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"input table not found: {p}")
    with open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{p}: empty file")
    header = rows[0]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{p}: missing columns: {', '.join(missing)} "
                          f"(found: {', '.join(header)})")
    table = {name: [] for name in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError(f"{p}: line {lineno} has {len(row)} cells, "
                              f"header has {len(header)}")
        for name, cell in zip(header, row):
            table[name].append(cell)
    return table


def _floats(table: dict, column: str, path) -> np.ndarray:
    try:
        values = np.array(table[column], dtype=float)
    except ValueError:
        raise DataError(f"{path}: column {column} has non-numeric cells") from None
    if not np.all(np.isfinite(values)):
        bad = [i + 2 for i in np.flatnonzero(~np.isfinite(values))]
        raise DataError(f"{path}: column {column} not finite on "
                        f"lines {bad}")
    return values


def fit_loglog_slope(t_values, p_values, window=None):
    """Least-squares slope of log p against log T, restricted to
    window = (T_lo, T_hi) when given.  Returns (slope, (lo, hi), n_used)."""
    t = np.asarray(t_values, dtype=float)
    p = np.asarray(p_values, dtype=float)
    if window is None:
        lo, hi = float(t.min()), float(t.max())
    else:
        lo, hi = float(window[0]), float(window[1])
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 2:
        raise DataError(f"slope fit needs >= 2 points in T window "
                        f"[{lo:g}, {hi:g}], found {int(mask.sum())}")
    if np.any(p[mask] <= 0):
        raise DataError("slope fit needs positive error values in the window")
    slope = float(np.polyfit(np.log(t[mask]), np.log(p[mask]), 1)[0])
    return slope, (lo, hi), int(mask.sum())


def _save_atomic(fig, output: str) -> Path:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, suffix=".png")
    os.close(fd)
    try:
        # pinned metadata: default would embed the matplotlib version
        fig.savefig(tmp, format="png", metadata={"Software": "sbviz"})
        os.replace(tmp, out)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)
        plt.close(fig)
    return out


def _sweep_series(path: str, label: str):
    """One (name, T, p_error) series per omega group found in a sweep table."""
    table = read_table(path, ("omega", "T", "p_error", "flags"))
    flagged = [i + 2 for i, f in enumerate(table["flags"]) if f]
    if flagged:
        raise DataError(f"{path}: flagged sweep rows on lines {flagged}; "
                        f"refusing to plot a partial sweep")
    omega = _floats(table, "omega", path)
    t = _floats(table, "T", path)
    p = _floats(table, "p_error", path)
    groups = []
    for w in omega[np.sort(np.unique(omega, return_index=True)[1])]:
        mask = omega == w
        order = np.argsort(t[mask], kind="stable")
        name = label if len(np.unique(omega)) == 1 else f"{label} omega={w:g}"
        groups.append((name, t[mask][order], p[mask][order]))
    return groups


def render_error_vs_T(recipe: FigureRecipe) -> dict:
    series = []
    for path, label in zip(recipe.inputs, recipe.series_labels()):
        series.extend(_sweep_series(path, label))

    fig, (ax_lin, ax_log) = plt.subplots(1, 2, figsize=(9.0, 3.6),
                                         constrained_layout=True)
    fits = []
    for name, t, p in series:
        ax_lin.plot(t, p, "o-", label=name)
        ax_log.loglog(t, p, "o-", label=name)
        slope, used, n = fit_loglog_slope(t, p, recipe.fit_window)
        fits.append({"label": name, "slope": slope,
                     "window": list(used), "n_fit": n})
    for ax in (ax_lin, ax_log):
        ax.set_xlabel("T")
        ax.set_ylabel("error probability")
        ax.legend()
    lo, hi = fits[0]["window"]
    note = "\n".join(f"{f['label']}: slope {f['slope']:+.3f}" for f in fits)
    note += f"\nfit window: T in [{lo:g}, {hi:g}]"
    ax_log.text(0.03, 0.03, note, transform=ax_log.transAxes,
                va="bottom", ha="left", fontsize=8,
                bbox={"boxstyle": "round", "facecolor": "white",
                      "alpha": 0.8, "edgecolor": "0.7"})
    out = _save_atomic(fig, recipe.output)
    return {"output": str(out), "fits": fits}


def render_gap_vs_s(recipe: FigureRecipe) -> dict:
    fig, ax = plt.subplots(figsize=(5.4, 4.0), constrained_layout=True)
    counts = []
    for path, label in zip(recipe.inputs, recipe.series_labels()):
        table = read_table(path, ("s", "relevant_gap"))
        s = _floats(table, "s", path)
        gap = _floats(table, "relevant_gap", path)
        order = np.argsort(s, kind="stable")
        ax.plot(s[order], gap[order], "o-", label=label)
        counts.append({"label": label, "points": int(len(s))})
    ax.set_xscale(recipe.scales[0])
    ax.set_yscale(recipe.scales[1])
    ax.set_xlabel("s")
    ax.set_ylabel("relevant gap")
    ax.legend()
    out = _save_atomic(fig, recipe.output)
    return {"output": str(out), "series": counts}


def render_levels(recipe: FigureRecipe) -> dict:
    path = recipe.inputs[0]
    table = read_table(path, ("s", "index", "energy", "label"))
    s = _floats(table, "s", path)
    energy = _floats(table, "energy", path)
    labels = table["label"]
    known = {name for name, _ in LEVEL_COLORS}
    strange = sorted(set(labels) - known)
    if strange:
        raise DataError(f"{path}: unknown level labels: {', '.join(strange)}")

    fig, ax = plt.subplots(figsize=(5.4, 4.0), constrained_layout=True)
    counts = {}
    for name, color in LEVEL_COLORS:
        mask = np.array([lab == name for lab in labels])
        counts[name] = int(mask.sum())
        if counts[name]:
            ax.scatter(s[mask], energy[mask], s=9, color=color,
                       label=name.replace("_", " "))
    ax.set_xscale(recipe.scales[0])
    ax.set_yscale(recipe.scales[1])
    ax.set_xlabel("s")
    ax.set_ylabel("energy")
    ax.legend()
    out = _save_atomic(fig, recipe.output)
    return {"output": str(out), "counts": counts}


def render_fairness(recipe: FigureRecipe) -> dict:
    path = recipe.inputs[0]
    needed = ("lambda", "s_sb", "c", "O_sb", "O_ising", "gap_sb", "gap_ising")
    table = read_table(path, needed)
    col = {name: _floats(table, name, path) for name in needed}
    lam = col["lambda"]

    fig, axes = plt.subplots(2, 2, figsize=(9.0, 6.4),
                             constrained_layout=True, sharex=True)
    (ax_s, ax_c), (ax_o, ax_g) = axes
    ax_s.plot(lam, col["s_sb"], label="mediated s(lambda)")
    ax_s.plot(lam, lam, "--", color="0.4", label="direct s = lambda")
    ax_s.set_ylabel("schedule s")
    ax_c.plot(lam, col["c"], color="tab:green")
    ax_c.set_ylabel("energy rescaling c")
    ax_o.plot(lam, col["O_sb"], label="mediated")
    ax_o.plot(lam, col["O_ising"], "--", label="direct")
    ax_o.set_ylabel("order parameter")
    ax_g.plot(lam, col["gap_sb"], label="mediated")
    ax_g.plot(lam, col["gap_ising"], "--", label="direct")
    ax_g.set_ylabel("relevant gap")
    for ax in (ax_o, ax_g):
        ax.set_xlabel("lambda")
    for ax in (ax_s, ax_o, ax_g):
        ax.legend()
    out = _save_atomic(fig, recipe.output)
    mismatch = float(np.max(np.abs(col["O_sb"] - col["O_ising"])))
    return {"output": str(out), "c_end": float(col["c"][-1]),
            "max_O_mismatch": mismatch}


_RENDERERS = {
    "error_vs_T": render_error_vs_T,
    "gap_vs_s": render_gap_vs_s,
    "levels": render_levels,
    "fairness": render_fairness,
}


def plot(recipe: FigureRecipe) -> dict:
    """Render one recipe; returns a small fact sheet about what was drawn,
    including the fitted slopes for error_vs_T."""
    with matplotlib.rc_context():
        matplotlib.rcdefaults()
        matplotlib.rcParams.update(_RC)
        return _RENDERERS[recipe.kind](recipe)
