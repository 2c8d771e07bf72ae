"""Figure recipes: a small JSON schema naming input tables, the figure
kind, and where the image goes.

A recipe never carries style knobs beyond axis scales; fonts, colors and
layout are fixed in the renderers so identical inputs give identical
images.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

KINDS = ("error_vs_T", "gap_vs_s", "levels", "fairness")

# kinds whose layout is a single pair of axes; only these accept "scales"
_SCALABLE = ("gap_vs_s", "levels")
# kinds that plot one run's table and cannot compose several files
_SINGLE_INPUT = ("levels", "fairness")

_KEYS = {"kind", "inputs", "output", "labels", "scales", "fit_window"}


class RecipeError(ValueError):
    """Invalid or inconsistent figure recipe."""


@dataclass(frozen=True)
class FigureRecipe:
    """One figure: which CSVs to read, what to draw, where to write it.

    inputs      CSV paths, one series (or series group) per file
    kind        one of KINDS
    output      target image path, .png
    labels      optional per-input legend labels; derived from paths if absent
    scales      optional {"x": ..., "y": ...} with "linear" or "log";
                only meaningful for single-axes kinds (gap_vs_s, levels)
    fit_window  [T_lo, T_hi] for the log-log slope fit; error_vs_T only,
                defaults to the full T range of each series
    """

    kind: str
    inputs: tuple[str, ...]
    output: str
    labels: tuple[str, ...] | None = None
    scales: tuple[str, str] = ("linear", "linear")
    fit_window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RecipeError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise RecipeError("recipe needs at least one input CSV")
        if any(not isinstance(p, str) or not p for p in self.inputs):
            raise RecipeError("inputs must be non-empty path strings")
        if self.kind in _SINGLE_INPUT and len(self.inputs) != 1:
            raise RecipeError(f"{self.kind} takes exactly one input table, "
                              f"got {len(self.inputs)}")
        if not isinstance(self.output, str) or not self.output.endswith(".png"):
            raise RecipeError("output must be a .png path")
        if self.labels is not None and len(self.labels) != len(self.inputs):
            raise RecipeError("labels must match inputs one to one")
        for axis, scale in zip("xy", self.scales):
            if scale not in ("linear", "log"):
                raise RecipeError(f"{axis} scale must be linear or log, "
                                  f"got {scale!r}")
        if self.fit_window is not None:
            if self.kind != "error_vs_T":
                raise RecipeError("fit_window only applies to error_vs_T")
            lo, hi = self.fit_window
            if not (0 < lo < hi):
                raise RecipeError(f"fit_window must satisfy 0 < lo < hi, "
                                  f"got [{lo}, {hi}]")

    def series_labels(self) -> tuple[str, ...]:
        """Legend labels: explicit ones, else the input's parent directory
        name (artifact files all share generic basenames)."""
        if self.labels is not None:
            return self.labels
        derived = []
        for p in self.inputs:
            parent = Path(p).parent.name
            derived.append(parent if parent else Path(p).stem)
        return tuple(derived)


def from_json_dict(payload: dict) -> FigureRecipe:
    if not isinstance(payload, dict):
        raise RecipeError("recipe must be a JSON object")
    unknown = set(payload) - _KEYS
    if unknown:
        raise RecipeError(f"unknown recipe keys: {', '.join(sorted(unknown))}")
    missing = {"kind", "inputs", "output"} - set(payload)
    if missing:
        raise RecipeError(f"missing recipe keys: {', '.join(sorted(missing))}")

    inputs = payload["inputs"]
    if isinstance(inputs, str):
        inputs = [inputs]
    if not isinstance(inputs, list):
        raise RecipeError("inputs must be a path or a list of paths")

    labels = payload.get("labels")
    if labels is not None:
        if (not isinstance(labels, list)
                or any(not isinstance(x, str) for x in labels)):
            raise RecipeError("labels must be a list of strings")
        labels = tuple(labels)

    scales_raw = payload.get("scales")
    if scales_raw is None:
        scales = ("linear", "linear")
    else:
        if payload["kind"] not in _SCALABLE:
            raise RecipeError(f"scales not accepted for "
                              f"{payload['kind']}; its layout is fixed")
        if (not isinstance(scales_raw, dict)
                or set(scales_raw) - {"x", "y"}):
            raise RecipeError('scales must be {"x": ..., "y": ...}')
        scales = (scales_raw.get("x", "linear"), scales_raw.get("y", "linear"))

    window = payload.get("fit_window")
    if window is not None:
        if (not isinstance(window, list) or len(window) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float))
                       for v in window)):
            raise RecipeError("fit_window must be [T_lo, T_hi]")
        window = (float(window[0]), float(window[1]))

    return FigureRecipe(kind=payload["kind"], inputs=tuple(inputs),
                        output=payload["output"], labels=labels,
                        scales=scales, fit_window=window)


def load_recipe(path: str | Path) -> FigureRecipe:
    """Read and validate a recipe file."""
    p = Path(path)
    if not p.is_file():
        raise RecipeError(f"recipe file not found: {p}")
    try:
        payload = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise RecipeError(f"recipe is not valid JSON: {exc}") from None
    return from_json_dict(payload)
