"""Annealing schedules and the fair reparameterization of the mediated passage.

A linear passage drives both models with s = lambda = t / T.  That
comparison is unfair: the mediated coupling grows like s^2 while the direct
one grows like s, so the two passages cross the ordering transition at
different speeds and with different relevant gaps.

The fair construction aligns them order parameter by order parameter:

    s_sb(lambda) = O_sb^{-1}( O_ising(lambda) )

where O is the ground-state ring correlation, tabulated on a grid along each
linear passage and inverted piecewise-linearly.  The remaining mismatch of
the relevant gaps is absorbed into a multiplicative rescaling of the direct
Hamiltonian,

    c(lambda) = gap_sb(s_sb(lambda)) / gap_ising(lambda),

with the mediated gap measured on a fresh diagonalization at the remapped
schedule values, so c * gap_ising = gap_sb holds exactly at the nodes while
|O_sb - O_ising| at the nodes reports the honest interpolation error of the
inverted map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .hilbert import Basis, build_basis
from .models import ising_passage, spinboson_passage
from .spectrum import (
    DEGENERACY_TOL,
    AmbiguousTargetWarning,
    correlator_O,
    eigen_lowest,
    match_target_state,
    relevant_gap_ising,
    spin_overlap_profile,
)

SPEC_VERSION = 1
MONOTONE_TOL = 1e-6
SPEC_KINDS = ("ising_linear", "spinboson_linear", "ising_fair", "spinboson_fair")


@dataclass(frozen=True)
class Curve:
    """Piecewise-linear curve over the full schedule interval [0, 1]."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or len(g) < 2:
            raise ValueError("curve needs matching 1-d grid/value arrays, length >= 2")
        if np.any(np.diff(g) <= 0):
            raise ValueError("curve grid must be strictly increasing")
        if abs(g[0]) > 1e-12 or abs(g[-1] - 1.0) > 1e-12:
            raise ValueError("curve grid must span [0, 1]")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def interpolate(self, x):
        return np.interp(x, self.grid, self.values)


def invert_monotone(curve: Curve, y: float, tol: float = MONOTONE_TOL) -> float:
    """Preimage of ``y`` under a monotone piecewise-linear curve.

    Accepts either orientation.  Violations of monotonicity up to ``tol``
    are flattened; larger ones raise.  Values outside the curve's range are
    clamped to the nearest endpoint with a warning.
    """
    vals = curve.values
    steps = np.diff(vals)
    if np.all(steps >= -tol):
        ascending, y_asc = vals, y
    elif np.all(steps <= tol):
        ascending, y_asc = -vals, -y
    else:
        raise ValueError(
            f"curve is not monotone within tolerance {tol:g} "
            f"(worst step {steps.min():.3e} / {steps.max():.3e})")
    ascending = np.maximum.accumulate(ascending)
    if y_asc < ascending[0] or y_asc > ascending[-1]:
        warnings.warn(f"inversion target {y:.6g} outside curve range, clamping",
                      stacklevel=2)
        y_asc = min(max(y_asc, ascending[0]), ascending[-1])
    return float(np.interp(y_asc, ascending, curve.grid))


@dataclass(frozen=True)
class PassageSpec:
    """Portable description of one passage: schedule map plus rescaling.

    s_values gives s(lambda) on lambda_grid, c_values the Hamiltonian
    prefactor; both evaluate through the monotone cubic of
    schedule_functions.  flags carries per-node diagnostics from the
    construction ('' when clean).
    """

    kind: str
    n_spins: int
    omega: float
    n_max: int
    lambda_grid: np.ndarray
    s_values: np.ndarray
    c_values: np.ndarray
    flags: tuple[str, ...]
    version: int = SPEC_VERSION

    def __post_init__(self):
        if self.kind not in SPEC_KINDS:
            raise ValueError(f"unknown passage kind {self.kind!r}")
        if self.version != SPEC_VERSION:
            raise ValueError(f"unsupported passage spec version {self.version}")
        lam = np.asarray(self.lambda_grid, dtype=float)
        s = np.asarray(self.s_values, dtype=float)
        c = np.asarray(self.c_values, dtype=float)
        if not (lam.shape == s.shape == c.shape) or lam.ndim != 1 or len(lam) < 2:
            raise ValueError("passage spec arrays must be 1-d and aligned")
        if np.any(np.diff(lam) <= 0) or abs(lam[0]) > 1e-12 or abs(lam[-1] - 1) > 1e-12:
            raise ValueError("lambda grid must increase strictly from 0 to 1")
        if np.any(s < -1e-12) or np.any(s > 1 + 1e-12) or np.any(np.diff(s) < -1e-12):
            raise ValueError("s(lambda) must be nondecreasing within [0, 1]")
        if abs(s[0]) > 1e-12 or abs(s[-1] - 1.0) > 1e-12:
            raise ValueError("schedule must start at s=0 and end at s=1")
        if np.any(c <= 0):
            raise ValueError("rescaling c(lambda) must stay positive")
        if len(self.flags) != len(lam):
            raise ValueError("need one flag string per grid node")
        object.__setattr__(self, "lambda_grid", lam)
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "c_values", c)
        object.__setattr__(self, "flags", tuple(self.flags))

    def to_json_dict(self) -> dict:
        return {
            "version": self.version,
            "kind": self.kind,
            "n_spins": self.n_spins,
            "omega": self.omega,
            "n_max": self.n_max,
            "lambda_grid": self.lambda_grid.tolist(),
            "s_values": self.s_values.tolist(),
            "c_values": self.c_values.tolist(),
            "flags": list(self.flags),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "PassageSpec":
        expected = {"version", "kind", "n_spins", "omega", "n_max",
                    "lambda_grid", "s_values", "c_values", "flags"}
        unknown = set(payload) - expected
        if unknown:
            raise ValueError(f"unknown passage spec keys: {sorted(unknown)}")
        missing = expected - set(payload)
        if missing:
            raise ValueError(f"missing passage spec keys: {sorted(missing)}")
        return cls(
            kind=payload["kind"],
            n_spins=int(payload["n_spins"]),
            omega=float(payload["omega"]),
            n_max=int(payload["n_max"]),
            lambda_grid=np.asarray(payload["lambda_grid"], dtype=float),
            s_values=np.asarray(payload["s_values"], dtype=float),
            c_values=np.asarray(payload["c_values"], dtype=float),
            flags=tuple(payload["flags"]),
            version=int(payload["version"]),
        )


def schedule_functions(spec: PassageSpec):
    """Callable interpolants for s(lambda) and c(lambda).

    Nodes are reproduced exactly; between them a monotone shape-preserving
    cubic is used instead of straight segments.  Straight segments carry
    slope jumps at every node, and under time evolution those act as
    wideband velocity kicks that pump spurious boson quanta (worst at low
    mode frequency), polluting the error of the mediated passage with an
    artifact of the tabulation grid.  The cubic keeps the properties the
    segments were chosen for: monotone s, no overshoot in c, and a two-node
    grid still evaluates to the exact linear schedule.
    """
    return (PchipInterpolator(spec.lambda_grid, spec.s_values),
            PchipInterpolator(spec.lambda_grid, spec.c_values))


def schedule_eval(spec: PassageSpec, lam: float) -> tuple[float, float]:
    """(s, c) at passage coordinate lambda; see schedule_functions."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda={lam} outside [0, 1]")
    s_fn, c_fn = schedule_functions(spec)
    return float(s_fn(lam)), float(c_fn(lam))


def linear_spec(kind: str, n_spins: int, omega: float, n_max: int) -> PassageSpec:
    """The trivial schedule s = lambda, c = 1."""
    if kind not in ("ising_linear", "spinboson_linear"):
        raise ValueError(f"linear spec kind must be *_linear, got {kind!r}")
    grid = np.array([0.0, 1.0])
    return PassageSpec(kind, n_spins, omega, n_max, grid, grid.copy(),
                       np.ones(2), ("", ""))


@dataclass
class _IsingPoint:
    s: float
    o: float
    gap: float
    target: np.ndarray
    energies: np.ndarray


def _ising_point(n_spins: int, s: float, basis: Basis) -> _IsingPoint:
    h = ising_passage(n_spins, s, basis)
    sl = eigen_lowest(h, min(2 * n_spins + 2, basis.dim), s=s)
    return _IsingPoint(
        s=s,
        o=correlator_O(sl.states[:, 0], basis, n_spins),
        gap=relevant_gap_ising(sl, n_spins),
        target=sl.states[:, 2 * n_spins].copy(),
        energies=sl.energies.copy(),
    )


@dataclass
class _SBPoint:
    s: float
    o: float
    gap: float
    p: float
    index: int
    k_used: int
    flags: list[str]
    energies: np.ndarray


def _k_cap(basis: Basis, k_max: int) -> int:
    from .spectrum import DENSE_DIM_LIMIT
    hard = basis.dim if basis.dim <= DENSE_DIM_LIMIT else basis.dim - 2
    return min(k_max, hard)


def _sb_point(n_spins: int, omega: float, s: float, basis: Basis,
              target: np.ndarray | None, k: int, k_max: int,
              degeneracy_tol: float) -> _SBPoint:
    """Observables of one mediated slice, growing k until the matched state
    sits safely inside the computed window."""
    h = spinboson_passage(n_spins, omega, s, basis)
    cap = _k_cap(basis, k_max)
    k = min(max(k, 8), cap)
    while True:
        sl = eigen_lowest(h, k, s=s)
        o = correlator_O(sl.states[:, 0], basis, n_spins)
        if target is None:
            return _SBPoint(s, o, float("nan"), float("nan"), -1, k, [],
                            sl.energies.copy())
        flags = []
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AmbiguousTargetWarning)
            index = match_target_state(sl, target, degeneracy_tol=degeneracy_tol)
        if index >= k - 4 and k < cap:
            k = min(2 * k, cap)
            continue
        if any(issubclass(w.category, AmbiguousTargetWarning) for w in caught):
            flags.append("ambiguous_match")
        if index >= k - 4:
            flags.append("k_ceiling")
        p = float(spin_overlap_profile(sl, target)[index])
        gap = float(sl.energies[index] - sl.energies[0])
        return _SBPoint(s, o, gap, p, index, k, flags, sl.energies.copy())


@dataclass
class TabulatedPassage:
    """Per-node observables of one linear passage."""

    model: str
    grid: np.ndarray
    o: np.ndarray
    gap: np.ndarray
    flags: list[list[str]]
    energies: list[np.ndarray]


def tabulate_table(model: str, grid: np.ndarray, *, n_spins: int,
                   omega: float | None = None, n_max: int | None = None,
                   k0: int = 16, k_max: int = 1024,
                   degeneracy_tol: float = DEGENERACY_TOL) -> TabulatedPassage:
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > 1) or np.any(np.diff(grid) <= 0):
        raise ValueError("tabulation grid must increase strictly within [0, 1]")
    spin_basis = build_basis(n_spins, 0, 0)
    if model == "ising":
        pts = [_ising_point(n_spins, s, spin_basis) for s in grid]
        return TabulatedPassage(model, grid, np.array([p.o for p in pts]),
                                np.array([p.gap for p in pts]),
                                [[] for _ in pts],
                                [p.energies for p in pts])
    if model != "spinboson":
        raise ValueError(f"unknown model {model!r}")
    if omega is None or n_max is None:
        raise ValueError("mediated tabulation needs omega and n_max")
    basis = build_basis(n_spins, n_spins, n_max)
    o_vals, gaps, flags, energies = [], [], [], []
    k = k0
    for s in grid:
        target = _ising_point(n_spins, s, spin_basis).target
        pt = _sb_point(n_spins, omega, s, basis, target, k, k_max, degeneracy_tol)
        k = pt.k_used
        o_vals.append(pt.o)
        gaps.append(pt.gap)
        flags.append(pt.flags)
        energies.append(pt.energies)
    return TabulatedPassage(model, grid, np.array(o_vals), np.array(gaps),
                            flags, energies)


def tabulate(model: str, observable: str, grid: np.ndarray, *, n_spins: int,
             omega: float | None = None, n_max: int | None = None,
             k0: int = 16, k_max: int = 1024) -> Curve:
    """Tabulate O or the relevant gap along a linear passage."""
    table = tabulate_table(model, grid, n_spins=n_spins, omega=omega,
                           n_max=n_max, k0=k0, k_max=k_max)
    if observable == "O":
        return Curve(table.grid, table.o)
    if observable == "relevant_gap":
        return Curve(table.grid, table.gap)
    raise ValueError(f"unknown observable {observable!r}")


@dataclass
class FairnessTable:
    """Node-wise record of the fair construction (one row per lambda)."""

    lam: np.ndarray
    s_sb: np.ndarray
    c: np.ndarray
    o_sb: np.ndarray
    o_ising: np.ndarray
    gap_sb: np.ndarray
    gap_ising: np.ndarray
    flags: list[str]


@dataclass
class FairPair:
    spec_sb: PassageSpec
    spec_ising: PassageSpec
    table: FairnessTable


def build_fair_pair(n_spins: int, omega: float, n_max: int,
                    grid_points: int = 201, *, k0: int = 16, k_max: int = 1024,
                    degeneracy_tol: float = DEGENERACY_TOL) -> FairPair:
    """Construct the fair (mediated, rescaled-direct) passage pair.

    Two sweeps over the mediated model: the first tabulates O along the
    linear passage to build the monotone map s_sb(lambda), the second
    re-diagonalizes at the remapped points so the emitted correlations and
    gaps are measured, not interpolated.
    """
    if grid_points < 101:
        raise ValueError(f"fair construction needs >= 101 grid points, got {grid_points}")
    lam = np.linspace(0.0, 1.0, grid_points)
    spin_basis = build_basis(n_spins, 0, 0)
    basis = build_basis(n_spins, n_spins, n_max)

    ising_pts = [_ising_point(n_spins, x, spin_basis) for x in lam]
    o_ising = np.array([p.o for p in ising_pts])
    gap_ising = np.array([p.gap for p in ising_pts])

    k = k0
    o_linear = []
    for x in lam:
        pt = _sb_point(n_spins, omega, x, basis, None, k, k_max, degeneracy_tol)
        k = pt.k_used
        o_linear.append(pt.o)
    o_curve = Curve(lam, np.array(o_linear))

    # endpoints are pinned exactly; truncation can push O_I(1) just past the
    # mediated curve's range, which is not worth a clamp warning
    s_sb = np.array([0.0]
                    + [invert_monotone(o_curve, y) for y in o_ising[1:-1]]
                    + [1.0])
    s_sb = np.clip(np.maximum.accumulate(s_sb), 0.0, 1.0)

    k = k0
    o_sb = np.empty(grid_points)
    gap_sb = np.empty(grid_points)
    flags: list[str] = []
    for j, x in enumerate(lam):
        pt = _sb_point(n_spins, omega, s_sb[j], basis, ising_pts[j].target,
                       k, k_max, degeneracy_tol)
        k = pt.k_used
        o_sb[j] = pt.o
        gap_sb[j] = pt.gap
        flags.append(";".join(pt.flags))

    c = gap_sb / gap_ising
    table = FairnessTable(lam=lam, s_sb=s_sb, c=c, o_sb=o_sb, o_ising=o_ising,
                          gap_sb=gap_sb, gap_ising=gap_ising, flags=flags)
    spec_sb = PassageSpec("spinboson_fair", n_spins, omega, n_max, lam, s_sb,
                          np.ones(grid_points), tuple(flags))
    spec_ising = PassageSpec("ising_fair", n_spins, omega, n_max, lam,
                             lam.copy(), c, tuple(flags))
    return FairPair(spec_sb=spec_sb, spec_ising=spec_ising, table=table)
