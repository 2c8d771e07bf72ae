"""Schrodinger evolution along passages and error-probability sweeps.

The integrator is a fixed-step explicit 4th-order scheme: each step applies
the degree-4 Taylor polynomial of exp(-i dt H) with the Hamiltonian
assembled once at the step midpoint.  Passage Hamiltonians are linear in
the schedule value, H(lambda) = c(lambda) (A + s(lambda) B), so per-step
assembly reduces to a fused scalar combination of two pattern-aligned CSR
data arrays.

The error probability of a run is the final population whose spin sector
falls outside the spin span of the numerically determined ground manifold
of H(lambda = 1); see run_passage.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hilbert import Basis, SparseOperator, build_basis
from .models import ising_linear_parts, spinboson_linear_parts
from .passage import PassageSpec, schedule_functions
from .spectrum import (
    DEGENERACY_TOL,
    SpectrumSlice,
    classify_eigenstates,
    eigen_lowest,
    ground_manifold,
    track_bands,
)

NORM_ABORT = 1e-6
ORACLE_DIM_LIMIT = 1024
SUBSPACE_LABELS = ("solution", "excited_solution", "spin_error", "other")


class IntegrationError(RuntimeError):
    """Raised when the integrator loses unitarity beyond the abort threshold."""


@dataclass(frozen=True)
class IntegratorConfig:
    steps_per_unit_time: int = 200
    norm_renormalize: bool = True

    def __post_init__(self):
        if self.steps_per_unit_time < 1:
            raise ValueError("steps_per_unit_time must be positive")


@dataclass
class PopulationTrace:
    times: np.ndarray
    populations: dict[str, np.ndarray]


@dataclass
class EvolutionResult:
    T: float
    final_state: np.ndarray
    p_error: float
    norm_drift: float
    flags: list[str] = field(default_factory=list)
    traces: PopulationTrace | None = None


def passage_basis(spec: PassageSpec) -> Basis:
    if spec.kind.startswith("spinboson"):
        return build_basis(spec.n_spins, spec.n_spins, spec.n_max)
    return build_basis(spec.n_spins, 0, 0)


def _linear_parts(spec: PassageSpec, basis: Basis):
    if spec.kind.startswith("spinboson"):
        return spinboson_linear_parts(spec.n_spins, spec.omega, basis)
    return ising_linear_parts(spec.n_spins, basis)


def _linear_keys(m: sp.csr_matrix) -> np.ndarray:
    rows = np.repeat(np.arange(m.shape[0], dtype=np.int64), np.diff(m.indptr))
    return rows * m.shape[1] + m.indices


def _scatter(union_keys: np.ndarray, m: sp.csr_matrix) -> np.ndarray:
    """Data of m re-laid onto the union pattern (zeros elsewhere)."""
    keys = _linear_keys(m)
    pos = np.searchsorted(union_keys, keys)
    if not np.array_equal(union_keys[pos], keys):
        raise RuntimeError("pattern alignment of passage parts failed")
    out = np.zeros(len(union_keys), dtype=complex)
    out[pos] = m.data
    return out


class _SteppedHamiltonian:
    """H(lambda) = c (A + s B) with A, B expanded onto one shared pattern."""

    def __init__(self, spec: PassageSpec, basis: Basis):
        a, b = _linear_parts(spec, basis)
        dim = basis.dim
        keys = np.union1d(_linear_keys(a.matrix), _linear_keys(b.matrix))
        indptr = np.zeros(dim + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(keys // dim, minlength=dim))
        self.spec = spec
        self.s_fn, self.c_fn = schedule_functions(spec)
        self.data_a = _scatter(keys, a.matrix)
        self.data_b = _scatter(keys, b.matrix)
        self.work = sp.csr_matrix(
            (np.zeros(len(keys), dtype=complex), keys % dim, indptr),
            shape=(dim, dim))

    def at(self, lam: float) -> sp.csr_matrix:
        s, c = float(self.s_fn(lam)), float(self.c_fn(lam))
        np.multiply(self.data_b, s, out=self.work.data)
        self.work.data += self.data_a
        if c != 1.0:
            self.work.data *= c
        return self.work


def initial_state(spec: PassageSpec, basis: Basis) -> np.ndarray:
    """All spins down, all modes empty: the H(0) ground state.

    Both passage families start diagonal, so the claim is checked exactly
    from the matrix instead of with an eigensolve.
    """
    h0 = _SteppedHamiltonian(spec, basis).at(0.0)
    diag = h0.diagonal().real
    off_weight = float(np.abs(h0).sum() - np.abs(diag).sum())
    if off_weight > 1e-12 * max(1.0, float(np.abs(diag).max())):
        raise ValueError("start-of-passage Hamiltonian is not diagonal")
    order = np.argsort(diag, kind="stable")
    if diag[order[1]] - diag[order[0]] <= 1e-6:
        raise ValueError("initial Hamiltonian ground state is degenerate")
    if order[0] != 0:
        raise ValueError("initial ground state is not the all-down vacuum")
    psi = np.zeros(basis.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def _integrate(stepped: _SteppedHamiltonian, psi0: np.ndarray, T: float,
               cfg: IntegratorConfig,
               sample_steps: dict[int, object] | None = None) -> tuple[np.ndarray, float]:
    steps = max(1, math.ceil(T * cfg.steps_per_unit_time))
    dt = T / steps
    z = -1j * dt
    psi = psi0.astype(complex).copy()
    drift_max = 0.0
    if sample_steps is not None and 0 in sample_steps:
        sample_steps[0](psi, 0.0)
    for n in range(steps):
        h = stepped.at((n + 0.5) * dt / T)
        v = psi.copy()
        for j in (4, 3, 2, 1):
            v = psi + (z / j) * h.dot(v)
        psi = v
        nrm = float(np.linalg.norm(psi))
        drift = abs(nrm - 1.0)
        drift_max = max(drift_max, drift)
        if drift > NORM_ABORT:
            raise IntegrationError(
                f"norm drifted by {drift:.3e} at t={(n + 1) * dt:.4f} "
                f"(steps_per_unit_time={cfg.steps_per_unit_time} too coarse)")
        if cfg.norm_renormalize:
            psi /= nrm
        if sample_steps is not None and (n + 1) in sample_steps:
            sample_steps[n + 1](psi, (n + 1) * dt)
    return psi, drift_max


def final_manifold(spec: PassageSpec, basis: Basis, *,
                   tol: float = DEGENERACY_TOL):
    """Ground manifold of the end-of-passage Hamiltonian, grown until the
    degenerate cluster is fully inside the solved window."""
    stepped = _SteppedHamiltonian(spec, basis)
    h1 = SparseOperator(basis, stepped.at(1.0).copy())
    k = min(basis.dim, 2 * spec.n_spins + 2)
    while True:
        manifold = ground_manifold(eigen_lowest(h1, k, s=1.0), tol)
        if manifold.complete or k >= min(basis.dim, 4096):
            return manifold
        k = min(2 * k, basis.dim)


def run_passage(spec: PassageSpec, T: float,
                cfg: IntegratorConfig = IntegratorConfig(),
                basis: Basis | None = None, *,
                manifold_tol: float = DEGENERACY_TOL) -> EvolutionResult:
    """Integrate one passage of duration T and measure the error probability.

    An annealing run fails when the spin configuration leaves the span of
    the final ground manifold's spin sectors, so p_error counts exactly
    that population.  Mediator quanta excited on top of a correct spin
    configuration are not counted: they carry no information about the
    optimization outcome and would be stripped by any readout of the
    spins alone.  Without modes the two measures agree, so direct-coupling
    runs are unaffected by the distinction.
    """
    if T <= 0:
        raise ValueError(f"passage duration must be positive, got {T}")
    if basis is None:
        basis = passage_basis(spec)
    stepped = _SteppedHamiltonian(spec, basis)
    psi0 = initial_state(spec, basis)
    psi, drift = _integrate(stepped, psi0, T, cfg)
    manifold = final_manifold(spec, basis, tol=manifold_tol)
    flags = [] if manifold.complete else ["manifold_truncated"]
    p_error = min(1.0, max(0.0, 1.0 - manifold.spin_population(psi, basis)))
    return EvolutionResult(T=T, final_state=psi, p_error=p_error,
                           norm_drift=drift, flags=flags)


def population_trace(spec: PassageSpec, T: float,
                     cfg: IntegratorConfig = IntegratorConfig(),
                     labels: tuple[str, ...] = SUBSPACE_LABELS, *,
                     n_samples: int = 101, k: int = 64,
                     manifold_tol: float = DEGENERACY_TOL) -> EvolutionResult:
    """run_passage plus populations of the labeled instantaneous bands.

    Band labels are assigned by classifying the end-of-passage slice and
    propagated backwards along maximal-overlap tracked bands, so a band
    keeps one identity through its avoided crossings.
    """
    if T <= 0:
        raise ValueError(f"passage duration must be positive, got {T}")
    if n_samples < 2:
        raise ValueError("need at least two trace samples")
    for name in labels:
        if name not in SUBSPACE_LABELS:
            raise ValueError(f"unknown subspace label {name!r}")
    basis = passage_basis(spec)
    stepped = _SteppedHamiltonian(spec, basis)
    steps = max(1, math.ceil(T * cfg.steps_per_unit_time))
    sample_idx = sorted({int(round(i * steps / (n_samples - 1)))
                         for i in range(n_samples)})

    slices: list[SpectrumSlice] = []
    for idx in sample_idx:
        lam = idx / steps
        h = SparseOperator(basis, stepped.at(lam).copy())
        slices.append(eigen_lowest(h, min(k, basis.dim), s=lam))
    bands = track_bands(slices)
    last = slices[-1]
    projector = ground_manifold(last, manifold_tol).spin_projector(basis)
    end_labels = classify_eigenstates(last, projector)
    band_label = {bands[-1, j]: end_labels[j] for j in range(last.k)}

    times: list[float] = []
    pops: dict[str, list[float]] = {name: [] for name in SUBSPACE_LABELS}

    def make_recorder(slot: int):
        sl = slices[slot]
        groups = {name: [] for name in SUBSPACE_LABELS}
        for j in range(sl.k):
            groups[band_label[bands[slot, j]]].append(j)

        def record(psi: np.ndarray, t: float):
            times.append(t)
            for name in SUBSPACE_LABELS:
                if name not in labels:
                    continue
                cols = groups[name]
                if cols:
                    amp = sl.states[:, cols].conj().T @ psi
                    pops[name].append(float(np.real(amp.conj() @ amp)))
                else:
                    pops[name].append(0.0)

        return record

    recorders = {idx: make_recorder(slot) for slot, idx in enumerate(sample_idx)}
    psi0 = initial_state(spec, basis)
    psi, drift = _integrate(stepped, psi0, T, cfg, sample_steps=recorders)
    manifold = final_manifold(spec, basis, tol=manifold_tol)
    flags = [] if manifold.complete else ["manifold_truncated"]
    p_error = min(1.0, max(0.0, 1.0 - manifold.spin_population(psi, basis)))
    trace = PopulationTrace(times=np.array(times),
                            populations={n: np.array(v) for n, v in pops.items()
                                         if n in labels})
    return EvolutionResult(T=T, final_state=psi, p_error=p_error,
                           norm_drift=drift, flags=flags, traces=trace)


@dataclass
class SweepRow:
    omega: float
    T: float
    p_error: float
    n_max: int
    steps_per_unit: int
    flags: str


def _sweep_task(payload: tuple[dict, float, int, bool]) -> SweepRow:
    spec_dict, T, steps, renorm = payload
    spec = PassageSpec.from_json_dict(spec_dict)
    cfg = IntegratorConfig(steps_per_unit_time=steps, norm_renormalize=renorm)
    try:
        res = run_passage(spec, T, cfg)
        return SweepRow(spec.omega, T, res.p_error, spec.n_max,
                        steps, ";".join(res.flags))
    except Exception as exc:  # per-row isolation: the sweep must finish
        return SweepRow(spec.omega, T, float("nan"), spec.n_max,
                        steps, f"error:{type(exc).__name__}")


def sweep(specs, T_list, cfg: IntegratorConfig = IntegratorConfig(), *,
          threads: int = 1) -> list[SweepRow]:
    """Error probabilities over (passage, duration) pairs, ordered by
    (omega, T).  Failures are recorded per row and do not stop the sweep."""
    if isinstance(specs, PassageSpec):
        specs = [specs]
    tasks = [(spec.to_json_dict(), float(T), cfg.steps_per_unit_time,
              cfg.norm_renormalize)
             for spec in specs for T in T_list]
    tasks.sort(key=lambda t: (t[0]["omega"], t[1]))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    return rows


def oracle_evolve(h_of_t, psi0: np.ndarray, T: float, n_slices: int) -> np.ndarray:
    """Reference propagator: product of dense exponentials of midpoint
    Hamiltonians over n_slices equal sub-intervals.  Small systems only."""
    dim = len(psi0)
    if dim > ORACLE_DIM_LIMIT:
        raise ValueError(f"oracle evolution limited to dim <= {ORACLE_DIM_LIMIT}")
    if n_slices < 1:
        raise ValueError("need at least one slice")
    dt = T / n_slices
    psi = psi0.astype(complex).copy()
    for j in range(n_slices):
        h = h_of_t((j + 0.5) * dt)
        if sp.issparse(h):
            h = h.toarray()
        elif hasattr(h, "matrix"):
            h = h.matrix.toarray()
        # exact exponential via spectral decomposition; h is Hermitian
        w, v = np.linalg.eigh(np.asarray(h))
        psi = v @ (np.exp(-1j * dt * w) * (v.conj().T @ psi))
    return psi
