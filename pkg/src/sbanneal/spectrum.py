"""Eigenanalysis of passage Hamiltonians.

Dense solvers handle dimensions up to 4096; larger problems fall back to
implicitly restarted Lanczos.  Every solve is verified against residual and
orthonormality tolerances and each eigenvector's global phase is fixed by
making its largest-magnitude component real positive, so repeated runs are
bit-reproducible.

The "relevant" excited state is the one whose loss of population produces an
error at the end of a passage.  For the direct passage on an odd ring of n
spins it is simply the 2n-th excited state (the final ground manifold is
2n-fold degenerate).  For the mediated model boson excitations interleave
with spin errors, so the counterpart state is found by maximizing the spin
sector overlap p_i = <t| tr_boson |psi_i><psi_i| |t> with the direct model's
relevant state |t>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import linear_sum_assignment

from .hilbert import Basis, SparseOperator, boson, combine, pauli

DENSE_DIM_LIMIT = 4096
DEGENERACY_TOL = 1e-8
RESIDUAL_TOL = 1e-9
AMBIGUOUS_P = 0.5


class EigensolverError(RuntimeError):
    """Raised when an eigensolve fails its convergence verification."""


class AmbiguousTargetWarning(UserWarning):
    """Raised when no computed state resembles the requested spin sector."""


@dataclass
class SpectrumSlice:
    """Lowest eigenpairs of one passage Hamiltonian.

    energies ascend; states holds eigenvectors as columns aligned with
    energies; labels is filled by classification when requested.
    """

    s: float
    energies: np.ndarray
    states: np.ndarray
    basis: Basis
    labels: list[str] | None = None

    @property
    def k(self) -> int:
        return len(self.energies)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(vecs), axis=0)
    pivots = vecs[lead, np.arange(vecs.shape[1])]
    if np.iscomplexobj(vecs):
        phases = pivots / np.abs(pivots)
        return vecs * phases.conj()
    return vecs * np.sign(pivots)


def _verify(h: sp.csr_matrix, energies: np.ndarray, vecs: np.ndarray,
            scale: float, residual_tol: float) -> None:
    resid = h.dot(vecs) - vecs * energies
    worst = float(np.max(np.linalg.norm(resid, axis=0)))
    if worst > residual_tol * scale:
        raise EigensolverError(
            f"eigenpair residual {worst:.3e} exceeds {residual_tol:.1e} * {scale:.3e}")
    gram = vecs.conj().T @ vecs
    defect = float(np.max(np.abs(gram - np.eye(vecs.shape[1]))))
    if defect > residual_tol:
        raise EigensolverError(f"eigenvector orthonormality defect {defect:.3e}")


def eigen_lowest(h: SparseOperator, k: int, *, s: float = float("nan"),
                 residual_tol: float = RESIDUAL_TOL) -> SpectrumSlice:
    """k lowest eigenpairs of a Hermitian operator, verified and phase-fixed."""
    dim = h.dim
    if not 1 <= k <= dim:
        raise ValueError(f"requested {k} eigenpairs of a dimension-{dim} operator")
    if h.hermiticity_defect() > 1e-9:
        raise ValueError("operator is not Hermitian")
    m = h.matrix
    real = not np.any(m.data.imag)
    scale = max(1.0, float(spla.norm(m, np.inf)))

    if dim <= DENSE_DIM_LIMIT:
        dense = m.real.toarray() if real else m.toarray()
        if k > dim // 2:
            energies, vecs = sla.eigh(dense, driver="evd")
            energies, vecs = energies[:k], vecs[:, :k]
        else:
            energies, vecs = sla.eigh(dense, subset_by_index=(0, k - 1), driver="evr")
    else:
        if k >= dim - 1:
            raise ValueError("iterative solver needs k < dim - 1")
        ncv = min(dim - 1, max(2 * k + 16, 64))
        rng = np.random.default_rng(271828)
        v0 = rng.standard_normal(dim)
        v0 /= np.linalg.norm(v0)
        mat = sp.csr_matrix(m.real) if real else m
        try:
            energies, vecs = spla.eigsh(mat, k=k, which="SA", v0=v0, ncv=ncv,
                                        maxiter=max(5000, 200 * k))
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(
                f"Lanczos did not converge for k={k}, dim={dim}: {exc}") from exc

    order = np.argsort(energies, kind="stable")
    energies, vecs = energies[order], vecs[:, order]
    _verify(m, energies, vecs, scale, residual_tol)
    return SpectrumSlice(s=s, energies=np.asarray(energies, dtype=float),
                         states=_fix_phases(vecs), basis=h.basis)


def relevant_gap_ising(sl: SpectrumSlice, n_spins: int) -> float:
    """E_{2n} - E_0: first escape out of the final 2n-fold ground manifold."""
    if sl.k <= 2 * n_spins:
        raise ValueError(
            f"need at least {2 * n_spins + 1} eigenpairs, slice has {sl.k}")
    return float(sl.energies[2 * n_spins] - sl.energies[0])


def spin_reduced_density(state: np.ndarray, basis: Basis) -> np.ndarray:
    """Trace out all modes: rho[a, b] = sum_n psi[n, a] psi[n, b]^*.

    Relies on the spin block being the fastest-varying index factor, which
    makes the reduction a contiguous reshape.
    """
    if state.shape != (basis.dim,):
        raise ValueError("state length does not match basis")
    blocks = state.reshape(basis.boson_dim, basis.spin_dim)
    rho = blocks.T @ blocks.conj()
    return 0.5 * (rho + rho.conj().T)


def spin_overlap_profile(sl: SpectrumSlice, target_spin: np.ndarray) -> np.ndarray:
    """p_i = <t| tr_boson rho_i |t> for every state of the slice."""
    basis = sl.basis
    if target_spin.shape != (basis.spin_dim,):
        raise ValueError("target state length does not match the spin sector")
    blocks = sl.states.reshape(basis.boson_dim, basis.spin_dim, sl.k)
    amp = np.einsum("a,nak->nk", target_spin.conj(), blocks)
    return np.einsum("nk,nk->k", amp, amp.conj()).real


def match_target_state(sl: SpectrumSlice, target_spin: np.ndarray, *,
                       degeneracy_tol: float = DEGENERACY_TOL,
                       tie_rel: float = 0.02) -> int:
    """Index of the excited state carrying the target spin sector.

    States inside the instantaneous ground manifold are excluded.  Every
    bosonic excitation of the matched band carries nearly the same spin
    sector, with overlaps differing only through weak hybridization, so
    candidates within a 2% relative band of the best p count as ties and
    the lowest-energy one wins; that pins the band bottom rather than an
    arbitrary boson-excited copy.  Warns when even the best candidate
    holds under half the target.
    """
    p = spin_overlap_profile(sl, target_spin)
    excluded = sl.energies - sl.energies[0] <= degeneracy_tol
    if np.all(excluded):
        raise ValueError("every computed state sits in the ground manifold")
    p_eff = np.where(excluded, -1.0, p)
    best = float(np.max(p_eff))
    index = int(np.nonzero(p_eff >= best * (1.0 - tie_rel))[0][0])
    if best < AMBIGUOUS_P:
        warnings.warn(
            f"ambiguous spin-sector match at s={sl.s:.6g}: best p={best:.3f}",
            AmbiguousTargetWarning, stacklevel=2)
    return index


@lru_cache(maxsize=64)
def correlator_operator(basis: Basis, n_spins: int) -> SparseOperator:
    """O = sum_i sigma_x^i sigma_x^{i+1} / (n_spins - 2) on the closed ring."""
    if n_spins < 3:
        raise ValueError("correlator needs at least 3 spins")
    if n_spins != basis.n_spins:
        raise ValueError("spin count does not match basis")
    terms = [(1.0 / (n_spins - 2),
              [pauli(basis, "x", i), pauli(basis, "x", (i + 1) % n_spins)])
             for i in range(n_spins)]
    return combine(terms, basis)


def correlator_O(state: np.ndarray, basis: Basis, n_spins: int) -> float:
    """Ring correlation of one state; -1 on the ordered manifold, 0 on the
    paramagnet, n_spins / (n_spins - 2) on the aligned product states."""
    op = correlator_operator(basis, n_spins)
    return float(np.real(op.expectation(state)))


@lru_cache(maxsize=64)
def total_number_operator(basis: Basis) -> SparseOperator:
    terms = [(1.0, [boson(basis, r, "number")]) for r in range(basis.n_modes)]
    return combine(terms, basis)


@dataclass
class GroundManifold:
    """States degenerate with the ground level within a tolerance."""

    indices: np.ndarray
    energies: np.ndarray
    states: np.ndarray
    complete: bool

    @property
    def size(self) -> int:
        return len(self.indices)

    def population(self, vec: np.ndarray) -> float:
        amps = self.states.conj().T @ vec
        return float(np.real(amps.conj() @ amps))

    def spin_projector(self, basis: Basis) -> np.ndarray:
        """Projector onto the span of the manifold's spin sectors."""
        stacked = np.concatenate(
            [self.states[:, j].reshape(basis.boson_dim, basis.spin_dim)
             for j in range(self.size)], axis=0)
        _, sv, vh = np.linalg.svd(stacked, full_matrices=False)
        rank = int(np.sum(sv > 1e-6 * sv[0]))
        rows = vh[:rank]
        # rows are orthonormal kets spanning the sector; P = sum |v><v|
        return rows.T @ rows.conj()

    def spin_population(self, vec: np.ndarray, basis: Basis) -> float:
        """Population whose spin sector lies inside the manifold's spin span,
        regardless of how many mediator quanta ride on top of it."""
        blocks = vec.reshape(basis.boson_dim, basis.spin_dim)
        proj = self.spin_projector(basis)
        return float(np.real(
            np.einsum("na,ab,nb->", blocks.conj(), proj, blocks)))


def ground_manifold(sl: SpectrumSlice, tol: float = DEGENERACY_TOL) -> GroundManifold:
    """Collect the quasi-degenerate ground states of a slice.

    ``complete`` is False when the manifold fills the whole slice, i.e. the
    solve may have stopped inside the degenerate cluster; callers should
    then re-solve with a larger k.
    """
    mask = sl.energies - sl.energies[0] <= tol
    idx = np.nonzero(mask)[0]
    return GroundManifold(indices=idx, energies=sl.energies[idx],
                          states=sl.states[:, idx], complete=len(idx) < sl.k)


def eigenstate_character(sl: SpectrumSlice,
                         spin_projector: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(spin fidelity, mean boson number) for every state of the slice."""
    basis = sl.basis
    blocks = sl.states.reshape(basis.boson_dim, basis.spin_dim, sl.k)
    fid = np.einsum("nak,ab,nbk->k", blocks.conj(), spin_projector, blocks).real
    nop = total_number_operator(basis)
    nbar = np.einsum("dk,dk->k", sl.states.conj(), nop.matrix.dot(sl.states)).real
    return fid, nbar


def classify_eigenstates(sl: SpectrumSlice, manifold_spin_projector: np.ndarray, *,
                         fidelity_threshold: float = 0.9,
                         boson_threshold: float = 0.5) -> list[str]:
    """Label states as solution / excited_solution / spin_error / other.

    The boson criterion uses the occupation excess over the least-dressed
    high-fidelity state of the slice rather than the raw occupation: at
    full coupling even the solution manifold carries ~ s^2 kappa^2 / omega
    quanta per displaced mode, and only the surplus above that dressing
    distinguishes an extra mediator excitation.
    """
    fid, nbar = eigenstate_character(sl, manifold_spin_projector)
    solution_like = fid >= fidelity_threshold
    baseline = float(np.min(nbar[solution_like])) if np.any(solution_like) else float(nbar[0])
    labels = []
    for f, n in zip(fid, nbar):
        excess = n - baseline
        if f >= fidelity_threshold:
            labels.append("solution" if excess < boson_threshold else "excited_solution")
        else:
            labels.append("spin_error" if excess < boson_threshold else "other")
    return labels


def adiabatic_metric(dh_ds: SparseOperator, sl: SpectrumSlice, total_time: float) -> float:
    """|<psi_1| dH/ds |psi_0>| / (T * gap^2), the leading diabatic amplitude.

    Returns +inf on a degenerate gap.
    """
    if sl.k < 2:
        raise ValueError("metric needs at least two eigenpairs")
    if total_time <= 0:
        raise ValueError("total time must be positive")
    gap = sl.energies[1] - sl.energies[0]
    if gap <= DEGENERACY_TOL:
        return float("inf")
    elem = np.vdot(sl.states[:, 1], dh_ds.matrix.dot(sl.states[:, 0]))
    return float(np.abs(elem) / (total_time * gap * gap))


def track_bands(slices: list[SpectrumSlice]) -> np.ndarray:
    """Follow spectral bands across a parameter grid by maximal overlap.

    Returns band_ids[slice, state]: the band that each slice-local state
    (energy-ordered) belongs to.  Band identity follows the eigenvector
    character through avoided crossings, so a band's label can be assigned
    at one end of the grid and propagated.
    """
    if not slices:
        raise ValueError("no slices to track")
    k = slices[0].k
    if any(sl.k != k for sl in slices):
        raise ValueError("band tracking needs a uniform eigenpair count")
    ids = np.zeros((len(slices), k), dtype=int)
    ids[0] = np.arange(k)
    for step in range(1, len(slices)):
        overlap = np.abs(slices[step - 1].states.conj().T @ slices[step].states) ** 2
        rows, cols = linear_sum_assignment(-overlap)
        ids[step, cols] = ids[step - 1, rows]
    return ids
