"""Hamiltonians: frustrated ring target, direct and boson-mediated passages.

Energy unit is the bare qubit splitting omega0 = 1.  The annealing schedule
interpolates H(s) = s * H_final + (1 - s) * H_driver with the driver
(omega0 / 2) sum_i sigma_z^i, whose ground state is all spins down.

The mediated model couples each spin x-component to a pair of ring modes,

    H = sum_{i,r} sigma_x^i (g_ir b_r^dag + g_ir^* b_r) + sum_i B_i sigma_x^i
        + (omega0 / 2) sum_i sigma_z^i + sum_r omega_r b_r^dag b_r,

with the ring pattern g[i, i] = +sqrt(omega), g[i, i+1] = -sqrt(omega)
(indices mod n_spins).  Eliminating the modes leaves an antiferromagnetic
x-x interaction J_ij = -sum_r Re(g_ir g_jr^*) / omega_r = +1 per ring bond.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import Basis, SparseOperator, boson, combine, pauli


@dataclass(frozen=True)
class SpinBosonParams:
    """Couplings of the generic spin-boson Hamiltonian.

    couplings[i, r] is the coefficient of sigma_x^i b_r^dag; field[i] is a
    direct sigma_x bias; omega[r] are mode energies; omega0 scales the
    sigma_z driver (the passage encodes its schedule by scaling this down
    from the unit value).
    """

    couplings: np.ndarray
    field: np.ndarray
    omega: np.ndarray
    omega0: float = 1.0

    def __post_init__(self):
        g = np.asarray(self.couplings, dtype=complex)
        b = np.asarray(self.field, dtype=float)
        w = np.asarray(self.omega, dtype=float)
        if g.ndim != 2:
            raise ValueError("couplings must be a 2-d array [n_spins, n_modes]")
        if b.shape != (g.shape[0],):
            raise ValueError("field length does not match spin count")
        if w.shape != (g.shape[1],):
            raise ValueError("omega length does not match mode count")
        if np.any(w <= 0):
            raise ValueError("mode energies must be positive")
        if self.omega0 < 0:
            raise ValueError("omega0 must be nonnegative")
        object.__setattr__(self, "couplings", g)
        object.__setattr__(self, "field", b)
        object.__setattr__(self, "omega", w)

    @property
    def n_spins(self) -> int:
        return self.couplings.shape[0]

    @property
    def n_modes(self) -> int:
        return self.couplings.shape[1]


def ring_couplings(n_spins: int, omega: float, scale: float = 1.0) -> np.ndarray:
    """Ring coupling matrix scaled by ``scale`` (the schedule uses s).

    Two nonzeros per mode column with opposite signs and magnitude
    scale * sqrt(omega); every bond's shared mode then mediates
    J = +scale^2 between its two spins.  Any n_spins >= 2 is accepted
    here; frustration arguments live in RingGeometry and target_afm.
    """
    if n_spins < 2:
        raise ValueError(f"ring pattern needs at least 2 spins, got {n_spins}")
    if omega <= 0:
        raise ValueError(f"mode energy must be positive, got {omega}")
    g = np.zeros((n_spins, n_spins), dtype=complex)
    amp = scale * np.sqrt(omega)
    for i in range(n_spins):
        g[i, i] = amp
        g[i, (i + 1) % n_spins] = -amp
    return g


def ring_passage_params(n_spins: int, omega: float, s: float) -> SpinBosonParams:
    """Parameters of the mediated ring passage at schedule value ``s``."""
    return SpinBosonParams(
        couplings=ring_couplings(n_spins, omega, scale=s),
        field=np.zeros(n_spins),
        omega=np.full(n_spins, omega),
        omega0=1.0 - s,
    )


@dataclass(frozen=True)
class RingGeometry:
    """Odd antiferromagnetic ring with one mediating mode per bond."""

    n_spins: int
    omega: float

    def __post_init__(self):
        if self.n_spins < 3 or self.n_spins % 2 == 0:
            raise ValueError(f"ring needs an odd spin count >= 3, got {self.n_spins}")
        if self.omega <= 0:
            raise ValueError(f"mode energy must be positive, got {self.omega}")

    def couplings(self, scale: float = 1.0) -> np.ndarray:
        return ring_couplings(self.n_spins, self.omega, scale)

    def passage_params(self, s: float) -> SpinBosonParams:
        return ring_passage_params(self.n_spins, self.omega, s)


def target_afm(n_spins: int, basis: Basis) -> SparseOperator:
    """Frustrated target H0 = sum_i sigma_x^i sigma_x^{i+1} on the closed ring.

    Requires odd n_spins: the closure bond (n-1, 0) then frustrates the
    antiferromagnetic order, giving ground energy -(n_spins - 2) with a
    2 * n_spins fold degenerate manifold.
    """
    if n_spins % 2 == 0:
        raise ValueError(f"target ring must have an odd spin count, got {n_spins}")
    if n_spins != basis.n_spins:
        raise ValueError("spin count does not match basis")
    terms = [(1.0, [pauli(basis, "x", i), pauli(basis, "x", (i + 1) % n_spins)])
             for i in range(n_spins)]
    return combine(terms, basis)


def ising_passage(n_spins: int, s: float, basis: Basis) -> SparseOperator:
    """Direct passage H(s) = s * H0 + ((1 - s) / 2) sum_i sigma_z^i."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"schedule value s={s} outside [0, 1]")
    terms = [(s, [pauli(basis, "x", i), pauli(basis, "x", (i + 1) % n_spins)])
             for i in range(n_spins)]
    terms += [(0.5 * (1.0 - s), [pauli(basis, "z", i)]) for i in range(n_spins)]
    return combine(terms, basis)


def generic_spinboson(p: SpinBosonParams, basis: Basis) -> SparseOperator:
    """Spin-boson Hamiltonian for arbitrary couplings (docstring at module top)."""
    if basis.n_spins != p.n_spins or basis.n_modes != p.n_modes:
        raise ValueError("parameter shape does not match basis")
    terms = []
    for i in range(p.n_spins):
        sx = pauli(basis, "x", i)
        for r in range(p.n_modes):
            g = p.couplings[i, r]
            if g != 0:
                terms.append((g, [sx, boson(basis, r, "create")]))
                terms.append((np.conj(g), [sx, boson(basis, r, "annihilate")]))
        if p.field[i] != 0:
            terms.append((p.field[i], [sx]))
        if p.omega0 != 0:
            terms.append((0.5 * p.omega0, [pauli(basis, "z", i)]))
    for r in range(p.n_modes):
        terms.append((p.omega[r], [boson(basis, r, "number")]))
    return combine(terms, basis)


def spinboson_passage(n_spins: int, omega: float, s: float,
                      basis: Basis) -> SparseOperator:
    """Mediated passage at schedule value ``s``.

    H(s) = s sqrt(omega) sum_i sigma_x^i (b_i - b_{i+1} + h.c.)
           + ((1 - s) / 2) sum_i sigma_z^i + omega sum_r b_r^dag b_r
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"schedule value s={s} outside [0, 1]")
    return generic_spinboson(ring_passage_params(n_spins, omega, s), basis)


def ising_linear_parts(n_spins: int, basis: Basis) -> tuple[SparseOperator, SparseOperator]:
    """(A, B) with H(s) = A + s B for the direct passage."""
    a = combine([(0.5, [pauli(basis, "z", i)]) for i in range(n_spins)], basis)
    b_terms = [(1.0, [pauli(basis, "x", i), pauli(basis, "x", (i + 1) % n_spins)])
               for i in range(n_spins)]
    b_terms += [(-0.5, [pauli(basis, "z", i)]) for i in range(n_spins)]
    return a, combine(b_terms, basis)


def spinboson_linear_parts(n_spins: int, omega: float,
                           basis: Basis) -> tuple[SparseOperator, SparseOperator]:
    """(A, B) with H(s) = A + s B for the mediated passage."""
    a_terms = [(0.5, [pauli(basis, "z", i)]) for i in range(n_spins)]
    a_terms += [(omega, [boson(basis, r, "number")]) for r in range(n_spins)]
    a = combine(a_terms, basis)
    g = ring_couplings(n_spins, omega)
    b_terms = []
    for i in range(n_spins):
        sx = pauli(basis, "x", i)
        for r in range(n_spins):
            if g[i, r] != 0:
                b_terms.append((g[i, r], [sx, boson(basis, r, "create")]))
                b_terms.append((np.conj(g[i, r]), [sx, boson(basis, r, "annihilate")]))
    b_terms += [(-0.5, [pauli(basis, "z", i)]) for i in range(n_spins)]
    return a, combine(b_terms, basis)


def effective_coupling(p: SpinBosonParams) -> np.ndarray:
    """Mode-eliminated pair couplings J_ij = -sum_r Re(g_ir g_jr^*) / omega_r.

    Returned with zero diagonal: the i = j contribution is a state
    independent energy shift, not a coupling.  Diagnostic only; passages
    never substitute this for the full model.
    """
    j = -np.real(p.couplings @ np.diag(1.0 / p.omega) @ p.couplings.conj().T)
    np.fill_diagonal(j, 0.0)
    return j


def effective_field_prefactor(s: float, omega: float) -> float:
    """Dressed transverse-field magnitude along the mediated ring passage.

    The mode elimination multiplies the bare (1 - s) / 2 by the vacuum
    displacement overlap exp(-2 sum_r |g_ir / omega_r|^2); the ring pattern
    has two couplings of magnitude s sqrt(omega) per spin, giving
    exp(-4 s^2 / omega).  Diagnostic only.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"schedule value s={s} outside [0, 1]")
    if omega <= 0:
        raise ValueError(f"mode energy must be positive, got {omega}")
    return 0.5 * (1.0 - s) * float(np.exp(-4.0 * s * s / omega))
