"""Composite spin-boson Hilbert space and sparse operator construction.

The composite space is spins x modes with the spin block as the
fastest-varying factor: a basis index decomposes as

    index = spin_index + 2**n_spins * boson_index

where spin_index treats site 0 as the least significant 2-state digit and
boson_index treats mode 0 as the least significant (n_max + 1)-state digit.
Spin digit 0 is |down> with sigma_z |down> = -|down>, so the all-down,
all-vacuum product state is basis vector 0.

Bosonic modes use a hard Fock cutoff: the raising operator annihilates
|n_max>.  All operators are CSR matrices in canonical form so identical
construction sequences give identical entry ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

MAX_DIMENSION = 2**24

_PAULI = {
    # basis order (|down>, |up>)
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex),
}


@dataclass(frozen=True)
class Basis:
    """Labeling of the composite spin-boson product basis."""

    n_spins: int
    n_modes: int
    n_max: int

    @property
    def spin_dim(self) -> int:
        return 2**self.n_spins

    @property
    def boson_dim(self) -> int:
        return (self.n_max + 1) ** self.n_modes

    @property
    def dim(self) -> int:
        return self.spin_dim * self.boson_dim

    def encode(self, spins: Sequence[int], occupations: Sequence[int]) -> int:
        """Map digit tuples to the composite basis index.

        Args:
            spins: length n_spins sequence of 0 (down) / 1 (up), site 0 first.
            occupations: length n_modes sequence of Fock occupations, mode 0
                first, each in 0..n_max.
        """
        if len(spins) != self.n_spins or len(occupations) != self.n_modes:
            raise ValueError("digit tuple lengths do not match the basis")
        spin_index = 0
        for i, b in enumerate(spins):
            if b not in (0, 1):
                raise ValueError(f"spin digit {b!r} at site {i} is not 0/1")
            spin_index += b << i
        boson_index = 0
        for r, n in enumerate(occupations):
            if not 0 <= n <= self.n_max:
                raise ValueError(f"occupation {n!r} at mode {r} outside 0..{self.n_max}")
            boson_index += n * (self.n_max + 1) ** r
        return spin_index + self.spin_dim * boson_index

    def decode(self, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Inverse of :meth:`encode`."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} outside 0..{self.dim - 1}")
        spin_index = index % self.spin_dim
        boson_index = index // self.spin_dim
        spins = tuple((spin_index >> i) & 1 for i in range(self.n_spins))
        occs = []
        for _ in range(self.n_modes):
            occs.append(boson_index % (self.n_max + 1))
            boson_index //= self.n_max + 1
        return spins, tuple(occs)


def build_basis(n_spins: int, n_modes: int, n_max: int,
                max_dim: int = MAX_DIMENSION) -> Basis:
    """Validate counts and return the basis labeling.

    Raises:
        ValueError: on nonsensical counts or when the composite dimension
            exceeds ``max_dim`` ("dimension too large").
    """
    if n_spins < 1:
        raise ValueError(f"need at least one spin, got {n_spins}")
    if n_modes < 0:
        raise ValueError(f"negative mode count {n_modes}")
    if n_max < 0:
        raise ValueError(f"negative Fock cutoff {n_max}")
    basis = Basis(n_spins, n_modes, n_max)
    if basis.dim > max_dim:
        raise ValueError(
            f"dimension too large: 2^{n_spins} * {n_max + 1}^{n_modes} "
            f"= {basis.dim} exceeds cap {max_dim}"
        )
    return basis


@dataclass(frozen=True)
class SparseOperator:
    """A CSR operator bound to its basis.  Treated as immutable once built."""

    basis: Basis
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def dot(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix.dot(vec)

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix.dot(vec)))

    def hermiticity_defect(self) -> float:
        """max |H - H^dagger| over entries; 0 for exactly Hermitian input."""
        d = self.matrix - self.matrix.getH()
        return 0.0 if d.nnz == 0 else float(np.max(np.abs(d.data)))


def _canonical(m: sp.spmatrix, basis: Basis) -> SparseOperator:
    csr = sp.csr_matrix(m)
    csr.sum_duplicates()
    csr.sort_indices()
    return SparseOperator(basis, csr)


def _embed_spin(local: np.ndarray, site: int, basis: Basis) -> sp.csr_matrix:
    left = sp.identity(2 ** (basis.n_spins - 1 - site), format="csr", dtype=complex)
    right = sp.identity(2**site, format="csr", dtype=complex)
    spin_part = sp.kron(left, sp.kron(sp.csr_matrix(local), right, format="csr"),
                        format="csr")
    boson_eye = sp.identity(basis.boson_dim, format="csr", dtype=complex)
    return sp.kron(boson_eye, spin_part, format="csr")


def _embed_mode(local: np.ndarray, mode: int, basis: Basis) -> sp.csr_matrix:
    width = basis.n_max + 1
    left = sp.identity(width ** (basis.n_modes - 1 - mode), format="csr", dtype=complex)
    right = sp.identity(width**mode, format="csr", dtype=complex)
    boson_part = sp.kron(left, sp.kron(sp.csr_matrix(local), right, format="csr"),
                         format="csr")
    spin_eye = sp.identity(basis.spin_dim, format="csr", dtype=complex)
    return sp.kron(boson_part, spin_eye, format="csr")


def pauli(basis: Basis, axis: str, site: int) -> SparseOperator:
    """Pauli operator on one site, identity elsewhere.

    ``axis`` is one of 'x', 'y', 'z'.  Convention: sigma_z |down> = -|down>.
    """
    if axis not in _PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}, expected one of x, y, z")
    if not 0 <= site < basis.n_spins:
        raise ValueError(f"site {site} outside 0..{basis.n_spins - 1}")
    return _canonical(_embed_spin(_PAULI[axis], site, basis), basis)


def boson(basis: Basis, mode: int, kind: str) -> SparseOperator:
    """Ladder or number operator on one mode under the hard Fock cutoff.

    ``kind`` is one of 'annihilate', 'create', 'number'.  The cutoff makes
    create |n_max> = 0, so create is not the exact adjoint action on the
    discarded tail; within the kept space the pair is mutually adjoint.
    """
    if not 0 <= mode < basis.n_modes:
        raise ValueError(f"mode {mode} outside 0..{basis.n_modes - 1}")
    width = basis.n_max + 1
    if kind == "annihilate":
        local = np.diag(np.sqrt(np.arange(1, width, dtype=float)), k=1).astype(complex)
    elif kind == "create":
        local = np.diag(np.sqrt(np.arange(1, width, dtype=float)), k=-1).astype(complex)
    elif kind == "number":
        local = np.diag(np.arange(width, dtype=float)).astype(complex)
    else:
        raise ValueError(f"unknown boson operator kind {kind!r}")
    return _canonical(_embed_mode(local, mode, basis), basis)


def identity(basis: Basis) -> SparseOperator:
    return _canonical(sp.identity(basis.dim, format="csr", dtype=complex), basis)


def combine(terms: Iterable[tuple[complex, Sequence[SparseOperator]]],
            basis: Basis | None = None) -> SparseOperator:
    """Sum of coefficient * operator-product terms on a shared basis.

    Each term is (coefficient, [op, op, ...]); the operator list is applied
    as a matrix product left to right.  An empty term list yields the zero
    operator, in which case ``basis`` must be supplied.
    """
    acc = None
    for coeff, ops in terms:
        if not ops:
            raise ValueError("term with empty operator product")
        prod = ops[0].matrix
        for op in ops[1:]:
            if op.basis != ops[0].basis:
                raise ValueError("operator product mixes bases")
            prod = prod @ op.matrix
        if basis is None:
            basis = ops[0].basis
        elif ops[0].basis != basis:
            raise ValueError("term basis does not match combine basis")
        term = complex(coeff) * prod
        acc = term if acc is None else acc + term
    if acc is None:
        if basis is None:
            raise ValueError("empty term list needs an explicit basis")
        acc = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    return _canonical(acc, basis)
