"""Annealing passages for a frustrated antiferromagnetic spin ring,
with the couplings realized either directly or through bosonic modes.

The package builds truncated spin-boson Hamiltonians, extracts the
low spectrum and the gap to the relevant excited state, constructs
matched passage pairs that traverse the same correlation curve, and
integrates the Schrodinger equation to get error probabilities.
"""

from .evolve import (
    EvolutionResult,
    IntegratorConfig,
    initial_state,
    oracle_evolve,
    population_trace,
    run_passage,
    sweep,
)
from .hilbert import Basis, SparseOperator, boson, build_basis, combine, identity, pauli
from .models import (
    RingGeometry,
    SpinBosonParams,
    effective_coupling,
    effective_field_prefactor,
    generic_spinboson,
    ising_passage,
    spinboson_passage,
    target_afm,
)
from .passage import (
    Curve,
    FairPair,
    PassageSpec,
    build_fair_pair,
    invert_monotone,
    linear_spec,
    schedule_eval,
    schedule_functions,
    tabulate,
)
from .spectrum import (
    SpectrumSlice,
    classify_eigenstates,
    eigen_lowest,
    ground_manifold,
    match_target_state,
    relevant_gap_ising,
    track_bands,
)

__version__ = "0.1.0"
