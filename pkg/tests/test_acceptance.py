"""Acceptance gate: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line with the measured quantity so
a transcript of this file reads as the release checklist.  Operating
points (durations, grids, truncations) are pinned here on purpose; the
convergence tests in this file are the evidence that they are inside the
converged regime.
"""

import time
import warnings

import numpy as np
import pytest

from sbanneal import (IntegratorConfig, build_basis, eigen_lowest,
                      effective_coupling, ground_manifold, initial_state,
                      ising_passage, linear_spec, oracle_evolve, run_passage,
                      schedule_functions, spinboson_passage, sweep, tabulate)
from sbanneal.evolve import final_manifold, passage_basis
from sbanneal.models import (ising_linear_parts, ring_passage_params,
                             spinboson_linear_parts)
from sbanneal.spectrum import AmbiguousTargetWarning, classify_eigenstates

import oracle_tools as ot


def check(num, name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] acceptance {num}: {name} ({detail})")
    assert ok, f"acceptance {num}: {name} ({detail})"


def p_errors(spec, T_list, cfg=IntegratorConfig()):
    rows = sweep(spec, [float(t) for t in T_list], cfg)
    bad = [r.flags for r in rows if r.flags]
    assert not bad, f"sweep rows flagged: {bad}"
    return np.array([r.p_error for r in rows])


def test_criterion_01_quadratic_error_law_direct_passage():
    spec = linear_spec("ising_linear", 3, 1.0, 0)
    t_grid = np.geomspace(30.0, 100.0, 25)
    p = p_errors(spec, t_grid)
    slope = ot.fit_loglog_slope(t_grid, p)
    ok = abs(slope - (-2.0)) <= 0.15
    check(1, "direct-passage error falls as T^-2", ok, f"slope={slope:.4f}")


def test_criterion_02_ground_degeneracies(spin_basis_3, spin_basis_5,
                                          sb_basis_nmax4):
    sl3 = eigen_lowest(ising_passage(3, 1.0, spin_basis_3), 8, s=1.0)
    spread3 = float(sl3.energies[5] - sl3.energies[0])
    gap3 = float(sl3.energies[6] - sl3.energies[5])
    sl5 = eigen_lowest(ising_passage(5, 1.0, spin_basis_5), 12, s=1.0)
    spread5 = float(sl5.energies[9] - sl5.energies[0])
    gap5 = float(sl5.energies[10] - sl5.energies[9])
    man = ground_manifold(
        eigen_lowest(spinboson_passage(3, 10.0, 1.0, sb_basis_nmax4), 12, s=1.0),
        1e-6)
    ok = (spread3 <= 1e-10 and gap3 > 0.1 and spread5 <= 1e-10 and gap5 > 0.1
          and man.size == 6 and man.complete)
    check(2, "2N-fold final degeneracy, direct and mediated", ok,
          f"spread3={spread3:.2e} spread5={spread5:.2e} sb_manifold={man.size}")


def test_criterion_03_dispersive_regime_coincidence(fair_pair_10):
    t_grid = np.geomspace(1.0, 100.0, 20)
    p_sb = p_errors(fair_pair_10.spec_sb, t_grid)
    p_i = p_errors(fair_pair_10.spec_ising, t_grid)
    rel = np.abs(p_sb - p_i) / np.maximum(p_i, 1e-3)
    ok = bool(np.all(rel <= 0.2))
    check(3, "matched passages coincide at omega=10", ok,
          f"worst rel dev={rel.max():.4f} at T={t_grid[int(np.argmax(rel))]:.3f}")


def test_criterion_04_matched_passage_identities(fair_pair_1, fair_pair_3,
                                                 fair_pair_10):
    worst_o, worst_gap = 0.0, 0.0
    for pair in (fair_pair_1, fair_pair_3, fair_pair_10):
        t = pair.table
        worst_o = max(worst_o, float(np.max(np.abs(t.o_sb - t.o_ising))))
        worst_gap = max(worst_gap,
                        float(np.max(np.abs(t.c * t.gap_ising - t.gap_sb))))
    ok = worst_o <= 1e-3 and worst_gap <= 1e-8
    check(4, "node correlations equal, gaps rescaled exactly", ok,
          f"max|dO|={worst_o:.2e} max|c*gap_I-gap_SB|={worst_gap:.2e}")


def test_criterion_05_crossing_location(sb_basis_nmax4):
    # separation between the classified bands along the schedule axis; the
    # sampling is the default 201-point grid and the window holds every
    # band that exists below the spin-error line at s=1
    basis = sb_basis_nmax4
    end = eigen_lowest(spinboson_passage(3, 3.0, 1.0, basis), 8, s=1.0)
    projector = ground_manifold(end).spin_projector(basis)

    def band_separation(s):
        sl = eigen_lowest(spinboson_passage(3, 3.0, float(s), basis), 64, s=s)
        labels = classify_eigenstates(sl, projector)
        es = [j for j, name in enumerate(labels) if name == "excited_solution"]
        se = [j for j, name in enumerate(labels) if name == "spin_error"]
        if not es or not se:
            return np.nan
        return min(abs(sl.energies[a] - sl.energies[b])
                   for a in se for b in es)

    grid = np.linspace(0.0, 1.0, 201)
    seps = np.array([band_separation(s) for s in grid])
    s_star = float(grid[np.nanargmin(seps)])
    ok = 0.85 <= s_star <= 0.95
    check(5, "band crossing sits near the passage end", ok,
          f"argmin s={s_star:.4f}, min separation={np.nanmin(seps):.2e}")


def test_criterion_06_improvement_window_strong_coupling(fair_pair_1):
    t_short = [20.0]
    t_long = [90.0, 120.0]
    p_sb = p_errors(fair_pair_1.spec_sb, t_short + t_long)
    p_i = p_errors(fair_pair_1.spec_ising, t_short + t_long)
    improves = bool(p_sb[0] < p_i[0])
    limits = bool(np.all(p_sb[1:] > p_i[1:]))
    ok = improves and limits
    check(6, "mediated passage helps near T~20, hurts at large T", ok,
          f"T=20: sb={p_sb[0]:.6f} vs i={p_i[0]:.6f}; "
          f"T>=90: sb={p_sb[1:].round(6).tolist()} vs i={p_i[1:].round(6).tolist()}")


def test_criterion_07_integrator_matches_oracle():
    cases = [
        ("ising_linear", 2, 1.0, 0, 10.0),
        ("spinboson_linear", 2, 3.0, 4, 8.0),
        ("ising_linear", 3, 1.0, 0, 10.0),
        ("spinboson_linear", 3, 3.0, 2, 5.0),
    ]
    t0 = time.perf_counter()
    worst = 1.0
    cfg = IntegratorConfig(steps_per_unit_time=200)
    for kind, n_spins, omega, n_max, T in cases:
        spec = linear_spec(kind, n_spins, omega, n_max)
        basis = passage_basis(spec)
        assert basis.dim <= 1024
        res = run_passage(spec, T, cfg)
        s_fn, c_fn = schedule_functions(spec)

        if kind.startswith("spinboson"):
            part_a, part_b = spinboson_linear_parts(n_spins, omega, basis)
            full = lambda s: spinboson_passage(n_spins, omega, s, basis)
        else:
            part_a, part_b = ising_linear_parts(n_spins, basis)
            full = lambda s: ising_passage(n_spins, s, basis)
        a_d, b_d = part_a.matrix.toarray(), part_b.matrix.toarray()
        # affine assembly must reproduce the standalone constructors before
        # the oracle is allowed to lean on it
        for s_chk in (0.0, 0.37, 1.0):
            delta = np.abs(a_d + s_chk * b_d - full(s_chk).matrix.toarray())
            assert delta.max() <= 1e-13

        def h_of_t(t):
            lam = t / T
            return (a_d + float(s_fn(lam)) * b_d) * float(c_fn(lam))

        steps = int(np.ceil(T * cfg.steps_per_unit_time))
        psi_ref = oracle_evolve(h_of_t, initial_state(spec, basis), T, steps)
        worst = min(worst, float(np.abs(np.vdot(res.final_state, psi_ref)) ** 2))
    elapsed = time.perf_counter() - t0
    ok = worst >= 1.0 - 1e-8 and elapsed < 60.0
    check(7, "stepped integrator agrees with the exponential oracle", ok,
          f"worst fidelity deficit={1.0 - worst:.2e}, elapsed={elapsed:.1f}s")


def test_criterion_08_convergence_contracts(fair_pair_3, fair_pair_3_fine):
    halved, doubled = IntegratorConfig(200), IntegratorConfig(400)
    step_devs = []
    for spec in (fair_pair_3.spec_sb, linear_spec("ising_linear", 3, 1.0, 0)):
        a = run_passage(spec, 50.0, halved).p_error
        b = run_passage(spec, 50.0, doubled).p_error
        step_devs.append(abs(a - b))
    step_dev = max(step_devs)

    p4 = run_passage(linear_spec("spinboson_linear", 3, 1.0, 4), 50.0).p_error
    p6 = run_passage(linear_spec("spinboson_linear", 3, 1.0, 6), 50.0).p_error
    trunc_dev = abs(p4 - p6)

    grid_devs = []
    for coarse, fine in ((fair_pair_3.spec_sb, fair_pair_3_fine.spec_sb),
                         (fair_pair_3.spec_ising, fair_pair_3_fine.spec_ising)):
        pc = run_passage(coarse, 20.0).p_error
        pf = run_passage(fine, 20.0).p_error
        grid_devs.append(abs(pc - pf) / pf)
    grid_dev = max(grid_devs)

    ok = step_dev < 1e-4 and trunc_dev < 1e-3 and grid_dev < 0.05
    check(8, "step, truncation, and grid refinements leave errors fixed", ok,
          f"step={step_dev:.2e} n_max={trunc_dev:.2e} grid={grid_dev:.2%}")


def test_criterion_09_mode_eliminated_coupling():
    worst = 0.0
    for n_spins in (3, 5):
        adjacency = np.zeros((n_spins, n_spins))
        for i in range(n_spins):
            adjacency[i, (i + 1) % n_spins] = 1.0
            adjacency[(i + 1) % n_spins, i] = 1.0
        for omega in (1.0, 10.0):
            for s in (0.0, 0.3, 1.0):
                j = effective_coupling(ring_passage_params(n_spins, omega, s))
                worst = max(worst, float(np.max(np.abs(j - s * s * adjacency))))
    ok = worst <= 1e-14
    check(9, "eliminating the modes leaves J = s^2 per ring bond", ok,
          f"max deviation={worst:.2e}")


def test_note_n5_gap_curves_at_desk_scale(spin_basis_5):
    # five-spin check with two-quantum ladders: the mediated relevant gap
    # dips below the direct passage's minimum in the window where the
    # matched identification is unambiguous; past s ~ 0.7 this truncation
    # is too tight for a clean match and the tabulation flags it
    gap_i = tabulate("ising", "relevant_gap", np.linspace(0, 1, 15), n_spins=5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmbiguousTargetWarning)
        gap_sb = tabulate("spinboson", "relevant_gap",
                          np.linspace(0.0, 1.0, 21), n_spins=5, omega=4.0,
                          n_max=2)
    window = gap_sb.grid <= 0.7 + 1e-12
    sb_vals = gap_sb.values[window]
    jumps_i = np.abs(np.diff(gap_i.values))
    jumps_sb = np.abs(np.diff(sb_vals))
    interior = int(np.argmin(sb_vals)) not in (0, len(sb_vals) - 1)
    ok = (jumps_i.max() <= 10 * np.median(jumps_i)
          and jumps_sb.max() <= 10 * np.median(jumps_sb)
          and interior
          and sb_vals.min() < gap_i.values.min())
    check("N=5", "mediated gap dips below the direct minimum", ok,
          f"sb_min={sb_vals.min():.4f} ising_min={gap_i.values.min():.4f}")
