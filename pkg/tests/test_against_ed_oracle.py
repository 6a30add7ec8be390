"""Cross-validation of the covariance machinery against brute-force
density-matrix evolution on the full 2^n Fock space (tests/oracle_ed.py).

These tests pin every sign and normalization convention at once:
matrix construction, steady state, time evolution, occupations,
correlators and currents, for both boundaries and for loss/gain mixes.
Chains are kept tiny (n <= 6 sites) so the oracle stays exact and fast.
"""

import numpy as np
import pytest

import oracle_ed as ed
from lskin.dynamics import correlator, current, occupation, simulate
from lskin.model import (ChainSpec, FullyFilled, Occupations, SingleParticle,
                         balanced, derive_rates, loss_only, site_count)
from lskin.steady import steady_covariance, steady_occupation

CASES = [
    ("obc mixed rates", ChainSpec(t1=1.0, t2=0.7, gl1=1.0, gg1=0.4,
                                  gl2=0.6, gg2=0.2, boundary="obc", n_cells=3)),
    ("pbc balanced", balanced(1.0, 0.8, 0.9, 0.3, boundary="pbc", n_cells=2)),
    ("obc loss-only", loss_only(1.0, 1.0, 0.2, 0.8, boundary="obc", n_cells=2)),
    ("pbc gain-heavy", ChainSpec(t1=0.6, t2=1.0, gl1=0.2, gg1=0.8,
                                 gl2=0.1, gg2=0.4, boundary="pbc", n_cells=2)),
    ("obc with on-site", ChainSpec(t1=1.0, t2=0.8, gl1=0.7, gg1=0.7,
                                   gl0=0.3, gg0=0.1, boundary="obc", n_cells=2)),
]


@pytest.mark.parametrize("name,spec", CASES, ids=[c[0] for c in CASES])
def test_occupations_and_current_match_exact_evolution(name, spec):
    n = site_count(spec)
    times = [0.0, 0.4, 1.1, 2.5]
    occupations = [1.0] * n
    a, states = ed.evolve(spec, occupations, times)
    traj = simulate(spec, FullyFilled(), times)
    for k, rho in enumerate(states):
        exact_n = np.array([np.trace(a[j].conj().T @ a[j] @ rho).real
                            for j in range(n)])
        assert np.max(np.abs(traj.occupations[k] - exact_n)) < 1e-8
        exact_j = ed.current_of(a, rho, spec.boundary)
        assert traj.current[k] == pytest.approx(exact_j, abs=1e-8)


def test_full_correlator_matches_exact_evolution():
    spec = ChainSpec(t1=1.0, t2=0.7, gl1=1.0, gg1=0.4, gl2=0.6, gg2=0.2,
                     boundary="obc", n_cells=3)
    n = site_count(spec)
    init = [1.0, 0.0, 1.0, 0.5, 0.25]
    times = [0.3, 1.7]
    a, states = ed.evolve(spec, init, times)
    traj_covs = simulate(spec, Occupations(tuple(init)), times)
    from lskin.dynamics import filling_covariance, mode_basis, evolve_modesum
    covs = evolve_modesum(spec, mode_basis(spec),
                          filling_covariance(Occupations(tuple(init)), n), times)
    for rho, cov in zip(states, covs):
        q_exact = ed.single_particle_correlator(a, rho)
        assert np.max(np.abs(correlator(cov) - q_exact)) < 1e-8
    # occupations come along for free
    assert np.max(np.abs(traj_covs.occupations[0] - np.diag(
        ed.single_particle_correlator(a, states[0])).real)) < 1e-8


def test_steady_state_matches_exact_long_time():
    spec = ChainSpec(t1=1.0, t2=0.7, gl1=1.0, gg1=0.4, gl2=0.6, gg2=0.2,
                     boundary="obc", n_cells=2)
    n = site_count(spec)
    a, states = ed.evolve(spec, [1.0] * n, [60.0])
    q_exact = ed.single_particle_correlator(a, states[0])
    q_steady = correlator(steady_covariance(spec))
    assert np.max(np.abs(q_steady - q_exact)) < 1e-8


def test_uniform_steady_occupation_in_solvable_limit():
    spec = ChainSpec(t1=0.9, t2=0.6, gl1=1.2, gg1=0.4, gl2=0.6, gg2=0.2,
                     boundary="obc", n_cells=2)  # equal loss/gain ratios
    rates = derive_rates(spec)
    assert rates.solvable
    n = site_count(spec)
    a, states = ed.evolve(spec, [0.0] * n, [80.0])
    exact_n = np.array([np.trace(a[j].conj().T @ a[j] @ states[0]).real
                        for j in range(n)])
    assert np.max(np.abs(exact_n - steady_occupation(rates))) < 1e-8


def test_single_particle_initial_state_matches():
    spec = loss_only(1.0, 1.0, 0.2, 0.8, boundary="obc", n_cells=3)
    n = site_count(spec)
    occ = [0.0] * n
    occ[2] = 1.0
    times = [0.5, 1.5]
    a, states = ed.evolve(spec, occ, times)
    traj = simulate(spec, SingleParticle(3), times)
    for k, rho in enumerate(states):
        exact_n = np.array([np.trace(a[j].conj().T @ a[j] @ rho).real
                            for j in range(n)])
        assert np.max(np.abs(traj.occupations[k] - exact_n)) < 1e-8
