import math

import numpy as np
import pytest

from lskin.builders import assemble_xy, build_damping
from lskin.errors import (ConfigError, NotSolvableError, SingularSylvesterError,
                          UnsupportedBranchError)
from lskin.model import ChainSpec, balanced, derive_rates, loss_only, site_count
from lskin.steady import (classify_ness, covariance_solvable, quasi_current_correction,
                          solve_sylvester, steady_covariance, steady_current,
                          steady_occupation)


def sylvester_residual(spec):
    X, Y = assemble_xy(build_damping(spec))
    cov = solve_sylvester(X, Y)
    return float(np.max(np.abs(X.conj().T @ cov.C + cov.C @ X - 1j * Y)))


def test_generic_solve_residual():
    spec = ChainSpec(t1=1.0, t2=0.7, gl1=1.0, gg1=0.5, gl2=0.3, gg2=0.1,
                     boundary="obc", n_cells=3)
    assert not derive_rates(spec).solvable
    assert sylvester_residual(spec) < 1e-10


def test_random_gapped_specs_residual():
    rng = np.random.default_rng(11)
    done = 0
    while done < 30:
        spec = ChainSpec(t1=rng.uniform(-2, 2), t2=rng.uniform(-2, 2),
                         gl1=rng.uniform(0, 2), gg1=rng.uniform(0, 2),
                         gl2=rng.uniform(0, 2), gg2=rng.uniform(0, 2),
                         boundary=rng.choice(["pbc", "obc"]),
                         n_cells=int(rng.integers(2, 7)))
        try:
            res = sylvester_residual(spec)
        except SingularSylvesterError:
            continue
        assert res < 1e-10
        done += 1


def test_covariance_properties():
    spec = ChainSpec(t1=1.0, t2=0.7, gl1=1.0, gg1=0.5, gl2=0.3, gg2=0.1,
                     boundary="obc", n_cells=4)
    cov = steady_covariance(spec)
    anti, realpart = cov.residuals()
    assert anti < 1e-10 and realpart < 1e-10
    assert math.isinf(cov.t)


def test_solvable_balanced_is_zero():
    r = derive_rates(balanced(1.0, 1.0, 0.7, 0.2))
    cov = covariance_solvable(r, 5)
    assert np.max(np.abs(cov.C)) == 0.0


def test_solvable_loss_only_is_maximal():
    spec = loss_only(1.0, 1.0, 0.3, 0.4, boundary="obc", n_cells=3)
    n = site_count(spec)
    cov = covariance_solvable(derive_rates(spec), n)
    assert np.allclose(cov.C[:n, n:], 1j * np.eye(n))


def test_solvable_matches_generic_solver():
    # loss-only rates of the strong-skin figure: ratio factor i
    spec = loss_only(1.0, 1.0, 0.2, 0.8, boundary="obc", n_cells=4)
    n = site_count(spec)
    analytic = covariance_solvable(derive_rates(spec), n)
    X, Y = assemble_xy(build_damping(spec))
    generic = solve_sylvester(X, Y)
    assert np.max(np.abs(analytic.C - generic.C)) < 1e-10


def test_not_solvable_refused():
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=1.0, gg1=0.5, gl2=0.3, gg2=0.1))
    with pytest.raises(NotSolvableError):
        covariance_solvable(r, 4)


def test_singular_at_closed_gap():
    spec = ChainSpec(t1=1.0, t2=1.0, gl1=1.9, gg1=1.1, gl2=0.7, gg2=0.3,
                     boundary="pbc", n_cells=4)
    with pytest.raises(SingularSylvesterError):
        solve_sylvester(*assemble_xy(build_damping(spec)))


def test_steady_occupation():
    assert steady_occupation(derive_rates(balanced(1, 1, 0.3, 0.1))) == 0.5
    assert steady_occupation(derive_rates(loss_only(1, 1, 0.3, 0.1))) == 0.0
    gain_only = ChainSpec(t1=1, t2=1, gl1=0.0, gg1=0.6)
    assert steady_occupation(derive_rates(gain_only)) == 1.0
    with pytest.raises(ConfigError):
        steady_occupation(derive_rates(ChainSpec(t1=1, t2=1)))


def test_occupation_invariant_under_rate_rescaling():
    a = derive_rates(ChainSpec(t1=1, t2=1, gl1=0.8, gg1=0.2, gl2=0.4, gg2=0.1))
    b = derive_rates(ChainSpec(t1=1, t2=1, gl1=8.0, gg1=2.0, gl2=4.0, gg2=1.0))
    assert steady_occupation(a) == pytest.approx(steady_occupation(b), abs=1e-15)


def test_classification():
    assert classify_ness(balanced(1.0, 1.0, 1.5, 0.5, boundary="obc", n_cells=8)).kind == "unique"
    deg = classify_ness(balanced(1.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=8))
    assert deg.kind == "degenerate"
    assert deg.modes[0].q == pytest.approx(-math.pi)
    assert classify_ness(balanced(2.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=8)).kind == "unique"
    quasi = classify_ness(balanced(0.5, 1.0, 1.5, 0.0, boundary="pbc", n_cells=8))
    assert quasi.kind == "quasi"
    assert quasi.frequency == pytest.approx(math.sqrt(0.75))
    qstar = math.acos(-0.5)
    assert sorted(m.q for m in quasi.modes) == pytest.approx([-qstar, qstar])
    # one undissipated bond, |t1| = |t2| extends the degenerate point
    deg2 = classify_ness(balanced(-1.0, 1.0, 1.5, 0.0, boundary="pbc", n_cells=8))
    assert deg2.kind == "degenerate" and deg2.modes[0].q == pytest.approx(0.0)
    # bond-swapped case via spectral symmetry
    quasi2 = classify_ness(balanced(1.0, 0.5, 0.0, 1.5, boundary="pbc", n_cells=8))
    assert quasi2.kind == "quasi"
    assert quasi2.frequency == pytest.approx(math.sqrt(0.75))
    # on-site dissipation gaps everything
    spec0 = ChainSpec(t1=1.0, t2=1.0, gl1=1.5, gg1=1.5, gl2=0.5, gg2=0.5,
                      gl0=0.1, gg0=0.1, boundary="pbc", n_cells=8)
    assert classify_ness(spec0).kind == "unique"


def test_steady_current_values():
    # degenerate point, balanced rates: 1/(2N)
    assert steady_current(balanced(1.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=12)) \
        == pytest.approx(1 / 24)
    # independent of dissipation strengths at eta = 0
    a = steady_current(balanced(1.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=12))
    b = steady_current(balanced(1.0, 1.0, 0.02, 0.01, boundary="pbc", n_cells=12))
    assert abs(a - b) < 1e-9
    # t1 = -t2 with g2 = 0 carries nothing
    assert steady_current(balanced(-1.0, 1.0, 1.5, 0.0, boundary="pbc", n_cells=12)) == 0.0
    # quasi window leading order
    assert steady_current(balanced(0.5, 1.0, 1.5, 0.0, boundary="pbc", n_cells=32)) \
        == pytest.approx(1.5 / 64)
    # loss-only prefactor (g + e)/g = 2
    assert steady_current(loss_only(1.0, 1.0, 0.2, 0.8, boundary="pbc", n_cells=14)) \
        == pytest.approx(2 / 28)
    # open chain and gapped periodic chain carry nothing
    assert steady_current(balanced(1.0, 1.0, 1.5, 0.5, boundary="obc", n_cells=12)) == 0.0
    assert steady_current(balanced(2.0, 1.0, 1.5, 0.0, boundary="pbc", n_cells=12)) == 0.0


def test_steady_current_unsupported():
    # quasi window reached through the undissipated first bond: no closed form
    with pytest.raises(UnsupportedBranchError):
        steady_current(balanced(2.0, 1.0, 0.0, 1.5, boundary="pbc", n_cells=8))


def test_quasi_current_correction_bounded():
    spec = balanced(0.5, 1.0, 1.5, 0.0, boundary="pbc", n_cells=32)
    lead = steady_current(spec)
    alpha = math.sqrt(1 - 0.25)
    bound = (1.5 + alpha) / (2 * 32 ** 2)
    for t in np.linspace(0.0, 50.0, 200):
        assert abs(quasi_current_correction(spec, t)) <= bound + 1e-12
    assert lead == pytest.approx(1.5 / 64)
