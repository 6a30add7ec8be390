import math

import pytest
from hypothesis import given, strategies as st

from lskin.errors import ConfigError
from lskin.model import (ChainSpec, FullyFilled, Occupations, SingleParticle,
                         balanced, derive_rates, loss_only, occupation_vector,
                         site_count)

rates_st = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


def test_balanced_rates_fig7():
    # gl1 = gg1 = 1.5, gl2 = gg2 = 0.5 -> g1 = 1.5, g2 = 0.5, e = 0, g = 2
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=1.5, gg1=1.5, gl2=0.5, gg2=0.5))
    assert r.g1 == 1.5 and r.g2 == 0.5
    assert r.e1 == 0.0 and r.e2 == 0.0
    assert r.g == 2.0 and r.e == 0.0
    assert r.solvable


def test_all_rates_zero_is_trivially_solvable():
    r = derive_rates(ChainSpec(t1=1, t2=1))
    assert r.g == 0.0 and r.e == 0.0
    assert r.solvable


def test_loss_only_rates():
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=0.4, gg1=0.0, gl2=1.6, gg2=0.0))
    assert r.g1 == pytest.approx(0.2) and r.e1 == pytest.approx(0.2)
    assert r.g2 == pytest.approx(0.8) and r.e2 == pytest.approx(0.8)
    assert r.g == pytest.approx(1.0) and r.e == pytest.approx(1.0)
    assert r.solvable


def test_mixed_ratios_not_solvable():
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=1.0, gg1=0.5, gl2=0.3, gg2=0.1))
    assert not r.solvable


def test_single_bond_dissipation_always_solvable():
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=0.7, gg1=0.1))
    assert r.g2 == 0.0 and r.solvable


def test_site_count():
    assert site_count(ChainSpec(t1=1, t2=1, boundary="pbc", n_cells=12)) == 24
    assert site_count(ChainSpec(t1=1, t2=1, boundary="obc", n_cells=12)) == 23
    assert site_count(ChainSpec(t1=1, t2=1, boundary="obc", n_cells=2)) == 3


@given(gl1=rates_st, gg1=rates_st, gl2=rates_st, gg2=rates_st)
def test_imbalance_bounded_by_total(gl1, gg1, gl2, gg2):
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=gl1, gg1=gg1, gl2=gl2, gg2=gg2))
    assert abs(r.e1) <= r.g1 + 1e-12
    assert abs(r.e2) <= r.g2 + 1e-12
    # equality only when one of loss/gain vanishes
    if gl1 > 1e-9 and gg1 > 1e-9:
        assert abs(r.e1) < r.g1


@given(gl1=rates_st, gg1=rates_st, gl2=rates_st, gg2=rates_st)
def test_solvable_symmetric_under_bond_swap(gl1, gg1, gl2, gg2):
    a = derive_rates(ChainSpec(t1=1, t2=1, gl1=gl1, gg1=gg1, gl2=gl2, gg2=gg2))
    b = derive_rates(ChainSpec(t1=1, t2=1, gl1=gl2, gg1=gg2, gl2=gl1, gg2=gg1))
    assert a.solvable == b.solvable


def test_validation():
    with pytest.raises(ConfigError):
        ChainSpec(t1=1, t2=1, gl1=-0.1)
    with pytest.raises(ConfigError):
        ChainSpec(t1=1, t2=1, boundary="ring")
    with pytest.raises(ConfigError):
        ChainSpec(t1=1, t2=1, n_cells=1)


def test_occupation_vectors():
    assert occupation_vector(FullyFilled(), 3) == [1.0, 1.0, 1.0]
    assert occupation_vector(SingleParticle(2), 3) == [0.0, 1.0, 0.0]
    assert occupation_vector(Occupations((0.25, 1.0, 0.0)), 3) == [0.25, 1.0, 0.0]
    with pytest.raises(ConfigError):
        occupation_vector(SingleParticle(4), 3)
    with pytest.raises(ConfigError):
        occupation_vector(Occupations((0.5, 1.2, 0.0)), 3)
    with pytest.raises(ConfigError):
        occupation_vector(Occupations((0.5,)), 3)


def test_helper_constructors():
    lo = loss_only(1.0, 1.0, 0.2, 0.8)
    r = derive_rates(lo)
    assert (r.g1, r.e1, r.g2, r.e2) == (0.2, 0.2, 0.8, 0.8)
    ba = balanced(1.0, 1.0, 0.2, 0.8)
    r = derive_rates(ba)
    assert (r.g1, r.e1, r.g2, r.e2) == (0.2, 0.0, 0.8, 0.0)


def test_onsite_rates_enter_totals():
    r = derive_rates(ChainSpec(t1=1, t2=1, gl1=1.0, gg1=1.0, gl0=0.3, gg0=0.1))
    assert r.g0 == pytest.approx(0.2)
    assert r.e0 == pytest.approx(0.1)
    assert r.g == pytest.approx(1.2)
    assert r.e_total == pytest.approx(0.1)
    assert math.isclose(r.e, 0.0, abs_tol=1e-15)
