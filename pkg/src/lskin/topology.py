"""Winding number, topological regime, skin parameters and spectral gaps.

The spectral winding of the Bloch block det H_S(q) is computed by phase
accumulation around the Brillouin zone, which is branch-cut free and
stable near large winding gradients.  The closed-form gaps are
thermodynamic-limit envelopes of the rapidity spectra; finite grids can
only exceed them, with an O(1/N^2) band-edge discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DetZeroError, UnsupportedBranchError
from .model import ChainSpec, OBC, PBC, derive_rates
from .solver import localization_factor, obc_energy_sq, pbc_energy_sq, rapidities_closed_form


@dataclass(frozen=True)
class SkinParameters:
    """Boundary-mode factors r_R/r_L, bulk factor r (r^2 = r_R/r_L) and the
    correlation length xi = 2/|ln|r^2||; xi is inf when |r^2| = 1."""

    rR: complex
    rL: complex
    r: complex
    r2: complex
    xi: float
    extreme: bool  # r^2 in {0, inf}: exceptional point, total one-way hopping


@dataclass(frozen=True)
class EpReport:
    """Exceptional-point proximity: matched conditions t_i = +-g_i and the
    count of linearly independent eigenstates the spectrum collapses to
    (three when one bond is exceptional, one when both are)."""

    matches: list[tuple[int, int]]  # (bond index, sign)
    distances: tuple[float, float, float, float]  # |t1-g1|, |t1+g1|, |t2-g2|, |t2+g2|
    collapse_count: int | None


@dataclass(frozen=True)
class TopologyReport:
    nu: int
    topological: bool | None
    rR: complex
    rL: complex
    r: complex
    r2: complex
    xi: float
    ep_distances: tuple[float, float, float, float]


@dataclass(frozen=True)
class GapReport:
    """delta_obc / delta_pbc are closed forms (delta_pbc requires g2 = 0);
    delta_numeric is 2*min Re(beta) over the finite closed-form grid at the
    spec's own boundary; tc is the PBC branch-crossover hopping."""

    delta_obc: float
    delta_pbc: float | None
    delta_numeric: float
    tc: float | None


def winding_number(spec: ChainSpec, grid: int = 500) -> int:
    """Accumulated phase of det H_S(q) = -(a(q) b(q)) over the Brillouin
    zone, rounded to the nearest integer."""
    if grid < 100:
        raise ConfigError("winding grid must be >= 100")
    r = derive_rates(spec)
    t1, t2, g1, g2 = spec.t1, spec.t2, r.g1, r.g2
    q = 2.0 * np.pi * np.arange(grid + 1) / grid - np.pi
    a = (t1 + g1) + (t2 - g2) * np.exp(-1.0j * q)
    b = (t1 - g1) + (t2 + g2) * np.exp(1.0j * q)
    det = -a * b
    if np.min(np.abs(det)) < 1e-12:
        raise DetZeroError("det H_S(q) vanishes on the grid: phase boundary")
    phases = np.angle(det[1:] / det[:-1])
    total = float(np.sum(phases))
    return int(round(total / (2.0 * np.pi)))


def skin_parameter(spec: ChainSpec) -> SkinParameters:
    r = derive_rates(spec)
    t1, t2, g1, g2 = spec.t1, spec.t2, r.g1, r.g2
    m = (t1 - g1) * (t2 - g2)
    p = (t1 + g1) * (t2 + g2)
    if m == 0.0 and p == 0.0:
        raise ConfigError("skin parameter undefined: both hopping products vanish")
    rR = -(t1 - g1) / (t2 + g2) if t2 + g2 != 0.0 else complex(math.inf)
    rL = -(t1 + g1) / (t2 - g2) if t2 - g2 != 0.0 else complex(math.inf)
    r2 = m / p if p != 0.0 else complex(math.inf)
    rloc = localization_factor(t1, t2, g1, g2) if p != 0.0 else complex(math.inf)
    extreme = abs(r2) == 0.0 or not math.isfinite(abs(r2))
    if extreme:
        xi = 0.0
    elif abs(r2) == 1.0:
        xi = math.inf
    else:
        xi = 2.0 / abs(math.log(abs(r2)))
    return SkinParameters(rR=complex(rR), rL=complex(rL), r=rloc,
                          r2=complex(r2), xi=xi, extreme=extreme)


def topological_regime(spec: ChainSpec, tol: float = 1e-12) -> bool | None:
    """Winding-regime inequalities, cross-checked against the boundary-mode
    localization criterion sgn(ln|r_L|) != sgn(ln|r_R|).

    Returns None on a phase boundary (any inequality degenerate).  Bond
    rates are non-negative here, so the g1*g2 >= 0 premise always holds.
    """
    r = derive_rates(spec)
    t1, t2, g1, g2 = abs(spec.t1), abs(spec.t2), abs(r.g1), abs(r.g2)
    prod = spec.t1 * spec.t2

    sk = skin_parameter(spec)
    aR, aL = abs(sk.rR), abs(sk.rL)
    if (abs(aR - 1.0) <= tol or abs(aL - 1.0) <= tol
            or aR == 0.0 or aL == 0.0
            or not math.isfinite(aR) or not math.isfinite(aL)):
        return None
    localized_split = (aR - 1.0) * (aL - 1.0) < 0.0

    dt, dg = abs(t1 - t2), abs(g1 - g2)
    st, sg = t1 + t2, g1 + g2
    edges = [abs(dt - sg), abs(dg - st), abs(dt - dg), abs(sg - st)]
    if abs(prod) <= tol or min(edges) <= tol:
        return localized_split if abs(prod) > tol else None
    if prod > 0.0:
        by_inequalities = dt < sg and dg < st
    else:
        by_inequalities = (dt < dg and sg < st) or (dt > dg and sg > st)
    if by_inequalities != localized_split:
        raise AssertionError(
            "winding inequalities disagree with boundary-mode localization")
    return by_inequalities


def _obc_gap(t1: float, t2: float, g1: float, g2: float, g: float) -> float:
    gap = 2.0 * g
    for t, gi in ((t1, g1), (t2, g2)):
        if gi > abs(t):  # theta(g_i - |t_i|); the EP itself contributes 0
            gap -= 2.0 * math.sqrt(gi ** 2 - t ** 2)
    return gap


def _pbc_gap_g2_zero(t1: float, t2: float, g1: float) -> tuple[float, float]:
    at1, at2 = abs(t1), abs(t2)
    tc = 0.5 * (at2 + math.sqrt(t2 ** 2 + 4.0 * g1 ** 2))
    if at1 <= at2:
        return 0.0, tc
    if at1 <= tc:
        return 2.0 * g1 - 2.0 * math.sqrt(max(g1 ** 2 - (at1 - at2) ** 2, 0.0)), tc
    return 2.0 * g1 - 2.0 * g1 * at2 / math.sqrt(t1 ** 2 - g1 ** 2), tc


def gap_closed_form(spec: ChainSpec) -> GapReport:
    """Closed-form Liouvillian gaps plus the finite-grid numeric gap.

    The PBC closed form exists only for g2 = 0 (three branches meeting at
    t_c); with g2 != 0 the report carries delta_pbc = None and the numeric
    gap still describes the spec's own boundary.  On-site dissipation adds
    a uniform 2*g0 to every branch.
    """
    r = derive_rates(spec)
    delta_obc = _obc_gap(spec.t1, spec.t2, r.g1, r.g2, r.g)
    if r.g2 == 0.0:
        branch, tc = _pbc_gap_g2_zero(spec.t1, spec.t2, r.g1)
        delta_pbc: float | None = branch + 2.0 * r.g0
        tc_out: float | None = tc
    else:
        delta_pbc, tc_out = None, None
    betas = rapidities_closed_form(spec).betas
    delta_numeric = 2.0 * float(np.min(betas.real))
    return GapReport(delta_obc=delta_obc, delta_pbc=delta_pbc,
                     delta_numeric=delta_numeric, tc=tc_out)


def pbc_gap_branch(spec: ChainSpec) -> float:
    """Closed-form PBC gap; raises when no branch covers these rates."""
    r = derive_rates(spec)
    if r.g2 != 0.0:
        raise UnsupportedBranchError("PBC gap closed form requires g2 = 0")
    return _pbc_gap_g2_zero(spec.t1, spec.t2, r.g1)[0] + 2.0 * r.g0


def classify_ep(spec: ChainSpec, tol: float) -> EpReport:
    if tol <= 0.0:
        raise ConfigError("tolerance must be positive")
    r = derive_rates(spec)
    d = (abs(spec.t1 - r.g1), abs(spec.t1 + r.g1),
         abs(spec.t2 - r.g2), abs(spec.t2 + r.g2))
    matches = []
    for bond, (t, g) in enumerate(((spec.t1, r.g1), (spec.t2, r.g2)), start=1):
        if abs(t - g) <= tol:
            matches.append((bond, +1))
        if abs(t + g) <= tol and g > 0.0:
            matches.append((bond, -1))
    bonds_hit = {b for b, _ in matches}
    collapse = None
    if bonds_hit == {1, 2}:
        collapse = 1
    elif bonds_hit:
        collapse = 3
    return EpReport(matches=matches, distances=d, collapse_count=collapse)


def topology_report(spec: ChainSpec, grid: int = 500) -> TopologyReport:
    sk = skin_parameter(spec)
    ep = classify_ep(spec, 1e-9)
    return TopologyReport(nu=winding_number(spec, grid),
                          topological=topological_regime(spec),
                          rR=sk.rR, rL=sk.rL, r=sk.r, r2=sk.r2, xi=sk.xi,
                          ep_distances=ep.distances)


def correlation_length(spec: ChainSpec) -> float:
    return skin_parameter(spec).xi


def obc_gap_derivative_jump(spec: ChainSpec, bond: int = 1, h: float = 1e-4) -> float:
    """|d(Delta_OBC)/dt_i| jump across |t_i| = g_i by one-sided finite
    differences; nonzero only when the hopping sits at an exceptional point."""
    r = derive_rates(spec)
    t = spec.t1 if bond == 1 else spec.t2

    def gap_at(tv: float) -> float:
        s = spec.replace(t1=tv) if bond == 1 else spec.replace(t2=tv)
        rr = derive_rates(s)
        return _obc_gap(s.t1, s.t2, rr.g1, rr.g2, rr.g)

    left = (gap_at(t) - gap_at(t - h)) / h
    right = (gap_at(t + h) - gap_at(t)) / h
    return abs(right - left)
