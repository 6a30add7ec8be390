"""Steady-state covariance, NESS classification and stationary currents.

The steady Majorana covariance solves ``X^dag C + C X = iY``.  When the
loss/gain ratios of the two bonds agree (or one bond is undissipated, or
gain and loss balance) the solution is the closed form
``C = (i e_total/g) [[0, 1], [-1, 0]]``; otherwise the equation is solved
generically through the eigenbasis of the damping matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .builders import DampingBlocks, assemble_xy, build_damping
from .errors import (ConfigError, NotSolvableError, SingularSylvesterError,
                     UnsupportedBranchError)
from .model import (ChainSpec, DerivedRates, OBC, PBC, derive_rates,
                    require_dissipative, site_count)
from .solver import ModeLabel, numeric_spectrum

#: Pairs beta_m^* + beta_l below this make the steady state non-unique.
GAP_TOL = 1e-10

#: Relative tolerance of the t1 = t2 (and |t1| = |t2|) comparisons.
HOPPING_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class Covariance:
    """2n x 2n Majorana pairing matrix; purely imaginary and antisymmetric.
    ``t`` is the evolution time, math.inf for a steady state."""

    C: np.ndarray
    t: float = math.inf

    @property
    def n_sites(self) -> int:
        return self.C.shape[0] // 2

    def residuals(self) -> tuple[float, float]:
        """(antisymmetry, realness-of-iC) residuals."""
        anti = float(np.max(np.abs(self.C + self.C.T)))
        imag = float(np.max(np.abs(self.C.real)))
        return anti, imag


@dataclass(frozen=True)
class NessClass:
    """kind 'unique' | 'degenerate' | 'quasi'; degenerate/quasi list the
    gapless bulk modes, quasi additionally the oscillation frequency."""

    kind: str
    modes: tuple[ModeLabel, ...] = ()
    frequency: float = 0.0


def solve_sylvester(X: np.ndarray, Y: np.ndarray) -> Covariance:
    """Generic steady-state solve of X^dag C + C X = iY.

    Uses a Schur-based dense solve, which stays exact for the doubly
    degenerate spectrum of the full damping matrix and even at
    exceptional points where X is defective.  The matrices must be cast
    to complex: the real-Schur path cannot carry the complex right-hand
    side.  Raises when a rapidity pair beta_m^* + beta_l vanishes (closed
    Liouvillian gap, steady state not unique).
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape or X.shape[0] != X.shape[1]:
        raise ConfigError("X and Y must be square matrices of equal size")
    w = np.linalg.eigvals(X)
    denom = np.conj(w)[:, None] + w[None, :]
    if np.min(np.abs(denom)) < GAP_TOL:
        raise SingularSylvesterError(
            "vanishing rapidity pair: steady state not unique")
    Xc = X.astype(complex)
    C = scipy.linalg.solve_sylvester(Xc.conj().T, Xc, 1.0j * Y.astype(complex))
    C = 0.5 * (C - C.T)  # enforce exact antisymmetry
    residual = float(np.max(np.abs(X.conj().T @ C + C @ X - 1.0j * Y)))
    if residual > 1e-9 * max(1.0, float(np.max(np.abs(Y)))):
        raise SingularSylvesterError(
            f"steady-state solve residual {residual:.2e}: gap too small")
    return Covariance(C=C)


def steady_covariance(spec: ChainSpec, blocks: DampingBlocks | None = None) -> Covariance:
    """Steady covariance of one chain: closed form when solvable, generic
    Sylvester solve otherwise."""
    rates = derive_rates(spec)
    require_dissipative(rates)
    if rates.solvable:
        return covariance_solvable(rates, site_count(spec))
    if blocks is None:
        blocks = build_damping(spec)
    return solve_sylvester(*assemble_xy(blocks))


def covariance_solvable(rates: DerivedRates, n: int) -> Covariance:
    """Closed-form steady covariance C = (i e_total/g) [[0,1],[-1,0]]."""
    require_dissipative(rates)
    if not rates.solvable:
        raise NotSolvableError(
            "rates violate the closed-form condition g*e_i = e_total*g_i")
    factor = 1.0j * rates.e_total / rates.g
    C = np.zeros((2 * n, 2 * n), dtype=complex)
    C[:n, n:] = factor * np.eye(n)
    C[n:, :n] = -factor * np.eye(n)
    return Covariance(C=C)


def steady_occupation(rates: DerivedRates) -> float:
    """Uniform steady filling (g - e_total) / (2g)."""
    require_dissipative(rates)
    return (rates.g - rates.e_total) / (2.0 * rates.g)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= HOPPING_MATCH_TOL * max(1.0, abs(a), abs(b))


def classify_ness(spec: ChainSpec) -> NessClass:
    """Unique / degenerate / quasi steady state from the gapless-mode
    conditions of the rapidity spectrum.

    Open chains are always unique (for t1 != 0 every rapidity has a
    positive real part); on-site dissipation gaps every mode, forcing
    uniqueness under either boundary.  With one undissipated bond the
    degenerate point widens to |t1| = |t2| and an intermediate quasi
    window opens whose modes oscillate at sqrt(t2^2 - t1^2).
    """
    rates = derive_rates(spec)
    require_dissipative(rates)
    if spec.boundary == OBC or rates.g0 > 0.0:
        return NessClass(kind="unique")
    t1, t2 = spec.t1, spec.t2
    g1, g2 = rates.g1, rates.g2
    if g1 > 0.0 and g2 > 0.0:
        if _close(t1, t2):
            return NessClass(kind="degenerate", modes=(ModeLabel(+1, -math.pi),))
        return NessClass(kind="unique")
    # one bond undissipated; the two cases map onto each other by the
    # bond-swap symmetry of the dispersion (t1,g1) <-> (t2,g2)
    ta, tb = (t1, t2) if g2 == 0.0 else (t2, t1)
    if _close(abs(ta), abs(tb)):
        q = -0.5 * math.pi * (math.copysign(1.0, ta * tb) + 1.0)
        return NessClass(kind="degenerate", modes=(ModeLabel(+1, q),))
    if abs(ta) < abs(tb):
        qstar = math.acos(-ta / tb) * math.copysign(1.0, tb)
        return NessClass(kind="quasi",
                         modes=(ModeLabel(+1, qstar), ModeLabel(-1, -qstar)),
                         frequency=math.sqrt(tb ** 2 - ta ** 2))
    return NessClass(kind="unique")


def steady_current(spec: ChainSpec) -> float:
    """Stationary current of the long-time state.

    Open chains carry none (the unique steady state is a product state).
    Periodic chains carry (1/2N)(g+e)/g exactly at the degenerate point
    with both bonds dissipated or at t1 = t2 with g2 = 0, nothing at
    t1 = -t2, and to leading order (1/2N)((g+e)/g)(t1+t2)/t2 in the quasi
    window |t1| < t2 (g2 = 0, t2 > 0); use
    :func:`quasi_current_correction` for the O(1/N^2) oscillatory part.
    """
    rates = derive_rates(spec)
    require_dissipative(rates)
    if spec.boundary == OBC:
        return 0.0
    ness = classify_ness(spec)
    if ness.kind == "unique":
        return 0.0
    prefactor = (rates.g + rates.e_total) / rates.g / (2.0 * spec.n_cells)
    t1, t2 = spec.t1, spec.t2
    if ness.kind == "degenerate":
        if rates.g1 > 0.0 and rates.g2 > 0.0:
            return prefactor
        return prefactor if t1 * t2 > 0.0 else 0.0
    # quasi window: closed form exists for the g2 = 0, t2 > 0 branch
    if rates.g2 != 0.0 or t2 <= 0.0:
        raise UnsupportedBranchError(
            "quasi-NESS current closed form requires g2 = 0, t2 > 0")
    return prefactor * (t1 + t2) / t2


def quasi_current_correction(spec: ChainSpec, t: float) -> float:
    """O(1/N^2) oscillatory part of the quasi-NESS current at time t."""
    rates = derive_rates(spec)
    require_dissipative(rates)
    if spec.boundary != PBC or rates.g2 != 0.0:
        raise ConfigError("correction defined for periodic chains with g2 = 0")
    t1, t2, N = spec.t1, spec.t2, spec.n_cells
    if not abs(t1) < t2:
        raise ConfigError("correction defined in the quasi window |t1| < t2")
    alpha = math.sqrt(1.0 - (t1 / t2) ** 2)
    pref = (rates.g + rates.e_total) / rates.g / (2.0 * N ** 2)
    return pref * ((t1 + t2) / t2 * math.cos(2.0 * t2 * alpha * t)
                   + alpha * math.sin(2.0 * t2 * alpha * t))
