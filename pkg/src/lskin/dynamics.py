"""Covariance time evolution, observables and skin-effect dynamics probes.

Two independent evolution routes:

* mode sum -- the deviation from the steady covariance propagates as
  ``Ct(t) = G(t)^T Ct(0) G(t)`` with ``G = PsiR exp(-beta t) PsiL^dag``
  built from the biorthogonal eigenbasis of the damping block; long times
  cost nothing because the exponentials are evaluated directly;
* fixed-step RK4 on ``dC/dt = -C X - X^dag C + iY``, bit-reproducible and
  formula-free, used as the oracle for the mode sum (and as the fallback
  when the eigenbasis is defective).

Observables derive from the pairing matrix: occupations
``n_j = (1 + i C[j, j+n]) / 2``, the single-particle correlator Q, the
site-averaged current and the damping polarization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .builders import assemble_xy, build_damping
from .errors import ConfigError, PhysicsError
from .model import (ChainSpec, DerivedRates, FullyFilled, InitialState, OBC,
                    PBC, derive_rates, occupation_vector, require_dissipative,
                    site_count)
from .solver import ModeSet, eigensystem, modeset_from_numeric
from .steady import Covariance, steady_covariance, steady_occupation
from .topology import skin_parameter

#: RK4 step control: h * ||X||_inf below this keeps the local error far
#: under observable tolerances at desk scale.
RK4_STEP_FACTOR = 0.05


@dataclass(frozen=True)
class Trajectory:
    """Per-time occupations n_j(t), deviations from the steady filling,
    site-averaged current and damping polarization.  Polarization entries
    are NaN once the total deviation has decayed below roundoff."""

    times: np.ndarray
    occupations: np.ndarray  # shape (T, n)
    deviations: np.ndarray   # shape (T, n)
    current: np.ndarray      # shape (T,)
    polarization: np.ndarray  # shape (T,)


@dataclass(frozen=True)
class Lifetime:
    tau: float
    oscillatory: bool  # tail re-crossed the threshold; first crossing reported


@dataclass(frozen=True)
class LifetimeFit:
    """Linear fit tau(N) = intercept + slope * N.

    The slope carries the skin-effect scaling ln(1/r^2)/delta_eff, which
    is closed two ways: ``delta_eff`` fixes the correlation length from
    the skin parameter and reads the effective gap off the slope, while
    ``xi_fit`` assumes the weak-dissipation identity delta_eff = Delta_OBC
    and reads the correlation length off the slope.  The intercept is
    threshold-depth dependent and reported for reference only.
    """

    l: int
    n_cells: tuple[int, ...]
    taus: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    delta_eff: float
    xi_fit: float


@dataclass(frozen=True)
class BoundaryComparison:
    divergence_time: float | None
    ballistic_estimate: float
    max_difference: np.ndarray  # per requested time


def filling_covariance(init: InitialState, n: int) -> Covariance:
    """Absolute covariance of a site-diagonal product state: the
    off-diagonal block is -i diag(2 v_j - 1), reproducing n_j = v_j."""
    v = np.asarray(occupation_vector(init, n))
    b = -1.0j * (2.0 * v - 1.0)
    C = np.zeros((2 * n, 2 * n), dtype=complex)
    C[:n, n:] = np.diag(b)
    C[n:, :n] = -np.diag(b)
    return Covariance(C=C, t=0.0)


def initial_covariance(init: InitialState, rates: DerivedRates, n: int) -> Covariance:
    """Deviation covariance Ct(0) = C(0) - C_ss of a site-diagonal state.

    The off-diagonal block is ``-i diag(2 v_j - 1) - i (e_total/g) 1`` for
    occupations v_j; a fully filled chain gives the uniform prefactor
    -i (g + e_total)/g.  The subtracted reference is the uniform
    closed-form covariance, i.e. the true steady state exactly when the
    rates are solvable; outside that limit use :func:`filling_covariance`
    minus the generic steady solution (as :func:`simulate` does).
    """
    require_dissipative(rates)
    v = np.asarray(occupation_vector(init, n))
    b = -1.0j * (2.0 * v - 1.0) - 1.0j * rates.e_total / rates.g
    C = np.zeros((2 * n, 2 * n), dtype=complex)
    C[:n, n:] = np.diag(b)
    C[n:, :n] = -np.diag(b)
    return Covariance(C=C, t=0.0)


def mode_basis(spec: ChainSpec) -> ModeSet:
    """Closed-form eigenbasis when available, dense numeric otherwise."""
    try:
        return eigensystem(spec)
    except PhysicsError:
        return modeset_from_numeric(spec, build_damping(spec).Xc)


def _propagated_blocks(modes: ModeSet, Ct0: np.ndarray, t: float) -> np.ndarray:
    n = modes.psiR.shape[0]
    decay = np.exp(-modes.betas * t)
    lconj = np.conj(modes.psiL)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for (r0, r1) in ((0, n), (n, 2 * n)):
        for (c0, c1) in ((0, n), (n, 2 * n)):
            blk = Ct0[r0:r1, c0:c1]
            if not np.any(blk):
                continue
            K = modes.psiR.T @ blk @ modes.psiR
            out[r0:r1, c0:c1] = lconj @ (K * np.outer(decay, decay)) @ modes.psiL.conj().T
    return out


def evolve_modesum(spec: ChainSpec, modes: ModeSet, C0: Covariance,
                   times) -> list[Covariance]:
    """Evolve an absolute covariance through the eigenbasis exponentials.

    Each time point is independent, so arbitrarily late times (g*t ~ 1e5)
    are evaluated directly instead of being stepped to.
    """
    Css = steady_covariance(spec).C
    Ct0 = C0.C - Css
    n = site_count(spec)
    if Ct0.shape != (2 * n, 2 * n):
        raise ConfigError("covariance size does not match the chain")
    out = []
    for t in np.asarray(times, dtype=float):
        Ct = _propagated_blocks(modes, Ct0, t)
        Ct = 0.5 * (Ct - Ct.T)
        out.append(Covariance(C=Css + Ct, t=float(t)))
    return out


def evolve_ode(spec: ChainSpec, C0: Covariance, times) -> list[Covariance]:
    """Classical fixed-step RK4 on dC/dt = -C X - X^dag C + iY.

    The step obeys h * ||X||_inf <= 0.05 and divides every requested
    interval evenly; antisymmetry is re-enforced after each step.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ConfigError("times must be non-decreasing")
    X, Y = assemble_xy(build_damping(spec))
    Xd = X.T  # X real
    iY = 1.0j * Y
    norm = float(np.max(np.sum(np.abs(X), axis=1)))
    h_max = RK4_STEP_FACTOR / norm if norm > 0 else math.inf

    def rhs(C):
        return -C @ X - Xd @ C + iY

    C = C0.C.astype(complex).copy()
    t_now = C0.t if math.isfinite(C0.t) else 0.0
    out = []
    for t_target in times:
        span = t_target - t_now
        if span < 0:
            raise ConfigError("requested time precedes the initial covariance")
        if span > 0:
            steps = max(1, int(math.ceil(span / h_max))) if math.isfinite(h_max) else 1
            h = span / steps
            if h <= 0 or not math.isfinite(h):
                raise ConfigError("step size underflow")
            for _ in range(steps):
                k1 = rhs(C)
                k2 = rhs(C + 0.5 * h * k1)
                k3 = rhs(C + 0.5 * h * k2)
                k4 = rhs(C + h * k3)
                C = C + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                C = 0.5 * (C - C.T)
            t_now = t_target
        out.append(Covariance(C=C.copy(), t=float(t_target)))
    return out


def _sigma_matrix(n: int) -> np.ndarray:
    """Sublattice phase sigma(j,k): 1 on equal parity, (-1)^j * (-i)
    across parities (1-based site indices)."""
    j = np.arange(1, n + 1)
    parity = (j[:, None] + j[None, :]) % 2
    signs = np.where(j % 2 == 0, 1.0, -1.0)  # (-1)^j
    sigma = np.ones((n, n), dtype=complex)
    odd = parity == 1
    sigma[odd] = (signs[:, None] * np.full((n, n), -1.0j))[odd]
    return sigma


def correlator(cov: Covariance) -> np.ndarray:
    """Single-particle correlator Q_jk = <a_j^dag a_k>.

    Off the diagonal this is (i/4) sigma(j,k) [C_{j,k+n} + C_{k,j+n}];
    the identity/2 offset restores the absolute diagonal so that
    diag(Q) equals the occupations.  Hermitian within 1e-10.
    """
    n = cov.n_sites
    B = cov.C[:n, n:]
    Q = 0.5 * np.eye(n) + 0.25j * _sigma_matrix(n) * (B + B.T)
    herm = float(np.max(np.abs(Q - Q.conj().T)))
    if herm > 1e-10 * max(1.0, float(np.max(np.abs(Q)))):
        raise AssertionError(f"correlator lost hermiticity: {herm:.2e}")
    return Q


def occupation(cov: Covariance) -> np.ndarray:
    """n_j = (1 + i C[j, j+n]) / 2, checked real."""
    n = cov.n_sites
    vals = 0.5 * (1.0 + 1.0j * np.diagonal(cov.C[:n, n:]))
    if float(np.max(np.abs(vals.imag))) > 1e-10:
        raise AssertionError("occupations acquired imaginary parts")
    return vals.real.copy()


def deviation(cov: Covariance, rates: DerivedRates) -> np.ndarray:
    return occupation(cov) - steady_occupation(rates)


def current(cov_or_q, boundary: str) -> float:
    """Site-averaged current (i/n) sum_j (Q_{j,j+1} - Q_{j+1,j}); the wrap
    bond is included for periodic chains.  Real within 1e-10."""
    Q = correlator(cov_or_q) if isinstance(cov_or_q, Covariance) else np.asarray(cov_or_q)
    n = Q.shape[0]
    up = np.sum(np.diagonal(Q, offset=1))
    dn = np.sum(np.diagonal(Q, offset=-1))
    if boundary == PBC:
        up += Q[n - 1, 0]
        dn += Q[0, n - 1]
    j = 1.0j * (up - dn) / n
    if abs(j.imag) > 1e-10 * max(1.0, abs(j)):
        raise AssertionError("current acquired an imaginary part")
    return float(j.real)


def polarization(deviations: np.ndarray) -> float:
    """Damping-wavefront center sum_j j*dn_j / (n sum_j dn_j); NaN once the
    total deviation underflows."""
    dn = np.asarray(deviations, dtype=float)
    n = dn.shape[-1]
    total = float(np.sum(dn))
    if abs(total) < 1e-14:
        return math.nan
    sites = np.arange(1, n + 1)
    return float(np.dot(sites, dn) / (n * total))


#: Target absolute covariance accuracy of the automatic evolution route.
AUTO_TOL = 1e-10


def _hybrid_evolve(spec: ChainSpec, C0: Covariance, times) -> list[Covariance]:
    """Mode sum where its roundoff is under AUTO_TOL, RK4 stepping before.

    A strongly skin-localized eigenbasis cancels catastrophically in the
    spectral reconstruction; its error is measured exactly at t = 0 (the
    completeness defect against C0) and decays like the full gap, so the
    crossover time ln(err0/tol)/gap splits the requested grid between the
    integrator (early) and the mode sum (late).
    """
    times = np.asarray(times, dtype=float)
    try:
        modes = mode_basis(spec)
    except PhysicsError:
        return evolve_ode(spec, C0, times)
    Css = steady_covariance(spec).C
    Ct0 = C0.C - Css
    err0 = float(np.max(np.abs(_propagated_blocks(modes, Ct0, 0.0) - Ct0)))
    gap = 2.0 * float(np.min(modes.betas.real))
    if err0 <= AUTO_TOL:
        t_safe = 0.0
    elif gap > 1e-12:
        t_safe = math.log(err0 / AUTO_TOL) / gap
    else:
        t_safe = math.inf
    early = times[times < t_safe]
    late = times[times >= t_safe]
    if early.size and math.isinf(t_safe):
        return evolve_ode(spec, C0, times)
    out = evolve_ode(spec, C0, early) if early.size else []
    if late.size:
        out += evolve_modesum(spec, modes, C0, late)
    return out


def simulate(spec: ChainSpec, init: InitialState, times, *,
             method: str = "auto") -> Trajectory:
    """Full observable trajectory from a site-diagonal initial state."""
    rates = derive_rates(spec)
    require_dissipative(rates)
    n = site_count(spec)
    times = np.asarray(times, dtype=float)
    C0 = filling_covariance(init, n)
    if method == "auto":
        covs = _hybrid_evolve(spec, C0, times)
    elif method == "modesum":
        covs = evolve_modesum(spec, mode_basis(spec), C0, times)
    elif method == "ode":
        covs = evolve_ode(spec, C0, times)
    else:
        raise ConfigError(f"unknown evolution method {method!r}")
    occ = np.array([occupation(c) for c in covs])
    dev = occ - steady_occupation(rates)
    cur = np.array([current(c, spec.boundary) for c in covs])
    pol = np.array([polarization(d) for d in dev])
    return Trajectory(times=times, occupations=occ, deviations=dev,
                      current=cur, polarization=pol)


def site_deviation_series(spec: ChainSpec, site: int, init: InitialState,
                          times, modes: ModeSet | None = None) -> np.ndarray:
    """Deviation n_site(t) - n_ss on one site for many times, O(n^2) per
    time point (the workhorse of the lifetime scans)."""
    rates = derive_rates(spec)
    require_dissipative(rates)
    n = site_count(spec)
    if not 1 <= site <= n:
        raise ConfigError(f"site {site} outside 1..{n}")
    if modes is None:
        modes = mode_basis(spec)
    B = filling_covariance(init, n).C[:n, n:] - steady_covariance(spec).C[:n, n:]
    K = modes.psiR.T @ B @ modes.psiR
    w = np.conj(modes.psiL[site - 1, :])
    times = np.asarray(times, dtype=float)
    decay = np.exp(-np.outer(modes.betas, times))  # (n_modes, T)
    A = w[:, None] * decay
    vals = 0.5j * np.einsum("mt,ml,lt->t", A, K, A)
    return vals.real.copy()


def _scan_decay(spec, site, init, modes, target, rates):
    """Coarse time grid bracketing the first threshold crossing after the
    global maximum of |deviation(t)|."""
    gap = 2.0 * float(np.min(modes.betas.real))
    if gap <= 1e-12:
        raise ConfigError("gapless spectrum: edge deviation never relaxes")
    sk = skin_parameter(spec)
    guess = (1.0 + spec.n_cells * abs(math.log(abs(sk.r2)))
             if 0 < abs(sk.r2) else 1.0) / gap
    t_hi = 8.0 * max(guess, 1.0 / gap)
    for _ in range(80):
        tail = site_deviation_series(spec, site, init, [t_hi], modes)[0]
        if abs(tail) < target:
            break
        t_hi *= 2.0
    else:
        raise ConfigError("edge deviation failed to relax within scan budget")
    grid = np.linspace(0.0, t_hi, 1200)
    vals = np.abs(site_deviation_series(spec, site, init, grid, modes))
    return grid, vals


def lifetime(spec: ChainSpec, init: InitialState = FullyFilled(), l: int = 3,
             site: int | None = None) -> Lifetime:
    """Decay time of the boundary deviation: first t after its global
    maximum with |dn_site(t)| = e^-l |dn_site(0)|, located by bisection.

    Defaults to the right edge site 2N-1 of an open chain, the slowest
    site when |r^2| < 1.  A tail that re-crosses the threshold later
    (weak-dissipation oscillations) is flagged, and the first crossing is
    still reported.
    """
    if spec.boundary != OBC:
        raise ConfigError("lifetime is defined for open chains")
    if spec.t1 == 0.0:
        raise ConfigError("t1 = 0 leaves a gapless edge deviation")
    if l < 1:
        raise ConfigError("threshold exponent l must be a positive integer")
    rates = derive_rates(spec)
    require_dissipative(rates)
    n = site_count(spec)
    if site is None:
        site = n
    modes = mode_basis(spec)
    start = abs(site_deviation_series(spec, site, init, [0.0], modes)[0])
    if start == 0.0:
        raise ConfigError("initial deviation vanishes on the probe site")
    target = math.exp(-l) * start

    grid, vals = _scan_decay(spec, site, init, modes, target, rates)
    imax = int(np.argmax(vals))
    below = np.nonzero(vals[imax:] <= target)[0]
    if below.size == 0:
        raise ConfigError("threshold crossing not bracketed by the scan")
    k = imax + int(below[0])
    oscillatory = bool(np.any(vals[k:] > target))
    if k == 0:
        return Lifetime(tau=0.0, oscillatory=oscillatory)
    lo, hi = grid[k - 1], grid[k]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if abs(site_deviation_series(spec, site, init, [mid], modes)[0]) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return Lifetime(tau=0.5 * (lo + hi), oscillatory=oscillatory)


def lifetime_scan(spec: ChainSpec, n_cells_list, l: int = 3,
                  init: InitialState = FullyFilled()) -> LifetimeFit:
    """Lifetimes over system sizes with the linear fit tau = a + b*N."""
    from .topology import gap_closed_form  # local import; topology has no dynamics dep

    ns = [int(N) for N in n_cells_list]
    if len(ns) < 2:
        raise ConfigError("need at least two system sizes to fit")
    taus = []
    for N in ns:
        taus.append(lifetime(spec.replace(n_cells=N, boundary=OBC), init, l).tau)
    ns_arr = np.asarray(ns, dtype=float)
    taus_arr = np.asarray(taus)
    slope, intercept = np.polyfit(ns_arr, taus_arr, 1)
    fitted = intercept + slope * ns_arr
    ss_res = float(np.sum((taus_arr - fitted) ** 2))
    ss_tot = float(np.sum((taus_arr - np.mean(taus_arr)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if slope <= 0:
        raise ConfigError(f"lifetime fit left the skin-effect regime (slope={slope:.3g})")
    sk = skin_parameter(spec)
    if not 0.0 < abs(sk.r2) < 1.0:
        raise ConfigError("lifetime scaling requires 0 < |r^2| < 1")
    log_r2 = abs(math.log(abs(sk.r2)))
    delta_obc = gap_closed_form(spec.replace(boundary=OBC)).delta_obc
    return LifetimeFit(l=l, n_cells=tuple(ns), taus=tuple(taus),
                       slope=float(slope), intercept=float(intercept),
                       r_squared=r2, delta_eff=log_r2 / float(slope),
                       xi_fit=2.0 / (float(slope) * delta_obc))


def effective_rapidities(spec: ChainSpec) -> np.ndarray:
    """Rapidities of the no-jump effective model: e + i E_m(e) + (g-e)n/2."""
    rates = derive_rates(spec)
    if rates.g0 != 0.0:
        raise ConfigError("effective dynamics implemented for bond dissipation only")
    n = site_count(spec)
    modes = eigensystem(spec, a1=rates.e1, a2=rates.e2)
    energies = (modes.betas - rates.g) / 1.0j
    return rates.e + 1.0j * energies + 0.5 * (rates.g - rates.e) * n


def effective_correlators(spec: ChainSpec, init: InitialState, times) -> list[np.ndarray]:
    """No-jump correlators Q_eff(t) from the imbalance eigenbasis.

    Built from the same standing-wave constructions as the full solver
    with the asymmetry g_i -> e_i, weighted by the initial occupations.
    For loss-only bonds (g = e) this reproduces the exact Q(t) at all
    times; otherwise it is reliable only before the first quantum jump.
    """
    rates = derive_rates(spec)
    require_dissipative(rates)
    if rates.g0 != 0.0:
        raise ConfigError("effective dynamics implemented for bond dissipation only")
    n = site_count(spec)
    modes = eigensystem(spec, a1=rates.e1, a2=rates.e2)
    energies = (modes.betas - rates.g) / 1.0j
    betas_eff = rates.e + 1.0j * energies + 0.5 * (rates.g - rates.e) * n
    v = np.asarray(occupation_vector(init, n))
    S = modes.psiR.T @ (v[:, None] * modes.psiR)
    sigma = _sigma_matrix(n)
    lconj = np.conj(modes.psiL)
    out = []
    for t in np.asarray(times, dtype=float):
        decay = np.exp(-betas_eff * t)
        M = S * np.outer(decay, decay)
        out.append(sigma * (lconj @ M @ lconj.T))
    return out


def boundary_sensitivity(spec_pbc: ChainSpec, spec_obc: ChainSpec,
                         init: InitialState, times,
                         threshold: float = 1e-8) -> BoundaryComparison:
    """First time the occupations of the periodic and open chains differ.

    Both chains must share all parameters except the boundary; occupations
    are compared on the 2N-1 common sites.  The ballistic estimate is the
    site-to-edge distance over the maximal group velocity min(|t1|, |t2|)
    (in unit cells per time).
    """
    if spec_pbc.boundary != PBC or spec_obc.boundary != OBC:
        raise ConfigError("pass one periodic and one open spec")
    if spec_pbc.replace(boundary=OBC) != spec_obc:
        raise ConfigError("specs differ beyond the boundary condition")
    times = np.asarray(times, dtype=float)
    n_obc = site_count(spec_obc)
    traj_p = simulate(spec_pbc, init, times)
    traj_o = simulate(spec_obc, init, times)
    diff = np.max(np.abs(traj_p.occupations[:, :n_obc] - traj_o.occupations), axis=1)
    crossing = np.nonzero(diff > threshold)[0]
    t_div = float(times[crossing[0]]) if crossing.size else None

    site0 = init.site if hasattr(init, "site") else (n_obc + 1) // 2
    v = min(abs(spec_obc.t1), abs(spec_obc.t2))
    dist_cells = 0.5 * max(site0 - 1, n_obc - site0)
    ballistic = dist_cells / v if v > 0 else math.inf
    return BoundaryComparison(divergence_time=t_div, ballistic_estimate=ballistic,
                              max_difference=diff)
