"""Real-space, Bloch and effective matrix representations.

Site ordering is (1,A), (1,B), (2,A), ... so the sublattice is the parity
of the 1-based site index (odd = A).  All matrices are dense; chains at
desk scale stay well below a thousand sites.

The central object is the damping block ``Xc = -4i*H0 + 2*M1``: a real
matrix with the uniform diagonal ``g`` whose eigenvalues are the
rapidities.  Conjugating with ``U = diag(1, i, 1, i, ...)`` maps it onto
the non-Hermitian SSH matrix ``H_S`` (asymmetric hoppings ``t_i +- g_i``),
``Xc = g*1 + i U H_S U^{-1}``, which is what makes the model exactly
solvable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import ChainSpec, DerivedRates, PBC, derive_rates, site_count


@dataclass(frozen=True)
class RealSpaceMatrices:
    """Hopping block H0 (imaginary antisymmetric) and dissipation blocks
    M1 (rate half-sums) and M2 (rate half-imbalances), each n x n."""

    H0: np.ndarray
    M1: np.ndarray
    M2: np.ndarray


@dataclass(frozen=True)
class DampingBlocks:
    """Damping block Xc (real, eigenvalues = rapidities), the M2 block
    entering Y = 4*[[0, M2], [-M2, 0]], and the trace constant A0 = n*g."""

    Xc: np.ndarray
    M2: np.ndarray
    A0: float


@dataclass(frozen=True)
class BlochBlocks:
    """2x2 momentum-space blocks at momentum q (PBC only)."""

    q: float
    H0q: np.ndarray
    M1q: np.ndarray
    M2q: np.ndarray
    Xq: np.ndarray
    HSq: np.ndarray


@dataclass(frozen=True)
class EffectiveModel:
    """No-jump effective Hamiltonian (imbalance-asymmetric hoppings,
    uniform -i*e on site) and the trace shift s0 = (g - e)/2 * n."""

    Heff: np.ndarray
    s0: float


def _bond_pattern(n: int, intra: float, inter: float, wrap: bool) -> np.ndarray:
    """Symmetric tridiagonal with ``intra`` on (2j-1, 2j) bonds and
    ``inter`` on (2j, 2j+1) bonds, optionally wrapping (n, 1)."""
    a = np.zeros((n, n))
    for i in range(n - 1):  # i is the 0-based left site of the bond
        v = intra if i % 2 == 0 else inter
        a[i, i + 1] = v
        a[i + 1, i] = v
    if wrap:
        a[n - 1, 0] = inter
        a[0, n - 1] = inter
    return a


def build_real_space(spec: ChainSpec) -> RealSpaceMatrices:
    """Assemble H0, M1, M2 for either boundary.

    Under OBC the curtailed end dissipators act on single A sites and
    contribute only to the uniform g/2 diagonal, so M1/M2 keep the same
    bond pattern with the last column/row simply absent.
    """
    n = site_count(spec)
    r = derive_rates(spec)
    wrap = spec.boundary == PBC

    signs = np.zeros((n, n))
    for i in range(n - 1):
        v = spec.t1 if i % 2 == 0 else -spec.t2
        signs[i, i + 1] = v
        signs[i + 1, i] = -v
    if wrap:
        signs[n - 1, 0] = -spec.t2
        signs[0, n - 1] = spec.t2
    H0 = 0.25j * signs

    M1 = 0.5 * r.g * np.eye(n) + 0.5 * _bond_pattern(n, r.g1, -r.g2, wrap)
    e_diag = r.e0 + r.e1 + r.e2
    M2 = 0.5 * e_diag * np.eye(n) + 0.5 * _bond_pattern(n, r.e1, -r.e2, wrap)
    return RealSpaceMatrices(H0=H0, M1=M1, M2=M2)


def sublattice_unitary(n: int) -> np.ndarray:
    """U = diag(1, i, 1, i, ...); ends on 1 for odd n (OBC chains)."""
    return np.diag(np.where(np.arange(n) % 2 == 0, 1.0, 1.0j))


def build_damping(spec: ChainSpec) -> DampingBlocks:
    """Xc = -4i*H0 + 2*M1; real by construction, diagonal g everywhere."""
    n = site_count(spec)
    r = derive_rates(spec)
    mats = build_real_space(spec)
    Xc = -4.0j * mats.H0 + 2.0 * mats.M1
    if np.max(np.abs(Xc.imag)) > 1e-12:
        raise AssertionError("damping block acquired imaginary entries")
    return DampingBlocks(Xc=Xc.real.copy(), M2=mats.M2, A0=n * r.g)


def assemble_xy(blocks: DampingBlocks) -> tuple[np.ndarray, np.ndarray]:
    """Full 2n x 2n damping matrix X = diag(Xc, Xc) and the off-diagonal
    block Y = 4*[[0, M2], [-M2, 0]]."""
    n = blocks.Xc.shape[0]
    X = np.zeros((2 * n, 2 * n))
    X[:n, :n] = blocks.Xc
    X[n:, n:] = blocks.Xc
    Y = np.zeros((2 * n, 2 * n))
    Y[:n, n:] = 4.0 * blocks.M2
    Y[n:, :n] = -4.0 * blocks.M2
    return X, Y


def build_H_S(spec: ChainSpec, *, a1: float | None = None,
              a2: float | None = None) -> np.ndarray:
    """Non-Hermitian SSH matrix with hoppings t_i +- a_i.

    The asymmetry defaults to the bond rate half-sums g_i; passing the
    half-imbalances e_i instead yields the hopping block of the no-jump
    effective model in the same basis.
    """
    n = site_count(spec)
    r = derive_rates(spec)
    if a1 is None:
        a1 = r.g1
    if a2 is None:
        a2 = r.g2
    h = np.zeros((n, n))
    for i in range(n - 1):
        t, a = (spec.t1, a1) if i % 2 == 0 else (spec.t2, a2)
        h[i, i + 1] = t + a
        h[i + 1, i] = t - a
    if spec.boundary == PBC:
        h[n - 1, 0] = spec.t2 + a2
        h[0, n - 1] = spec.t2 - a2
    return h


def hs_from_damping(Xc: np.ndarray, g: float) -> np.ndarray:
    """Invert Xc = g*1 + i U H_S U^{-1} (used as a consistency oracle)."""
    n = Xc.shape[0]
    u = np.where(np.arange(n) % 2 == 0, 1.0 + 0.0j, 1.0j)
    shifted = Xc.astype(complex) - g * np.eye(n)
    return -1.0j * ((1.0 / u)[:, None] * shifted * u[None, :])


def build_bloch(spec: ChainSpec, q: float) -> BlochBlocks:
    """2x2 Bloch blocks at momentum q on the 2*pi*m'/N grid (PBC only).

    H0q is the Fourier block of the real-space H0 (it carries the same i/4
    normalization), so Xq = -4i*H0q + 2*M1q has eigenvalues contained in
    the spectrum of the full damping block.
    """
    if spec.boundary != PBC:
        raise ConfigError("Bloch blocks are defined for periodic chains only")
    r = derive_rates(spec)
    t1, t2 = spec.t1, spec.t2
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
    # (i/4) * [(-i t2 sin q) sx + i (t1 + t2 cos q) sy]; the i/4 matches the
    # real-space normalization so that Xq = -4i*H0q + 2*M1q.
    H0q = 0.25j * np.array([[0.0, t1 + t2 * np.exp(-1.0j * q)],
                            [-(t1 + t2 * np.exp(1.0j * q)), 0.0]])
    M1q = 0.5 * (r.g * np.eye(2, dtype=complex)
                 + (r.g1 - r.g2 * np.cos(q)) * sx - r.g2 * np.sin(q) * sy)
    M2q = 0.5 * ((r.e0 + r.e1 + r.e2) * np.eye(2, dtype=complex)
                 + (r.e1 - r.e2 * np.cos(q)) * sx - r.e2 * np.sin(q) * sy)
    Xq = -4.0j * H0q + 2.0 * M1q
    hx = t1 + t2 * np.cos(q) + 1.0j * r.g2 * np.sin(q)
    hy = 1.0j * r.g1 - 1.0j * r.g2 * np.cos(q) + t2 * np.sin(q)
    HSq = hx * sx + hy * sy
    return BlochBlocks(q=q, H0q=H0q, M1q=M1q, M2q=M2q, Xq=Xq, HSq=HSq)


def momentum_grid(spec: ChainSpec) -> np.ndarray:
    """Allowed momenta: 2*pi*m'/N with m' in [-N/2, N/2) for PBC,
    pi*m'/N with m' = 1..N-1 for OBC."""
    N = spec.n_cells
    if spec.boundary == PBC:
        mvals = np.arange(-(N // 2), N - N // 2)
        return 2.0 * np.pi * mvals / N
    return np.pi * np.arange(1, N) / N


def build_H_eff(spec: ChainSpec) -> EffectiveModel:
    """No-jump effective model: hoppings t_i -+ e_i, uniform -i*e on site.

    The scalar trace shift s0 = (g - e)/2 * n is kept separate from the
    matrix; it re-enters the effective rapidities additively.
    """
    n = site_count(spec)
    r = derive_rates(spec)
    h = build_H_S(spec, a1=-r.e1, a2=-r.e2).astype(complex)
    h -= 1.0j * r.e * np.eye(n)
    s0 = 0.5 * (r.g - r.e) * n
    return EffectiveModel(Heff=h, s0=s0)
