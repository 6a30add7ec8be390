"""Closed-form rapidities and biorthogonal eigenvectors of the damping block.

Every rapidity is ``beta = g + i*E`` where E runs over the spectrum of the
non-Hermitian SSH matrix.  The closed forms below evaluate E directly:

* PBC: ``E(q)^2 = t1^2 + t2^2 - a1^2 - a2^2 + 2(t1 t2 + a1 a2) cos q
  + 2i(t1 a2 + t2 a1) sin q`` on the grid q = 2*pi*m'/N.
* OBC (odd site count): a zero mode E = 0 plus bulk pairs
  ``E(q)^2 = t1^2 + t2^2 - a1^2 - a2^2 + 2 sqrt(M) sqrt(P) cos q`` on
  q = pi*m'/N, m' = 1..N-1, with M = (t1-a1)(t2-a2), P = (t1+a1)(t2+a2).

Branch discipline: principal square roots everywhere, but products of
square roots are always grouped as ``sqrt(M)*sqrt(P)`` so that the bulk
dispersion, the localization factor r = sqrt(M)/sqrt(P) and the
PBC-to-OBC momentum shift q -> q - i*ln(r) stay mutually consistent even
when M or P turn negative.

The asymmetry parameters default to the bond rate half-sums g_i; the
no-jump effective model reuses the same constructions with the
half-imbalances e_i (which may be negative).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .builders import build_H_S, sublattice_unitary
from .errors import (ConfigError, DegenerateBasisError, ExceptionalPointError,
                     GapClosingError)
from .model import ChainSpec, PBC, derive_rates, site_count

#: Closed-form eigenvectors are refused this close to an exceptional point
#: or to the bulk-state collapse; callers fall back to numeric_spectrum.
DEFECT_TOL = 1e-9

#: A Bloch eigenvector formula divides by E; below this the basis is
#: treated as degenerate.  E^2 is assembled from O(1) products, so a
#: gridded exact zero shows up as |E| ~ sqrt(machine eps) ~ 1e-8 and the
#: threshold must sit above that.
ENERGY_TOL = 1e-7


@dataclass(frozen=True)
class ModeLabel:
    """band +1/-1 for the two bulk branches at momentum q, 0 for the
    open-chain zero mode (q is then meaningless and stored as 0)."""

    band: int
    q: float = 0.0

    def __str__(self):
        if self.band == 0:
            return "0"
        sign = "+" if self.band > 0 else "-"
        return f"({sign},{self.q:.6g})"


@dataclass(frozen=True)
class ModeSpectrum:
    labels: list[ModeLabel]
    betas: np.ndarray


@dataclass(frozen=True)
class ModeSet:
    """Labelled rapidities with matched right/left eigenvector columns of
    the damping block: Xc psiR[:,m] = beta_m psiR[:,m],
    Xc^dag psiL[:,m] = conj(beta_m) psiL[:,m], psiL^H psiR = 1."""

    labels: list[ModeLabel]
    betas: np.ndarray
    psiR: np.ndarray
    psiL: np.ndarray
    bio_residual: float


@dataclass(frozen=True)
class NumericEigensystem:
    """Dense nonsymmetric eigendecomposition with left vectors from the
    adjoint problem.  ``condition[m] = 1/|<psiL_m|psiR_m>|`` for the
    unit-norm LAPACK vectors; near-defective pairs are flagged, in which
    case bi-normalization is skipped.  The pairwise bi-normalization is
    exact only for simple spectra; consumers facing degenerate clusters
    should use the dual basis inv(right)^dag instead."""

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: np.ndarray
    defective: bool


def _csqrt(z) -> complex:
    return complex(np.sqrt(complex(z)))


def _asymmetries(spec: ChainSpec, a1, a2):
    r = derive_rates(spec)
    if a1 is None:
        a1 = r.g1
    if a2 is None:
        a2 = r.g2
    return r, float(a1), float(a2)


def pbc_energy_sq(t1: float, t2: float, a1: float, a2: float, q) -> complex:
    return (t1 ** 2 + t2 ** 2 - (a1 ** 2 + a2 ** 2)
            + 2.0 * (t1 * t2 + a1 * a2) * np.cos(q)
            + 2.0j * (t1 * a2 + t2 * a1) * np.sin(q))


def obc_energy_sq(t1: float, t2: float, a1: float, a2: float, q) -> complex:
    m = (t1 - a1) * (t2 - a2)
    p = (t1 + a1) * (t2 + a2)
    return (t1 ** 2 + t2 ** 2 - (a1 ** 2 + a2 ** 2)
            + 2.0 * _csqrt(m) * _csqrt(p) * np.cos(q))


def localization_factor(t1: float, t2: float, a1: float, a2: float) -> complex:
    """r with r^2 = (t1-a1)(t2-a2) / [(t1+a1)(t2+a2)]."""
    p = (t1 + a1) * (t2 + a2)
    if p == 0.0:
        raise ExceptionalPointError("(t1+a1)(t2+a2) = 0: localization factor undefined")
    return _csqrt((t1 - a1) * (t2 - a2)) / _csqrt(p)


def pbc_grid(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(-(N // 2), N - N // 2) / N


def obc_grid(N: int) -> np.ndarray:
    return np.pi * np.arange(1, N) / N


def rapidities_closed_form(spec: ChainSpec, *, a1: float | None = None,
                           a2: float | None = None) -> ModeSpectrum:
    """All n rapidities beta = g + i*E from the closed-form dispersion.

    Valid at every parameter point including exceptional points (only the
    eigenvector constructions break down there).
    """
    r, a1, a2 = _asymmetries(spec, a1, a2)
    t1, t2, N = spec.t1, spec.t2, spec.n_cells
    labels: list[ModeLabel] = []
    energies: list[complex] = []
    if spec.boundary == PBC:
        for q in pbc_grid(N):
            e = _csqrt(pbc_energy_sq(t1, t2, a1, a2, q))
            labels += [ModeLabel(+1, q), ModeLabel(-1, q)]
            energies += [e, -e]
    else:
        labels.append(ModeLabel(0))
        energies.append(0.0)
        for q in obc_grid(N):
            e = _csqrt(obc_energy_sq(t1, t2, a1, a2, q))
            labels += [ModeLabel(+1, q), ModeLabel(-1, q)]
            energies += [e, -e]
    betas = r.g + 1.0j * np.asarray(energies, dtype=complex)
    return ModeSpectrum(labels=labels, betas=betas)


def _bio_residual(psiL: np.ndarray, psiR: np.ndarray) -> float:
    n = psiR.shape[1]
    return float(np.max(np.abs(psiL.conj().T @ psiR - np.eye(n))))


def pbc_eigensystem(spec: ChainSpec, *, a1: float | None = None,
                    a2: float | None = None) -> ModeSet:
    """Bloch eigenvectors expanded to real space and mapped onto the
    damping block by the sublattice unitary.

    For each momentum the 2-component right vector is
    ``(1/sqrt(2)) [a(q)/E, 1]`` with ``a(q) = t1+a1 + (t2-a2) e^{-iq}``;
    the left vector is ``(1/sqrt(2)) [conj(b(q))/conj(E), 1]`` with
    ``b(q) = t1-a1 + (t2+a2) e^{iq}``, which keeps the pairing exact even
    where the principal square root of E^2 sits on its branch cut.
    """
    if spec.boundary != PBC:
        raise ConfigError("pbc_eigensystem requires a periodic chain")
    r, a1, a2 = _asymmetries(spec, a1, a2)
    t1, t2, N = spec.t1, spec.t2, spec.n_cells
    n = 2 * N
    U = np.where(np.arange(n) % 2 == 0, 1.0 + 0.0j, 1.0j)

    labels: list[ModeLabel] = []
    betas: list[complex] = []
    cols_R: list[np.ndarray] = []
    cols_L: list[np.ndarray] = []
    cells = np.arange(1, N + 1)
    for q in pbc_grid(N):
        e_plus = _csqrt(pbc_energy_sq(t1, t2, a1, a2, q))
        if abs(e_plus) < ENERGY_TOL:
            raise DegenerateBasisError(
                f"Bloch bands degenerate at q={q:.6g}; eigenvector formula divides by E")
        a_q = (t1 + a1) + (t2 - a2) * np.exp(-1.0j * q)
        b_q = (t1 - a1) + (t2 + a2) * np.exp(1.0j * q)
        phase = np.exp(1.0j * q * cells) / np.sqrt(N)
        for band in (+1, -1):
            e = band * e_plus
            uR = np.array([a_q / e, 1.0]) / np.sqrt(2.0)
            uL = np.array([np.conj(b_q) / np.conj(e), 1.0]) / np.sqrt(2.0)
            vR = np.zeros(n, dtype=complex)
            vL = np.zeros(n, dtype=complex)
            vR[0::2], vR[1::2] = phase * uR[0], phase * uR[1]
            vL[0::2], vL[1::2] = phase * uL[0], phase * uL[1]
            labels.append(ModeLabel(band, q))
            betas.append(r.g + 1.0j * e)
            cols_R.append(U * vR)
            cols_L.append(U * vL)
    psiR = np.column_stack(cols_R)
    psiL = np.column_stack(cols_L)
    return ModeSet(labels=labels, betas=np.asarray(betas), psiR=psiR,
                   psiL=psiL, bio_residual=_bio_residual(psiL, psiR))


def _check_obc_regular(t1, t2, a1, a2):
    for t, a, bond in ((t1, a1, 1), (t2, a2, 2)):
        if abs(abs(t) - abs(a)) <= DEFECT_TOL:
            raise ExceptionalPointError(
                f"|t{bond}| = |a{bond}| within {DEFECT_TOL:g}: damping block defective")
    if abs(abs(t1 ** 2 - a1 ** 2) - abs(t2 ** 2 - a2 ** 2)) <= DEFECT_TOL:
        raise GapClosingError(
            "|t1^2-a1^2| = |t2^2-a2^2| within tolerance: bulk eigenvectors collapse")


def _obc_bulk_cell_vectors(t1, t2, a1, a2, r_loc, q, e):
    """Per-cell 2-vectors of the standing-wave bulk state with explicit
    localization factor r_loc (pass 1/r for the mirrored construction)."""
    def u(qq):
        num = (t1 + a1) + (t2 - a2) * np.exp(-1.0j * qq) / r_loc
        return (1.0j / np.sqrt(2.0)) * np.array([num / e, 1.0])

    return u(q), u(-q)


def obc_eigensystem(spec: ChainSpec, *, a1: float | None = None,
                    a2: float | None = None) -> ModeSet:
    """Zero mode plus standing-wave bulk modes of the open chain.

    The zero mode lives on the A sublattice with per-cell weights r_R^j
    (right) and r_L^j (left); the normalization constraint fixes only the
    product N_L* N_R, split symmetrically here.  Bulk modes superpose
    Bloch waves of opposite momenta with an overall r^j envelope; the left
    set is the complex conjugate of the same construction with reversed
    asymmetries and inverted envelope.

    Exact for the odd site count used here at any finite N; refuses
    exceptional points and the bulk-collapse locus, where the damping
    block must be handled by :func:`numeric_spectrum` instead.
    """
    if spec.boundary == PBC:
        raise ConfigError("obc_eigensystem requires an open chain")
    r, a1, a2 = _asymmetries(spec, a1, a2)
    t1, t2, N = spec.t1, spec.t2, spec.n_cells
    _check_obc_regular(t1, t2, a1, a2)
    n = 2 * N - 1
    U = np.where(np.arange(n) % 2 == 0, 1.0 + 0.0j, 1.0j)

    labels = [ModeLabel(0)]
    betas = [complex(r.g)]
    r_R = -(t1 - a1) / (t2 + a2)
    r_L = -(t1 + a1) / (t2 - a2)
    rho = np.conj(r_L) * r_R
    norm_prod = (1.0 - rho) / (rho * (1.0 - rho ** N))
    nR = _csqrt(norm_prod)
    nL = np.conj(nR)
    cells = np.arange(1, N + 1)
    zR = np.zeros(n, dtype=complex)
    zL = np.zeros(n, dtype=complex)
    zR[0::2] = nR * r_R ** cells
    zL[0::2] = nL * r_L ** cells
    cols_R = [U * zR]
    cols_L = [U * zL]

    r_loc = localization_factor(t1, t2, a1, a2)
    for q in obc_grid(N):
        e_plus = _csqrt(obc_energy_sq(t1, t2, a1, a2, q))
        if abs(e_plus) < ENERGY_TOL:
            raise DegenerateBasisError(
                f"bulk band degenerate at q={q:.6g}; eigenvector formula divides by E")
        for band in (+1, -1):
            e = band * e_plus
            up, um = _obc_bulk_cell_vectors(t1, t2, a1, a2, r_loc, q, e)
            upL, umL = _obc_bulk_cell_vectors(t1, t2, -a1, -a2, 1.0 / r_loc, q, e)
            vR = np.zeros(n, dtype=complex)
            vLc = np.zeros(n, dtype=complex)
            env = r_loc ** cells / np.sqrt(2.0 * N)
            envL = (1.0 / r_loc) ** cells / np.sqrt(2.0 * N)
            ephase = np.exp(1.0j * q * cells)
            compR = env[:, None] * (ephase[:, None] * up[None, :]
                                    - np.conj(ephase)[:, None] * um[None, :])
            compL = envL[:, None] * (ephase[:, None] * upL[None, :]
                                     - np.conj(ephase)[:, None] * umL[None, :])
            vR[0::2] = compR[:, 0]
            vR[1::2] = compR[:N - 1, 1]
            vLc[0::2] = compL[:, 0]
            vLc[1::2] = compL[:N - 1, 1]
            labels.append(ModeLabel(band, q))
            betas.append(r.g + 1.0j * e)
            cols_R.append(U * vR)
            cols_L.append(U * np.conj(vLc))
    psiR = np.column_stack(cols_R)
    psiL = np.column_stack(cols_L)
    return ModeSet(labels=labels, betas=np.asarray(betas), psiR=psiR,
                   psiL=psiL, bio_residual=_bio_residual(psiL, psiR))


def eigensystem(spec: ChainSpec, *, a1: float | None = None,
                a2: float | None = None) -> ModeSet:
    if spec.boundary == PBC:
        return pbc_eigensystem(spec, a1=a1, a2=a2)
    return obc_eigensystem(spec, a1=a1, a2=a2)


def numeric_spectrum(X: np.ndarray, defect_tol: float = 1e-8) -> NumericEigensystem:
    """Dense nonsymmetric eigendecomposition, the oracle behind every
    closed-form claim.  Left vectors come from the adjoint problem
    (``X^dag psiL = conj(w) psiL``) and are bi-normalized against the
    right ones where the pair overlap allows it."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ConfigError("numeric_spectrum expects a square matrix")
    w, vl, vr = scipy.linalg.eig(X, left=True, right=True)
    overlaps = np.einsum("jm,jm->m", vl.conj(), vr)
    condition = 1.0 / np.maximum(np.abs(overlaps), np.finfo(float).tiny)
    defective = bool(np.min(np.abs(overlaps)) < defect_tol)
    if not defective:
        vl = vl / np.conj(overlaps)[None, :]
    return NumericEigensystem(values=w, right=vr, left=vl,
                              condition=condition, defective=defective)


def modeset_from_numeric(spec: ChainSpec, Xc: np.ndarray) -> ModeSet:
    """Numeric fallback dressed as a ModeSet (labels carry only the band
    sign of Im(beta); used when the closed forms refuse a parameter point).

    The left set is the dual basis inv(psiR)^dag, which is biorthonormal by
    construction and remains a set of adjoint eigenvectors even when
    eigenvalues cluster (as long as X stays diagonalizable)."""
    num = numeric_spectrum(Xc)
    if num.defective:
        raise DegenerateBasisError("damping block numerically defective")
    labels = [ModeLabel(int(np.sign(b.imag)) or 0) for b in num.values]
    left = np.linalg.inv(num.right).conj().T
    return ModeSet(labels=labels, betas=num.values, psiR=num.right,
                   psiL=left, bio_residual=_bio_residual(left, num.right))


def similarity_transform(spec: ChainSpec) -> np.ndarray:
    """Diagonal R with R^-1 H_S R Hermitian (hoppings sqrt(t_i^2 - g_i^2))
    for the open chain; singular at exceptional points."""
    if spec.boundary == PBC:
        raise ConfigError("similarity transform applies to open chains")
    r = derive_rates(spec)
    t1, t2, g1, g2 = spec.t1, spec.t2, r.g1, r.g2
    for t, g, bond in ((t1, g1, 1), (t2, g2, 2)):
        if abs(abs(t) - abs(g)) <= DEFECT_TOL:
            raise ExceptionalPointError(f"|t{bond}| = g{bond}: transform singular")
    n = site_count(spec)
    sites = np.arange(1, n + 1)
    r1 = _csqrt((t1 - g1) / (t1 + g1))
    r2 = _csqrt((t2 - g2) / (t2 + g2))
    R = (r1 ** (sites // 2)) * (r2 ** ((sites - 1) // 2))
    Rm = np.diag(R)
    hbar = np.diag(1.0 / R) @ build_H_S(spec).astype(complex) @ Rm
    if np.max(np.abs(hbar - hbar.T)) > 1e-10 * max(1.0, np.max(np.abs(hbar))):
        raise AssertionError("similarity-transformed matrix failed to symmetrize")
    return Rm


def match_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy nearest-neighbour multiset distance between two complex
    spectra of equal length: max over pairings of |a_i - b_match(i)|."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex).copy()
    if a.shape != b.shape:
        raise ConfigError("spectra must have equal length")
    used = np.zeros(len(b), dtype=bool)
    worst = 0.0
    for x in sorted(a, key=lambda z: (-abs(z), z.real, z.imag)):
        d = np.abs(b - x)
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        worst = max(worst, float(d[j]))
    return worst
