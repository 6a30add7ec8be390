import cmath

import numpy as np
import pytest

from lskin.builders import build_damping, build_H_S
from lskin.errors import (ConfigError, DegenerateBasisError,
                          ExceptionalPointError, GapClosingError)
from lskin.model import ChainSpec, balanced, derive_rates, loss_only, site_count
from lskin.solver import (localization_factor, match_distance, modeset_from_numeric,
                          numeric_spectrum, obc_eigensystem, obc_energy_sq,
                          obc_grid, pbc_eigensystem, pbc_energy_sq,
                          rapidities_closed_form, similarity_transform)


def spectra_agree(spec, tol=1e-9):
    cf = rapidities_closed_form(spec)
    ev = np.linalg.eigvals(build_damping(spec).Xc)
    return match_distance(cf.betas, ev) < tol


def test_obc_zero_mode_rapidity():
    spec = loss_only(0.8, 1.0, 0.3, 0.1, boundary="obc", n_cells=6)
    cf = rapidities_closed_form(spec)
    zero = [b for lab, b in zip(cf.labels, cf.betas) if lab.band == 0]
    assert len(zero) == 1
    assert zero[0] == pytest.approx(derive_rates(spec).g)


def test_obc_minimal_rapidities():
    # t1 = t2 = 1, g1 = 1.5, single bulk momentum q = pi/2: betas {1, 2}
    spec = balanced(1.0, 1.0, 1.5, 0.0, boundary="obc", n_cells=2)
    cf = rapidities_closed_form(spec)
    bulk = sorted(b.real for lab, b in zip(cf.labels, cf.betas) if lab.band != 0)
    assert bulk == pytest.approx([1.0, 2.0], abs=1e-12)


def test_pbc_gapless_mode_at_minus_pi():
    spec = balanced(1.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=8)
    cf = rapidities_closed_form(spec)
    at_pi = sorted(abs(b) for lab, b in zip(cf.labels, cf.betas)
                   if abs(lab.q + np.pi) < 1e-12)
    # one band closes the rapidity gap, the other sits at 2g
    assert at_pi[0] < 1e-12
    assert at_pi[1] == pytest.approx(4.0)


@pytest.mark.parametrize("n_cells", [6, 12])
@pytest.mark.parametrize("boundary", ["pbc", "obc"])
def test_closed_form_matches_dense_oracle(n_cells, boundary):
    spec = ChainSpec(t1=0.85, t2=-1.1, gl1=1.2, gg1=0.6, gl2=0.5, gg2=0.3,
                     boundary=boundary, n_cells=n_cells)
    assert spectra_agree(spec)


def test_rapidity_real_parts_nonnegative():
    rng = np.random.default_rng(3)
    for _ in range(25):
        spec = ChainSpec(t1=rng.uniform(-2, 2), t2=rng.uniform(-2, 2),
                         gl1=rng.uniform(0, 2), gg1=rng.uniform(0, 2),
                         gl2=rng.uniform(0, 2), gg2=rng.uniform(0, 2),
                         boundary=rng.choice(["pbc", "obc"]),
                         n_cells=int(rng.integers(2, 9)))
        assert rapidities_closed_form(spec).betas.real.min() > -1e-12


def residuals(spec, ms):
    X = build_damping(spec).Xc.astype(complex)
    res_r = np.max(np.abs(X @ ms.psiR - ms.psiR * ms.betas[None, :]))
    res_l = np.max(np.abs(X.conj().T @ ms.psiL - ms.psiL * np.conj(ms.betas)[None, :]))
    return res_r, res_l


def test_pbc_eigensystem():
    spec = ChainSpec(t1=0.7, t2=1.0, gl1=1.9, gg1=1.1, gl2=0.7, gg2=0.3,
                     boundary="pbc", n_cells=6)
    ms = pbc_eigensystem(spec)
    res_r, res_l = residuals(spec, ms)
    assert res_r < 1e-9 and res_l < 1e-9
    assert ms.bio_residual < 1e-9
    ev = np.linalg.eigvals(build_damping(spec).Xc)
    assert match_distance(ms.betas, ev) < 1e-10


def test_pbc_hermitian_limit_left_equals_right():
    spec = ChainSpec(t1=0.7, t2=1.0, boundary="pbc", n_cells=6)
    ms = pbc_eigensystem(spec)
    assert np.max(np.abs(ms.psiL - ms.psiR)) < 1e-12
    assert ms.bio_residual < 1e-12


def test_pbc_degenerate_basis_refused():
    # Bloch bands touch E = 0 at q = -pi when |t1 - t2| = g1 + g2
    spec = balanced(3.0, 1.0, 1.5, 0.5, boundary="pbc", n_cells=8)
    with pytest.raises(DegenerateBasisError):
        pbc_eigensystem(spec)


def test_obc_zero_mode_localization_factors():
    # t1 = 1, t2 = 1, g1 = 0.2, g2 = 0: r_R = -0.8, r_L = -1.2, r^2 = 2/3
    spec = balanced(1.0, 1.0, 0.2, 0.0, boundary="obc", n_cells=6)
    r = derive_rates(spec)
    rR = -(spec.t1 - r.g1) / (spec.t2 + r.g2)
    rL = -(spec.t1 + r.g1) / (spec.t2 - r.g2)
    assert rR == pytest.approx(-0.8) and rL == pytest.approx(-1.2)
    assert localization_factor(1.0, 1.0, 0.2, 0.0) ** 2 == pytest.approx(2 / 3)
    ms = obc_eigensystem(spec)
    zero_col = ms.psiR[:, 0]
    X = build_damping(spec).Xc
    assert np.max(np.abs(X @ zero_col - r.g * zero_col)) < 1e-10
    assert np.max(np.abs(zero_col[1::2])) < 1e-14  # suppressed on B sites


def test_obc_hermitian_limit():
    spec = ChainSpec(t1=0.6, t2=1.0, boundary="obc", n_cells=6)
    ms = obc_eigensystem(spec)
    assert np.max(np.abs(ms.psiL - ms.psiR)) < 1e-10
    # textbook finite-SSH bulk energies +-sqrt(t1^2+t2^2+2 t1 t2 cos q)
    for lab, beta in zip(ms.labels, ms.betas):
        if lab.band == 0:
            continue
        e = np.sqrt(0.36 + 1.0 + 1.2 * np.cos(lab.q))
        assert beta == pytest.approx(1j * lab.band * e, abs=1e-12)


@pytest.mark.parametrize("spec", [
    ChainSpec(t1=-0.8, t2=1.0, gl1=1.5, gg1=1.5, gl2=0.5, gg2=0.5,
              boundary="obc", n_cells=8),
    loss_only(1.0, 1.0, 0.2, 0.8, boundary="obc", n_cells=8),
    ChainSpec(t1=0.7, t2=1.0, gl1=1.9, gg1=1.1, gl2=0.7, gg2=0.3,
              boundary="obc", n_cells=8),
])
def test_obc_eigensystem_residuals(spec):
    ms = obc_eigensystem(spec)
    res_r, res_l = residuals(spec, ms)
    assert res_r < 1e-9 and res_l < 1e-9
    assert ms.bio_residual < 1e-9
    ev = np.linalg.eigvals(build_damping(spec).Xc)
    assert match_distance(ms.betas, ev) < 1e-9


def test_obc_refuses_exceptional_point():
    with pytest.raises(ExceptionalPointError):
        obc_eigensystem(balanced(1.0, 1.0, 1.0, 0.3, boundary="obc", n_cells=4))


def test_obc_refuses_bulk_collapse():
    # t1 = t2, g1 = g2: |t1^2-g1^2| = |t2^2-g2^2|
    with pytest.raises(GapClosingError):
        obc_eigensystem(balanced(1.0, 1.0, 0.4, 0.4, boundary="obc", n_cells=4))


def test_obc_spectrum_mirror_symmetry():
    spec = balanced(0.9, 1.1, 0.5, 0.2, boundary="obc", n_cells=7)
    t1, t2 = spec.t1, spec.t2
    for q in obc_grid(spec.n_cells):
        a = obc_energy_sq(t1, t2, 0.5, 0.2, q)
        b = obc_energy_sq(t1, t2, 0.5, 0.2, -q)
        assert a == pytest.approx(b, abs=1e-14)


def test_shift_relation():
    # beta_obc(q) = beta_pbc(q - i ln r) as multisets per momentum
    spec = ChainSpec(t1=0.7, t2=1.0, gl1=1.9, gg1=1.1, gl2=0.7, gg2=0.3,
                     boundary="obc", n_cells=9)
    r = derive_rates(spec)
    rloc = localization_factor(spec.t1, spec.t2, r.g1, r.g2)
    for q in obc_grid(spec.n_cells):
        qc = q - 1j * cmath.log(rloc)
        e_o = cmath.sqrt(obc_energy_sq(spec.t1, spec.t2, r.g1, r.g2, q))
        e_p = cmath.sqrt(pbc_energy_sq(spec.t1, spec.t2, r.g1, r.g2, qc))
        assert min(abs(e_o - e_p), abs(e_o + e_p)) < 1e-12


def test_numeric_spectrum_identity():
    es = numeric_spectrum(np.eye(4))
    assert np.allclose(es.values, 1.0)


def test_numeric_spectrum_flags_jordan_block():
    es = numeric_spectrum(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert es.defective
    assert es.condition.max() > 1e6


def test_numeric_spectrum_binormalizes():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(7, 7))
    es = numeric_spectrum(X)
    assert not es.defective
    overlaps = np.einsum("jm,jm->m", es.left.conj(), es.right)
    assert np.allclose(overlaps, 1.0)


def test_numeric_spectrum_rejects_nonsquare():
    with pytest.raises(ConfigError):
        numeric_spectrum(np.zeros((2, 3)))


def test_modeset_from_numeric_biorthonormal():
    spec = balanced(1.0, 1.0, 0.4, 0.4, boundary="obc", n_cells=4)  # collapse locus
    ms = modeset_from_numeric(spec, build_damping(spec).Xc)
    assert ms.bio_residual < 1e-8


def test_similarity_transform():
    spec = balanced(1.0, 1.0, 0.6, 0.0, boundary="obc", n_cells=5)
    R = similarity_transform(spec)
    hbar = np.linalg.inv(R) @ build_H_S(spec).astype(complex) @ R
    assert np.allclose(hbar, hbar.conj().T, atol=1e-10)
    assert hbar[0, 1] == pytest.approx(0.8)  # sqrt(1 - 0.36)
    # hermitian limit: identity transform
    R0 = similarity_transform(ChainSpec(t1=1.0, t2=0.5, boundary="obc", n_cells=4))
    assert np.allclose(R0, np.eye(7))
    with pytest.raises(ExceptionalPointError):
        similarity_transform(balanced(0.5, 1.0, 0.5, 0.0, boundary="obc", n_cells=4))


def test_match_distance():
    a = np.array([1 + 1j, 2.0, 3.0])
    b = np.array([3.0, 1 + 1j, 2.0])
    assert match_distance(a, b) == 0.0
    assert match_distance(a, b + 1e-5) == pytest.approx(1e-5, rel=1e-6)
