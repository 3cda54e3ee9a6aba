import numpy as np
import pytest

from fdmaps.errors import DomainError
from fdmaps.fields import sample_analytic, wirtinger_derivatives
from fdmaps.hopf import (HopfField, ahlfors_hopf, holomorphy_residual,
                         hopf_differential, hyperbolic_weight,
                         inverse_ahlfors_hopf)


def test_hyperbolic_weight_values():
    assert hyperbolic_weight(0.0) == pytest.approx(1.0)
    assert hyperbolic_weight(1.0 / np.sqrt(2.0)) == pytest.approx(4.0)
    assert hyperbolic_weight(0.9) == pytest.approx(1.0 / 0.19 ** 2)
    with pytest.raises(DomainError):
        hyperbolic_weight(1.0)


def test_hopf_differential_vanishes_for_conformal(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "identity"))
    assert np.allclose(hopf_differential(d, 2.0).values, 0.0)
    assert np.allclose(ahlfors_hopf(d, 1.0, 8).values, 0.0)


def test_hopf_differential_affine_oracle(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "affine", 1.0, 1.0 / 3.0))
    phi = hopf_differential(d, 2.0)
    assert np.allclose(phi.values, 2.5 * (1.0 / 3.0))
    psi = ahlfors_hopf(d, 1.0, 2)
    # S_2(2.5) = 6.625
    assert np.allclose(psi.values, 6.625 / 3.0)


def test_ahlfors_hopf_exponential_form(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "affine", 1.0, 1.0 / 3.0))
    psi = ahlfors_hopf(d, 1.0, None)
    assert np.allclose(psi.values, np.exp(2.5) / 3.0)


def test_ahlfors_hopf_modulus_nondecreasing_in_n(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "affine", 1.0, 1.0 / 3.0))
    mags = [np.abs(ahlfors_hopf(d, 1.0, n).values).max() for n in (1, 2, 4, 8)]
    assert all(a <= b + 1e-14 for a, b in zip(mags, mags[1:]))


def test_hyperbolic_weight_requires_image_in_disk(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "affine", 2.0, 0.0))
    with pytest.raises(DomainError):
        ahlfors_hopf(d, 1.0, 4, weight="hyperbolic")
    shrunk = wirtinger_derivatives(sample_analytic(disk3, "affine", 0.5, 0.1))
    psi = ahlfors_hopf(shrunk, 1.0, 4, weight="hyperbolic")
    assert np.isfinite(psi.values).all()


def test_holomorphy_residual_constant_field(disk4):
    f = HopfField(disk4, np.full(disk4.n_triangles, 1.0 + 2.0j),
                  np.zeros(disk4.n_triangles, bool))
    res = holomorphy_residual(f)
    assert res.l1_residual == pytest.approx(0.0, abs=1e-12)
    assert res.l2_residual == pytest.approx(0.0, abs=1e-12)


def test_holomorphy_residual_recovers_antiholomorphic(disk4):
    c = disk4.centroids()
    f = HopfField(disk4, np.conj(c), np.zeros(disk4.n_triangles, bool))
    res = holomorphy_residual(f)
    # c2 = 1 at every interior vertex, so L1 = interior lumped area
    assert res.l1_residual == pytest.approx(res.interior_area, rel=1e-10)


def test_holomorphy_residual_first_order_for_smooth_fields():
    import fdmaps
    resids = []
    for level in (3, 4, 5):
        mesh = fdmaps.build_disk_mesh(level)
        c = mesh.centroids()
        f = HopfField(mesh, c ** 2, np.zeros(mesh.n_triangles, bool))
        resids.append(holomorphy_residual(f).l1_residual)
    assert resids[0] > 2.0 * resids[1] > 4.0 * resids[2]


def test_holomorphy_residual_affine_invariance(disk4):
    c = disk4.centroids()
    base = np.conj(c) * np.abs(c)
    flags = np.zeros(disk4.n_triangles, bool)
    r0 = holomorphy_residual(HopfField(disk4, base, flags)).l1_residual
    r1 = holomorphy_residual(HopfField(disk4, base + (3.0 - 2.0j) + 5.0j * c,
                                       flags)).l1_residual
    assert r1 == pytest.approx(r0, rel=1e-9)


def test_inverse_ahlfors_hopf_identity_is_zero(disk3):
    d = wirtinger_derivatives(sample_analytic(disk3, "identity"))
    psi = inverse_ahlfors_hopf(d, 1.0, 8)
    assert np.allclose(psi.values, 0.0)
    assert np.allclose(psi.chart, disk3.centroids())


def test_inverse_ahlfors_hopf_pullback_oracle(disk3):
    # affine(1, 1/3): J = 8/9, S_2(2.5) = 6.625,
    # h_w conj(h_wbar) = -conj(fz fzbar)/J^2
    d = wirtinger_derivatives(sample_analytic(disk3, "affine", 1.0, 1.0 / 3.0))
    psi = inverse_ahlfors_hopf(d, 1.0, 2)
    expected = -6.625 * (1.0 / 3.0) / (8.0 / 9.0) ** 2
    assert np.allclose(psi.values, expected)


def test_flagged_triangles_are_nan(disk3):
    m = sample_analytic(disk3, "identity")
    folded = type(m)(disk3, np.conj(m.values), None)
    d = wirtinger_derivatives(folded)
    phi = hopf_differential(d, 2.0)
    assert phi.flagged.all()
    assert np.isnan(phi.values.real).all()


def test_hopf_to_csv(tmp_path, disk3):
    from fdmaps.hopf import hopf_to_csv
    d = wirtinger_derivatives(sample_analytic(disk3, "identity"))
    path = tmp_path / "hopf.csv"
    hopf_to_csv(ahlfors_hopf(d, 1.0, 4), path)
    rows = path.read_text().strip().splitlines()
    assert len(rows) == disk3.n_triangles + 1
