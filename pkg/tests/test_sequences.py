import numpy as np
import pytest

from fdmaps.errors import ConfigurationError
from fdmaps.fields import analytic_affine, analytic_radial_stretch
from fdmaps.sequences import (SequenceRecipe, generate, mollify_values,
                              radial_stretch_facts)


def test_recipe_validation():
    with pytest.raises(ConfigurationError):
        SequenceRecipe(kind="nope", params={}, j_max=4)
    with pytest.raises(ConfigurationError):
        SequenceRecipe(kind="constant", params={}, j_max=1)


def test_recipe_json_round_trip():
    r = SequenceRecipe(kind="mollified",
                       params={"target": "radial_stretch", "alpha": 2.0},
                       j_max=8)
    assert SequenceRecipe.from_json(r.to_json()) == r


def test_radial_stretch_facts():
    f1 = radial_stretch_facts(1.0)
    assert f1.khs == pytest.approx(2.0)
    assert f1.abs_mu == pytest.approx(0.0)
    f2 = radial_stretch_facts(2.0)
    assert f2.khs == pytest.approx(2.5)
    assert f2.abs_mu == pytest.approx(1.0 / 3.0)
    f3 = radial_stretch_facts(3.0)
    assert f3.khs == pytest.approx(10.0 / 3.0)
    assert f3.abs_mu == pytest.approx(0.5)


def test_constant_sequence(disk3):
    seq = generate(SequenceRecipe(kind="constant", params={}, j_max=4), disk3)
    assert len(seq) == 4
    for j in range(4):
        assert np.allclose(seq.members[j].values, seq.limit.values)


def test_oscillation_requires_rect(disk3):
    with pytest.raises(ConfigurationError):
        generate(SequenceRecipe(kind="oscillation", params={}, j_max=4), disk3)


def test_oscillation_members_shrink_to_identity(unit_square_16):
    seq = generate(SequenceRecipe(kind="oscillation", params={}, j_max=8),
                   unit_square_16)
    dev = [np.abs(m.values - seq.mesh.nodes).max() for m in seq.members]
    # amplitude 1/(2 pi j) decays with j
    assert dev[0] > dev[-1]
    assert dev[-1] <= 1.0 / (2.0 * np.pi * 8) + 1e-12
    assert "fzbar_l2_gap" in seq.metadata
    assert seq.metadata["fzbar_l2_gap"] == pytest.approx(
        np.sqrt(unit_square_16.total_area / 8.0))


def test_mollification_is_exact_on_affine(rng):
    amap = analytic_affine(1.3, 0.4 - 0.2j)
    pts = rng.uniform(-0.5, 0.5, 30) + 1j * rng.uniform(-0.5, 0.5, 30)
    out = mollify_values(amap, pts, 0.05)
    # a symmetric kernel with unit mass reproduces affine maps exactly
    assert np.allclose(out, amap.value(pts), atol=1e-12)


def test_mollification_converges_to_target(rng):
    amap = analytic_radial_stretch(2.0)
    pts = rng.uniform(0.3, 0.8, 20) + 1j * rng.uniform(-0.4, 0.4, 20)
    errs = [np.abs(mollify_values(amap, pts, delta) - amap.value(pts)).max()
            for delta in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    # second-order accuracy away from the origin
    assert errs[2] < 0.3 * errs[1]


def test_mollified_sequence_limit_is_target(disk3):
    seq = generate(SequenceRecipe(kind="mollified",
                                  params={"target": "radial_stretch", "alpha": 2.0},
                                  j_max=6), disk3)
    amap = analytic_radial_stretch(2.0)
    assert np.allclose(seq.limit.values, amap.value(disk3.nodes))
    last = seq.members[-1].values
    middle_ring = np.abs(disk3.nodes) > 0.5
    assert np.abs(last - seq.limit.values)[middle_ring].max() < 1e-2


def test_affine_drift_sequence(disk3):
    seq = generate(SequenceRecipe(kind="affine_drift",
                                  params={"a": 1.0, "b": 0.2, "da": 0.5, "db": 0.1},
                                  j_max=8), disk3)
    # member j differs from the limit by the 1/j drift
    v1 = seq.members[0].values
    vlim = seq.limit.values
    drift = 0.5 * disk3.nodes + 0.1 * np.conj(disk3.nodes)
    assert np.allclose(v1 - vlim, drift)


def test_radial_stretch_family_sequence(disk3):
    seq = generate(SequenceRecipe(kind="radial_stretch_family",
                                  params={"alpha": 2.0, "dalpha": 1.0},
                                  j_max=4), disk3)
    amap = analytic_radial_stretch(2.0)
    assert np.allclose(seq.limit.values, amap.value(disk3.nodes))
    a3 = analytic_radial_stretch(2.0 + 1.0 / 3.0)
    assert np.allclose(seq.members[2].values, a3.value(disk3.nodes))
