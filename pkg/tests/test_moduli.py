import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistedlie import _suite
from twistedlie.characters import CharacterContext, fixed_dominant_weights, heat_eigenvalue, twining_values
from twistedlie.measures import ClassData, VolumeExpr, class_volume
from twistedlie.moduli import (
    SurfaceSpec,
    VanishingCoefficient,
    default_level_cutoff,
    dh_coefficient,
    dh_coefficient_table,
    dh_density,
    dh_density_extrapolated,
    dh_density_values,
    double_coefficient,
    fuse_coefficients,
    reduced_volume,
)
from twistedlie.oracles import mc_compare
from twistedlie.rootsystem import build_root_system, weyl_dimension
from twistedlie.twist import named_twist, sample_alcove

A1 = build_root_system("A", 1)
A2 = build_root_system("A", 2)


def test_fused_double_coefficient():
    flip, ident = named_twist(A2, "flip"), named_twist(A2, "identity")
    for pair in [(ident, ident), (flip, flip), (ident, flip), (flip, ident)]:
        spec = SurfaceSpec(A2, 1, (pair,))
        for lam in fixed_dominant_weights(flip, 4):
            c = dh_coefficient(spec, lam)
            assert c.volg_power == 2
            assert c.rational == Fraction(1, weyl_dimension(A2, lam)) and c.factors == ()


def test_two_boundaries_trivial_weight():
    tw = named_twist(A2, "identity")
    c1 = ClassData.from_alcove(tw, [0.2, 0.1])
    c2 = ClassData.from_alcove(tw, [0.1, 0.3])
    spec = SurfaceSpec(A2, 0, (), (c1, c2))
    got = dh_coefficient(spec, (0, 0))
    assert got.volg_power == 2
    assert got.coeff == pytest.approx(class_volume(c1).coeff * class_volume(c2).coeff, rel=1e-14)


def test_one_holed_torus_a1():
    tw = named_twist(A1, "identity")
    cd = ClassData.from_alcove(tw, [0.17])
    spec = SurfaceSpec.untwisted(A1, 1, [cd])
    vol = class_volume(cd).coeff
    for n in range(6):
        chi = twining_values(CharacterContext(tw), (n,), cd.y[None])[0]
        c = dh_coefficient(spec, (n,))
        assert c.volg_power == 3
        assert c.coeff == pytest.approx(vol * chi / (n + 1) ** 2, rel=1e-13, abs=1e-15)


def test_fuse_examples():
    v2 = VolumeExpr(Fraction(1), (), 2)
    fused = fuse_coefficients(v2, v2, 5)
    assert fused.volg_power == 4 and fused.rational == Fraction(1, 5)
    a = VolumeExpr(Fraction(3, 7), (0.4,), 1)
    assert fuse_coefficients(a, v2, 1) == a * v2
    with pytest.raises(ValueError):
        fuse_coefficients(a, a, 0)


def test_fusing_double_reproduces_enlarged_surface():
    tw = named_twist(A2, "identity")
    cd = ClassData.from_alcove(tw, [0.2, 0.25])
    one = SurfaceSpec(A2, 0, (), (cd,))
    two = SurfaceSpec(A2, 0, (), (cd, cd))
    for lam in fixed_dominant_weights(tw, 3):
        dim = weyl_dimension(A2, lam)
        base = dh_coefficient(one, lam)
        assert fuse_coefficients(base, base, dim) == dh_coefficient(two, lam)
        assert fuse_coefficients(double_coefficient(lam, lam), base, dim).volg_power == base.volg_power + 2


def test_vanishing_coefficient():
    flip = named_twist(A2, "flip")
    spec = SurfaceSpec(A2, 1, ((flip, flip),))
    c = dh_coefficient(spec, (1, 0))
    assert isinstance(c, VanishingCoefficient)
    assert not c and c.coeff == 0
    table = dh_coefficient_table(spec, 4)
    assert all(lam[0] == lam[1] for lam in table)


def test_spec_validation():
    with pytest.raises(ValueError):
        SurfaceSpec(A1, 0, (), ())
    with pytest.raises(ValueError):
        SurfaceSpec(A1, 1, ())
    other = named_twist(A2, "identity")
    with pytest.raises(ValueError):
        SurfaceSpec(A1, 1, ((other, other),))


def test_degree_bookkeeping():
    rng = np.random.default_rng(11)
    for _ in range(10):
        spec = _random_spec(rng)
        for lam, c in dh_coefficient_table(spec, 2).items():
            assert c.volg_power == 2 * spec.h + spec.b


def test_default_cutoff_bounds_tail():
    spec = SurfaceSpec.untwisted(build_root_system("B", 2), 1)
    t = 0.05
    cut = default_level_cutoff(spec, t)
    for lam in fixed_dominant_weights(spec.target_twist, cut + 3):
        if spec.group.level(lam) > cut:
            assert math.exp(-t * float(heat_eigenvalue(spec.group, lam))) < 1e-8
    with pytest.raises(ValueError):
        default_level_cutoff(spec, 0)


def test_density_invariant_and_real():
    flip = named_twist(A2, "flip")
    spec = SurfaceSpec(A2, 0, (), (ClassData.from_alcove(flip, [0.3]),))
    tw = spec.target_twist
    y = sample_alcove(tw, 5, np.random.default_rng(0))
    base, res, _ = dh_density_values(spec, y, 0.05)
    for img in tw.wk_y_action:
        moved, _, _ = dh_density_values(spec, y @ img.T + 1, 0.05)
        assert np.allclose(moved, base, atol=1e-12)
    assert np.abs(base.imag).max() < 1e-10


def test_density_negativity_bounded_by_residual():
    spec = SurfaceSpec.untwisted(A1, 1)
    y = np.linspace(0.01, 0.49, 25)[:, None]
    vals, res, _ = dh_density_values(spec, y, 0.01, level_cutoff=20)
    assert np.all(vals.real >= -res - 1e-12)


def test_density_api_and_extrapolation():
    spec = SurfaceSpec.untwisted(A1, 1)
    r = dh_density(spec, [0.2], heat_t=0.02)
    assert r.volg_power == 1 and r.level_cutoff >= 1
    ex = dh_density_extrapolated(spec, [0.2], heat_t=0.004)
    assert ex.extrapolation_residual is not None
    assert ex.coeff.real == pytest.approx(dh_density(spec, [0.2], 0.001).coeff.real, rel=1e-2)
    with pytest.raises(ValueError):
        dh_density(spec, [0.2], heat_t=-1)


def test_reduced_volume():
    tw = named_twist(A1, "identity")
    spec = SurfaceSpec.untwisted(A1, 1, [ClassData.from_alcove(tw, [0.2])])
    r1 = reduced_volume(spec, [0.3], 1)
    r3 = reduced_volume(spec, [0.3], 3)
    assert r3.coeff == pytest.approx(3 * r1.coeff)
    with pytest.raises(ValueError):
        reduced_volume(spec, [0.0], 1)
    with pytest.raises(ValueError):
        reduced_volume(spec, [0.3], 0)


def test_reduced_volume_zero_where_density_vanishes():
    # a single class: the measure is a point mass, so away from it the regularized density vanishes
    tw = named_twist(A1, "identity")
    spec = SurfaceSpec(A1, 0, (), (ClassData.from_alcove(tw, [0.1]),))
    r = reduced_volume(spec, [0.4], 2, heat_t=1e-3)
    assert abs(r.coeff) < 1e-6


def _random_spec(rng):
    series, rank = [("A", 1), ("A", 2), ("A", 3), ("D", 4)][rng.integers(4)]
    rs = build_root_system(series, rank)
    names = ["identity"] + (["flip"] if rank > 1 else []) + (["triality"] if series == "D" else [])
    pick = lambda: named_twist(rs, names[rng.integers(len(names))])
    h = int(rng.integers(0, 3))
    b = int(rng.integers(0 if h else 1, 4))
    bounds = []
    for _ in range(b):
        tw = pick()
        bounds.append(ClassData.from_alcove(tw, sample_alcove(tw, 1, rng)[0]))
    return SurfaceSpec(rs, h, tuple((pick(), pick()) for _ in range(h)), tuple(bounds))


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1))
def test_corollary_equals_iterated_fusion(seed):
    assert _suite.corollary_error(_random_spec(np.random.default_rng(seed)), 2) == 0


@pytest.mark.slow
def test_mc_one_holed_torus_su2():
    tw = named_twist(A1, "identity")
    spec = SurfaceSpec.untwisted(A1, 1, [ClassData.from_alcove(tw, [0.15])])
    cmp = mc_compare(spec, 400_000, 20, seed=3, heat_t=1e-3)
    assert np.abs(cmp.mc / cmp.series - 1)[2:-2].max() < 0.03
    assert np.mean(np.abs(cmp.z) < 3) >= 0.95


@pytest.mark.slow
def test_mc_two_flip_boundaries_su3():
    flip = named_twist(A2, "flip")
    spec = SurfaceSpec(A2, 0, (), (ClassData.from_alcove(flip, [0.2]), ClassData.from_alcove(flip, [0.35])))
    assert spec.target_twist.is_trivial
    cmp = mc_compare(spec, 200_000, 8, seed=3, heat_t=1e-3)
    assert np.mean(np.abs(cmp.z) < 3) >= 0.95
    assert cmp.total_mass == pytest.approx(1)
