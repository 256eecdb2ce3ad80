import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twistedlie.characters import weight_multiplicities
from twistedlie.rootsystem import (
    TorusPoint,
    build_root_system,
    classical_dimension,
    classical_weyl_order,
    lattice_covolume,
    weyl_dimension,
)

TYPES = [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("B", 2), ("B", 3), ("C", 3), ("C", 4),
         ("D", 4), ("D", 5), ("G", 2), ("F", 4), ("E", 6)]


def test_a2_roots_and_weyl_order():
    rs = build_root_system("A", 2)
    assert len(rs.roots) == 6
    assert rs.weyl_order == 6 == len(rs.weyl_elements)


def test_a1_rho_norm():
    rs = build_root_system("A", 1)
    assert list(rs.rho) == [1]
    assert rs.inner(rs.rho, rs.rho) == Fraction(1, 2)


def test_d4_counts():
    rs = build_root_system("D", 4)
    assert len(rs.roots) == 24
    assert len(rs.weyl_elements) == 192 == 2 ** 3 * math.factorial(4)


def test_e6_weyl_order():
    assert len(build_root_system("E", 6).weyl_elements) == 51840


@pytest.mark.parametrize("series,rank", TYPES)
def test_invariants(series, rank):
    rs = build_root_system(series, rank)
    assert len(rs.positive_roots) == (classical_dimension(series, rank) - rank) // 2
    assert len(rs.weyl_elements) == classical_weyl_order(series, rank)
    assert rs.inner(rs.highest_root, rs.highest_root) == 2
    assert list(rs.rho) == [1] * rank
    # half-sum of positive roots is rho
    assert np.array_equal(rs.positive_roots.sum(axis=0), 2 * rs.rho)
    roots = {tuple(r) for r in rs.roots}
    for a in rs.roots:
        assert {tuple(rs.reflect(b, a)) for b in rs.roots} == roots


@pytest.mark.parametrize("series,rank", [t for t in TYPES if t[0] != "E" and t != ("F", 4)])
def test_weyl_closure(series, rank):
    rs = build_root_system(series, rank)
    roots = {tuple(r) for r in rs.roots}
    images = np.einsum("wij,rj->wri", rs.weyl_elements, rs.roots)
    assert all(tuple(v) in roots for v in images.reshape(-1, rank))


@pytest.mark.parametrize("series,rank,index", [("A", 1, 2), ("A", 3, 4), ("B", 3, 2), ("C", 3, 2),
                                               ("D", 4, 4), ("D", 5, 4), ("E", 6, 3), ("G", 2, 1),
                                               ("F", 4, 1)])
def test_center_order(series, rank, index):
    rs = build_root_system(series, rank)
    assert abs(np.linalg.det(rs.cartan_matrix)) == pytest.approx(index)


def test_bad_types():
    for s, r in [("A", 0), ("B", 1), ("D", 2), ("E", 5), ("G", 3), ("X", 2), ("A", 9)]:
        with pytest.raises(ValueError):
            build_root_system(s, r)


def test_weyl_dimension_examples():
    a1, a2 = build_root_system("A", 1), build_root_system("A", 2)
    assert weyl_dimension(a2, (0, 0)) == 1
    for n in range(8):
        assert weyl_dimension(a1, (n,)) == n + 1
    assert weyl_dimension(a2, (1, 1)) == 8
    assert weyl_dimension(build_root_system("E", 6), (1, 0, 0, 0, 0, 0)) == 27
    assert weyl_dimension(build_root_system("G", 2), (1, 0)) in (7, 14)
    with pytest.raises(ValueError):
        weyl_dimension(a2, (-1, 0))


@pytest.mark.parametrize("series,rank", [("A", 1), ("A", 2), ("B", 2), ("G", 2)])
def test_weyl_dimension_matches_multiplicities(series, rank):
    rs = build_root_system(series, rank)
    for lam in [(1,) * rank, (2,) + (0,) * (rank - 1), (0,) * (rank - 1) + (3,)]:
        total = 0
        for mu, m in weight_multiplicities(rs, lam).items():
            orbit = np.unique(rs.weyl_elements @ np.array(mu), axis=0)
            total += m * len(orbit)
        assert total == weyl_dimension(rs, lam)


def test_covolume_examples():
    assert lattice_covolume(np.eye(3, dtype=int), np.eye(3, dtype=int)) == 1
    rs = build_root_system("A", 1)
    assert lattice_covolume(rs.integral_lattice_basis, rs.coroot_gram) == pytest.approx(math.sqrt(2))
    b = np.array([[1.0, 0.0], [0.3, 2.0]])
    assert lattice_covolume(b * [[-2.5], [1]], np.eye(2)) == pytest.approx(2.5 * lattice_covolume(b, np.eye(2)))
    with pytest.raises(ValueError):
        lattice_covolume([[1, 2], [2, 4]], [[1, 0], [0, 1]])


@st.composite
def unimodular(draw, n=3):
    m = np.eye(n, dtype=np.int64)
    for _ in range(draw(st.integers(1, 6))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i != j:
            m[i] += draw(st.integers(-2, 2)) * m[j]
    return m


@given(unimodular())
def test_covolume_unimodular_invariance(u):
    rs = build_root_system("A", 3)
    base = lattice_covolume(rs.integral_lattice_basis, rs.coroot_gram)
    assert lattice_covolume(u @ rs.integral_lattice_basis, rs.coroot_gram) == pytest.approx(base)


@given(st.lists(st.integers(0, 4), min_size=2, max_size=2), st.integers(0, 5))
def test_dominant_conjugate_is_w_invariant(lam, k):
    rs = build_root_system("A", 2)
    w = rs.weyl_elements[k]
    mu = w @ np.array(lam)
    dom, _ = rs.dominant_conjugate(mu)
    assert list(dom) == lam


def test_torus_point_equivalence():
    a = TorusPoint([0.25, 0.5])
    assert a.equivalent(TorusPoint([1.25, -0.5]))
    assert not a.equivalent(TorusPoint([0.25, 0.25]))
    assert a.character((1, 0)) == pytest.approx(1j)
