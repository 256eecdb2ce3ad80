"""Diagram automorphisms and the data of twisted conjugation.

Coordinates on the fixed parts
------------------------------
A kappa-fixed weight is constant on kappa-orbits of fundamental weights, so it
is recorded by its "orbit coordinates" ``c`` (one entry per orbit ``O``, the
coefficient of ``sum_{i in O} omega_i``).  A point of ``t^kappa`` is recorded
by ``y``, its coordinates in the basis ``m_O = (1/|O|) sum_{i in O}
alpha_i^vee`` of the lattice ``M = exp^{-1}(T^kappa ∩ T_kappa)``.  With these
choices the pairing is ``c @ y`` and ``M`` is ``Z^k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _exact
from .rootsystem import RootSystem, build_root_system

__all__ = [
    "Twist",
    "OrbitSystem",
    "make_twist",
    "named_twist",
    "orbit_root_system",
    "fundamental_alcove",
    "twisted_weyl_group",
    "sample_alcove",
    "TWIST_NAMES",
]

TWIST_NAMES = ("identity", "flip", "triality")


def _perm_order(perm: Sequence[int]) -> int:
    n = len(perm)
    p = list(range(n))
    for k in range(1, 7):
        p = [perm[i] for i in p]
        if p == list(range(n)):
            return k
    return 0


@dataclass(frozen=True)
class OrbitSystem:
    """The orbit root system, embedded in ``(t*)^kappa`` (orbit coordinates)."""

    series: str
    rank: int
    roots: tuple[tuple[Fraction, ...], ...]
    positive_roots: tuple[tuple[Fraction, ...], ...]
    simple_roots: tuple[tuple[Fraction, ...], ...]
    highest_root: tuple[Fraction, ...]
    marks: tuple[int, ...]
    simple_coroots_y: tuple[tuple[Fraction, ...], ...]
    highest_coroot_y: tuple[Fraction, ...]

    @property
    def label(self) -> str:
        return f"{self.series}{self.rank}"

    def __str__(self) -> str:
        return self.label


class Twist:
    """A diagram automorphism ``kappa`` of a simple root system.

    ``simple_perm[i]`` is the index of ``kappa(alpha_i)``.  All invariants
    are checked in the constructor.
    """

    def __init__(self, base: RootSystem, simple_perm: Sequence[int]):
        r = base.rank
        perm = tuple(int(i) for i in simple_perm)
        if sorted(perm) != list(range(r)):
            raise ValueError(f"{perm} is not a permutation of 0..{r - 1}")
        a = base.cartan_matrix
        if any(a[perm[i], perm[j]] != a[i, j] for i in range(r) for j in range(r)):
            raise ValueError(f"permutation {perm} does not preserve the Cartan matrix of {base.label}")
        order = _perm_order(perm)
        if order not in (1, 2, 3):
            raise ValueError(f"diagram automorphism of order {order} is not supported")
        self.base = base
        self.simple_perm = perm
        self.order = order

        p = np.zeros((r, r), dtype=np.int64)
        for i, j in enumerate(perm):
            p[j, i] = 1
        self.P = p

        seen, orbits = set(), []
        for i in range(r):
            if i in seen:
                continue
            orb, j = [i], perm[i]
            while j != i:
                orb.append(j)
                j = perm[j]
            seen.update(orb)
            orbits.append(tuple(orb))
        self.orbits: tuple[tuple[int, ...], ...] = tuple(orbits)
        k = len(orbits)
        self.fixed_rank = k
        self.moved_rank = r - k

        # F: orbit coordinates -> omega coordinates; E: y -> coroot coordinates
        f = np.zeros((r, k), dtype=np.int64)
        e = [[Fraction(0)] * k for _ in range(r)]
        for o, orb in enumerate(orbits):
            for i in orb:
                f[i, o] = 1
                e[i][o] = Fraction(1, len(orb))
        self.F = f
        self.E = e
        self.E_f = _exact.as_float(e)

        avg = sum(np.linalg.matrix_power(p, s) for s in range(order)) / order
        self.fixed_proj = avg
        self.moved_proj = np.eye(r) - avg

        # Gram matrices on the fixed parts
        ft = _exact.to_fraction_matrix(f.T)
        self.gram_c = _exact.matmul(_exact.matmul(ft, base.omega_gram), _exact.to_fraction_matrix(f))
        self.gram_y = _exact.matmul(_exact.matmul(_exact.transpose(e), base.coroot_gram), e)
        self.gram_c_f = _exact.as_float(self.gram_c)
        self.gram_y_f = _exact.as_float(self.gram_y)

        self.intersection_order = self._intersection_order_moved()
        alt = self._intersection_order_fixed()
        if alt != self.intersection_order:
            raise ArithmeticError(f"|T^k ∩ T_k| disagrees: {self.intersection_order} vs {alt}")
        expected = 3 if order == 3 else 2 ** self.moved_rank
        if self.intersection_order != expected:
            raise ArithmeticError(f"|T^k ∩ T_k| = {self.intersection_order}, expected {expected}")

    def __repr__(self) -> str:
        return f"Twist({self.base.label}, {self.simple_perm})"

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    # -- T^kappa ∩ T_kappa --------------------------------------------------
    def _moved_lattice_basis(self) -> list[list[int]]:
        r = self.base.rank
        basis = []
        for orb in self.orbits:
            for i in orb[1:]:
                v = [0] * r
                v[i], v[orb[0]] = 1, -1
                basis.append(v)
        return basis

    def _intersection_order_moved(self) -> int:
        """Index of ``(kappa - 1) L`` in ``L = Lambda ∩ t_kappa``."""
        basis = self._moved_lattice_basis()
        if not basis:
            return 1
        b = _exact.to_fraction_matrix(basis)
        pm = _exact.to_fraction_matrix(self.P - np.eye(self.base.rank, dtype=np.int64))
        images = _exact.transpose(_exact.matmul(pm, _exact.transpose(b)))
        # coordinates of the images in the basis of L, via the Gram system
        gb = _exact.matmul(b, _exact.transpose(b))
        coords = [_exact.solve(gb, [sum(x * y for x, y in zip(img, row)) for row in b]) for img in images]
        d = abs(_exact.det(coords))
        if d.denominator != 1:
            raise ArithmeticError("(kappa - 1) does not preserve the moved lattice")
        return int(d)

    def _intersection_order_fixed(self) -> int:
        """Index of ``Lambda ∩ t^kappa`` in ``M = proj(Lambda)``."""
        # m_O has coroot coordinates 1/|O| on O, so Lambda ∩ t^kappa = prod |O| Z in y
        return math.prod(len(o) for o in self.orbits)

    # -- conversions ------------------------------------------------------
    def weight_to_orbit(self, lam: Sequence) -> tuple[Fraction, ...]:
        lam = [_exact.frac(x) for x in lam]
        if not self.is_fixed_weight(lam):
            raise ValueError(f"weight {tuple(lam)} is not kappa-fixed")
        return tuple(lam[o[0]] for o in self.orbits)

    def orbit_to_weight(self, c: Sequence) -> np.ndarray:
        return self.F @ np.asarray(c, dtype=object)

    def y_to_xi(self, y: np.ndarray) -> np.ndarray:
        """``t^kappa`` point(s) in y coordinates to coroot coordinates (last axis)."""
        return np.asarray(y, dtype=float) @ self.E_f.T

    def xi_to_y(self, xi: np.ndarray) -> np.ndarray:
        """Orbit sums; exact inverse of :meth:`y_to_xi` on ``t^kappa``."""
        return np.asarray(xi, dtype=float) @ self.F

    def is_fixed_weight(self, lam: Sequence) -> bool:
        return all(lam[self.simple_perm[i]] == lam[i] for i in range(self.base.rank))

    def is_fixed_point(self, xi: Sequence[float], tol: float = 1e-12) -> bool:
        xi = np.asarray(xi, dtype=float)
        return bool(np.all(np.abs(self.P @ xi - xi) < tol))

    def act(self, mu: Sequence) -> np.ndarray:
        """``kappa(mu)`` for a weight (or coroot-coordinate vector)."""
        return self.P @ np.asarray(mu)

    # -- W^kappa ------------------------------------------------------------
    @cached_property
    def _wk(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = self.base.weyl_elements
        p = self.P
        keep = np.all(w @ p == np.einsum("ij,njk->nik", p, w), axis=(1, 2))
        wk = w[keep]
        # restriction to (t*)^kappa in orbit coordinates
        reps = [o[0] for o in self.orbits]
        restr = wk[:, reps, :] @ self.F
        signs = np.rint(np.linalg.det(restr.astype(float))).astype(np.int64)
        return wk, restr.astype(np.int64), signs

    @property
    def wk_elements(self) -> np.ndarray:
        """Elements of ``W^kappa`` as matrices on omega coordinates."""
        return self._wk[0]

    @property
    def wk_fixed_action(self) -> np.ndarray:
        """``W^kappa`` acting on orbit coordinates of fixed weights."""
        return self._wk[1]

    @property
    def wk_signs(self) -> np.ndarray:
        """``(-1)^{|w|}`` computed as the determinant on ``t^kappa``."""
        return self._wk[2]

    @property
    def wk_order(self) -> int:
        return len(self.wk_elements)

    @property
    def twisted_weyl_order(self) -> int:
        return self.intersection_order * self.wk_order

    @cached_property
    def wk_y_action(self) -> np.ndarray:
        """``W^kappa`` acting on y coordinates of ``t^kappa`` (contragredient action)."""
        inv = np.linalg.inv(self.wk_fixed_action.astype(float))
        return np.rint(np.transpose(inv, (0, 2, 1))).astype(np.int64)

    # -- orbit root system -------------------------------------------------------
    @cached_property
    def orbit_system(self) -> OrbitSystem:
        return _build_orbit_system(self)

    @cached_property
    def alcove(self) -> np.ndarray:
        """Vertices of the twisted alcove in y coordinates, one per row."""
        osys = self.orbit_system
        k = self.fixed_rank
        rows = [list(b) for b in osys.simple_roots]
        verts = [np.zeros(k)]
        for i in range(k):
            a = rows[:i] + [list(osys.highest_root)] + rows[i + 1:]
            rhs = [Fraction(0)] * k
            rhs[i] = Fraction(1)
            verts.append(np.array([float(x) for x in _exact.solve(a, rhs)]))
        return np.array(verts)

    def alcove_contains(self, y: np.ndarray, tol: float = 1e-12) -> bool:
        osys = self.orbit_system
        y = np.asarray(y, dtype=float)
        s = np.array([[float(x) for x in b] for b in osys.simple_roots]) @ y
        th = np.array([float(x) for x in osys.highest_root]) @ y
        return bool(np.all(s >= -tol) and th <= 1 + tol)

    def reduce_to_alcove(self, y: Sequence[float], max_steps: int = 10_000) -> np.ndarray:
        """Representative in the alcove of the orbit of ``y`` under ``W^kappa ⋉ M``."""
        osys = self.orbit_system
        simple = np.array([[float(x) for x in b] for b in osys.simple_roots])
        cor = np.array([[float(x) for x in b] for b in osys.simple_coroots_y])
        th = np.array([float(x) for x in osys.highest_root])
        thv = np.array([float(x) for x in osys.highest_coroot_y])
        y = np.array(y, dtype=float)
        # translate first so the loop only has to fix a bounded amount
        y = y - np.floor(y)
        for _ in range(max_steps):
            s = simple @ y
            i = int(np.argmin(s))
            if s[i] < -1e-14:
                y = y - s[i] * cor[i]
                continue
            t = th @ y
            if t > 1 + 1e-14:
                y = y - (t - 1) * thv
                continue
            return y
        raise RuntimeError("alcove reduction did not converge")

    def affine_images(self, y: Sequence[float], radius: int = 1) -> np.ndarray:
        """All ``w y + m`` for ``w`` in ``W^kappa`` and ``m`` in ``M`` with entries in ``[-radius, radius]``."""
        y = np.asarray(y, dtype=float)
        wy = self.wk_y_action @ y
        k = self.fixed_rank
        shifts = np.array(np.meshgrid(*[np.arange(-radius, radius + 1)] * k, indexing="ij")).reshape(k, -1).T
        return (wy[:, None, :] + shifts[None]).reshape(-1, k)


def _classify(rank: int, nroots: int, lengths: Sequence[Fraction], simple_lengths: Sequence[Fraction]) -> str:
    distinct = sorted(set(lengths))
    if rank == 1:
        return "A"
    if len(distinct) == 1:
        if nroots == rank * (rank + 1):
            return "A"
        if nroots == 2 * rank * (rank - 1):
            return "D"
        return "E"
    short = sum(1 for ln in lengths if ln == distinct[0])
    if nroots == 12 and rank == 2:
        return "G"
    if nroots == 48 and rank == 4 and short == 24:
        return "F"
    if rank == 2:
        return "B" if simple_lengths[-1] < simple_lengths[0] else "C"
    return "B" if short == 2 * rank else "C"


def _build_orbit_system(tw: Twist) -> OrbitSystem:
    rs = tw.base
    k = tw.fixed_rank
    reps = [o[0] for o in tw.orbits]
    gram = tw.gram_c

    def ip(u, v):
        return _exact.dot(u, gram, v)

    def proj(alpha):
        acc = [Fraction(0)] * rs.rank
        v = np.array(alpha, dtype=np.int64)
        for _ in range(tw.order):
            acc = [a + int(x) for a, x in zip(acc, v)]
            v = tw.P @ v
        return tuple(acc[i] / tw.order for i in reps)

    proj_pos = {proj(a) for a in rs.positive_roots}
    proj_all = proj_pos | {tuple(-x for x in v) for v in proj_pos}
    if tw.order == 1:
        kept = proj_pos
    else:
        if rs.series == "A" and rs.rank % 2 == 0:
            # BC-type projection: keep the reduced subsystem without the doubled roots
            kept = {v for v in proj_pos if tuple(x / 2 for x in v) not in proj_all}
        else:
            kept = proj_pos
        kept = {tuple(2 * x / ip(v, v) for x in v) for v in kept}
    pos = sorted(kept)
    sums = {tuple(a + b for a, b in zip(u, v)) for u in pos for v in pos}
    simple = [v for v in pos if v not in sums]
    if len(simple) != k:
        raise ArithmeticError(f"orbit system has {len(simple)} simple roots, expected {k}")

    def coroot_y(v):
        n = ip(v, v)
        return tuple(sum(gram[i][j] * v[j] for j in range(k)) * 2 / n for i in range(k))

    # The simple coroots must be exactly the basis m_O of M (M is the coroot
    # lattice, orbit sums of fundamental weights are the fundamental weights).
    # This also attaches each simple root to an orbit, which fixes the order.
    unit = {tuple(Fraction(int(i == j)) for j in range(k)): i for i in range(k)}
    try:
        simple.sort(key=lambda v: unit[coroot_y(v)])
    except KeyError:
        raise ArithmeticError("orbit system coroots do not match the lattice M") from None
    simple_cor = [coroot_y(v) for v in simple]

    # express positive roots in the simple basis to find the highest one
    sb = [list(v) for v in simple]
    sbt = _exact.transpose(sb)
    expansion = {v: _exact.solve(sbt, list(v)) for v in pos}
    highest = max(pos, key=lambda v: sum(expansion[v]))
    marks = tuple(int(x) for x in expansion[highest])
    lengths = [ip(v, v) for v in pos] * 2
    series = _classify(k, 2 * len(pos), lengths, [ip(v, v) for v in simple])
    roots = tuple(pos) + tuple(tuple(-x for x in v) for v in pos)
    return OrbitSystem(
        series=series,
        rank=k,
        roots=roots,
        positive_roots=tuple(pos),
        simple_roots=tuple(simple),
        highest_root=highest,
        marks=marks,
        simple_coroots_y=tuple(simple_cor),
        highest_coroot_y=coroot_y(highest),
    )


def make_twist(rs: RootSystem, simple_perm: Sequence[int]) -> Twist:
    """The twist of ``rs`` permuting simple roots by ``simple_perm`` (cached per permutation)."""
    return _cached_twist(rs, tuple(int(i) for i in simple_perm))


@lru_cache(maxsize=None)
def _cached_twist(rs: RootSystem, perm: tuple[int, ...]) -> Twist:
    return Twist(rs, perm)


def named_twist(rs: RootSystem, name: str) -> Twist:
    """``identity``, ``flip`` (A_n n>=2, D_n, E_6) or ``triality`` (D_4)."""
    r = rs.rank
    ident = list(range(r))
    if name == "identity":
        return make_twist(rs, ident)
    if name == "flip":
        if rs.series == "A" and r >= 2:
            return make_twist(rs, [r - 1 - i for i in range(r)])
        if rs.series == "D":
            perm = ident[:]
            perm[r - 2], perm[r - 1] = r - 1, r - 2
            return make_twist(rs, perm)
        if rs.series == "E" and r == 6:
            return make_twist(rs, [5, 1, 4, 3, 2, 0])
    elif name == "triality":
        if rs.series == "D" and r == 4:
            return make_twist(rs, [2, 1, 3, 0])
    else:
        raise ValueError(f"unknown twist name {name!r}; expected one of {TWIST_NAMES}")
    raise ValueError(f"{rs.label} has no diagram automorphism called {name!r}")


def orbit_root_system(tw: Twist) -> OrbitSystem:
    return tw.orbit_system


def fundamental_alcove(tw: Twist) -> np.ndarray:
    return tw.alcove


def twisted_weyl_group(tw: Twist) -> tuple[np.ndarray, int]:
    """``(W^kappa as matrices, |W^(kappa)|)``; the order identity is checked."""
    wk = tw.wk_elements
    osys = tw.orbit_system
    own = build_root_system(osys.series, osys.rank).weyl_order
    if own != len(wk):
        raise ArithmeticError(f"|W^kappa| = {len(wk)} but |W({osys.label})| = {own}")
    return wk, tw.intersection_order * len(wk)


def sample_alcove(tw: Twist, n: int, rng: np.random.Generator, concentration: float = 3.0) -> np.ndarray:
    """Random points of the twisted alcove (y coordinates).

    Barycentric weights are Dirichlet distributed; ``concentration > 1``
    keeps the points away from the walls, where every twisted class is regular.
    """
    bary = rng.dirichlet([concentration] * (tw.fixed_rank + 1), size=n)
    return bary @ tw.alcove
