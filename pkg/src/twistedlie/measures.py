"""Volume bookkeeping for twisted conjugacy classes.

``vol_G`` is never given a numerical value; every volume is a
:class:`VolumeExpr`, a coefficient times an integer power of ``vol_G``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _exact
from .rootsystem import TorusPoint, lattice_covolume
from .twist import Twist

__all__ = [
    "VolumeExpr",
    "ClassData",
    "ChevalleySigns",
    "chevalley_signs",
    "twisted_det_factor",
    "twisted_det_factor_y",
    "class_volume",
    "weyl_alternating_sum",
    "weyl_alternating_sum_y",
    "torus_covolume",
]

log = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-24


def _factor_key(z: complex):
    return (z.real, z.imag)


@dataclass(frozen=True)
class VolumeExpr:
    """``rational * prod(factors) * vol_G**volg_power``.

    The exact rational part and the floating-point factors are kept apart
    and the factors are stored sorted, so that products assembled in a
    different order compare equal exactly.
    """

    rational: Fraction = Fraction(1)
    factors: tuple[complex, ...] = ()
    volg_power: int = 0
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rational", _exact.frac(self.rational))
        fs = tuple(sorted((complex(z) for z in self.factors), key=_factor_key))
        object.__setattr__(self, "factors", fs)

    @classmethod
    def zero(cls, volg_power: int = 0, degenerate: bool = False) -> "VolumeExpr":
        return cls(Fraction(0), (), volg_power, degenerate)

    @property
    def coeff(self) -> complex:
        out = complex(self.rational)
        for z in self.factors:
            out *= z
        return out

    @property
    def real_coeff(self) -> float:
        c = self.coeff
        if abs(c.imag) > 1e-9 * max(1.0, abs(c)):
            raise ValueError(f"coefficient {c} is not real")
        return c.real

    def is_zero(self) -> bool:
        return self.rational == 0 or any(z == 0 for z in self.factors)

    def __mul__(self, other):
        if isinstance(other, VolumeExpr):
            return VolumeExpr(self.rational * other.rational, self.factors + other.factors,
                              self.volg_power + other.volg_power, self.degenerate or other.degenerate)
        if isinstance(other, (int, Fraction)):
            return VolumeExpr(self.rational * other, self.factors, self.volg_power, self.degenerate)
        if isinstance(other, (float, complex)):
            return VolumeExpr(self.rational, self.factors + (other,), self.volg_power, self.degenerate)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return VolumeExpr(self.rational / other, self.factors, self.volg_power, self.degenerate)
        return NotImplemented

    def scaled(self, z: complex) -> "VolumeExpr":
        return self * complex(z)

    def __repr__(self) -> str:
        return f"VolumeExpr({self.coeff:.12g} * vol_G^{self.volg_power})"


@dataclass(frozen=True, eq=False)
class ClassData:
    """A twisted conjugacy class, through its alcove representative (y coordinates)."""

    twist: Twist
    point: TorusPoint

    @classmethod
    def from_alcove(cls, tw: Twist, y: Sequence[float]) -> "ClassData":
        y = np.asarray(y, dtype=float)
        red = tw.reduce_to_alcove(y)
        return cls(tw, TorusPoint(tw.y_to_xi(red)))

    @property
    def y(self) -> np.ndarray:
        return self.twist.xi_to_y(self.point.xi)


# -- Chevalley signs -------------------------------------------------------
class ChevalleySigns:
    """Signs ``eta`` with ``kappa(e_alpha) = eta_alpha e_{kappa alpha}``.

    The Chevalley basis of a simply-laced algebra is taken with Frenkel-Kac
    structure constants ``N(alpha, beta) = eps(alpha, beta)``, where ``eps``
    is the bimultiplicative sign on the root lattice with
    ``eps(a_i, a_i) = -1`` and, for ``i < j``, ``eps(a_i, a_j) = (-1)^{a_ij}``,
    ``eps(a_j, a_i) = 1``.  ``kappa`` is fixed on simple root vectors and
    propagated through brackets.
    """

    def __init__(self, tw: Twist):
        rs = tw.base
        if rs.series not in "ADE" and not tw.is_trivial:
            raise ValueError("nontrivial twists exist only for simply-laced types")
        self.twist = tw
        r = rs.rank
        a = rs.cartan_matrix
        e = np.zeros((r, r), dtype=np.int64)  # eps = (-1)^(k^T e k')
        for i in range(r):
            e[i, i] = 1
            for j in range(i + 1, r):
                if a[i, j] == -1:
                    e[i, j] = 1
        self._e = e
        self.roots = [tuple(int(x) for x in k) for k in rs.roots_simple]
        self.index = {k: n for n, k in enumerate(self.roots)}
        perm = tw.simple_perm

        def kappa(k):
            out = [0] * r
            for i, c in enumerate(k):
                out[perm[i]] += c
            return tuple(out)

        self.kappa = kappa
        eta: dict[tuple[int, ...], int] = {}
        for sign in (1, -1):
            simple = [tuple(sign * int(i == j) for j in range(r)) for i in range(r)]
            for s in simple:
                eta[s] = 1
            # breadth-first by height
            layer = simple
            while layer:
                nxt = []
                for b in layer:
                    for s in simple:
                        c = tuple(x + y for x, y in zip(b, s))
                        if c in self.index and c not in eta:
                            eta[c] = eta[b] * self.eps(s, b) * self.eps(kappa(s), kappa(b))
                            nxt.append(c)
                layer = nxt
        self.eta = eta
        self._check()

    def eps(self, u: Sequence[int], v: Sequence[int]) -> int:
        return -1 if int(np.asarray(u) @ self._e @ np.asarray(v)) % 2 else 1

    def _check(self) -> None:
        """``kappa`` must respect every bracket ``[e_a, e_b] = eps(a, b) e_{a+b}``."""
        k = self.kappa
        for u in self.roots:
            for v in self.roots:
                w = tuple(x + y for x, y in zip(u, v))
                if w in self.index:
                    lhs = self.eta[w] * self.eps(u, v)
                    rhs = self.eta[u] * self.eta[v] * self.eps(k(u), k(v))
                    if lhs != rhs:
                        raise ArithmeticError(f"twist is not an automorphism on [{u}, {v}]")
        for u in self.roots:
            neg = tuple(-x for x in u)
            # [e_a, e_-a] = eps(a, -a) h_a and kappa(h_a) = h_{kappa a}
            if self.eta[u] * self.eta[neg] * self.eps(u, neg) != self.eps(k(u), tuple(-x for x in k(u))):
                raise ArithmeticError(f"twist is not an automorphism on the sl2 of {u}")

    @cached_property
    def root_orbits(self) -> list[tuple[tuple[int, ...], ...]]:
        seen, out = set(), []
        for u in self.roots:
            if u in seen:
                continue
            orb, v = [u], self.kappa(u)
            while v != u:
                orb.append(v)
                v = self.kappa(v)
            seen.update(orb)
            out.append(tuple(orb))
        return out

    @cached_property
    def orbit_data(self) -> tuple[np.ndarray, np.ndarray]:
        """Per orbit of roots: the fixed weight ``beta_O`` (orbit coordinates) and ``eps_O``."""
        tw = self.twist
        a = tw.base.cartan_matrix
        reps = [o[0] for o in tw.orbits]
        betas, signs = [], []
        for orb in self.root_orbits:
            total = np.sum([np.array(k) @ a for k in orb], axis=0)
            betas.append(total[reps])
            signs.append(math.prod(self.eta[k] for k in orb))
        return np.array(betas, dtype=np.int64), np.array(signs, dtype=np.int64)


@lru_cache(maxsize=None)
def chevalley_signs(tw: Twist) -> ChevalleySigns:
    return ChevalleySigns(tw)


@lru_cache(maxsize=None)
def _moved_det(tw: Twist) -> int:
    """``|det(kappa - 1)|`` on ``t_kappa``."""
    p = tw.P.astype(float)
    if tw.moved_rank == 0:
        return 1
    eig = np.linalg.eigvals(p)
    val = np.prod([abs(z - 1) for z in eig if abs(z - 1) > 1e-9])
    return int(round(val))


@lru_cache(maxsize=None)
def _root_orbit_data(tw: Twist) -> tuple[np.ndarray, np.ndarray]:
    if tw.is_trivial:
        roots = tw.base.roots
        return roots.astype(np.int64), np.ones(len(roots), dtype=np.int64)
    return chevalley_signs(tw).orbit_data


def twisted_det_factor_y(tw: Twist, y: np.ndarray) -> np.ndarray:
    """Vectorized ``|det(Ad_a kappa - 1)|`` on the orthocomplement of ``t^kappa``.

    ``y`` has shape ``(..., k)`` (y coordinates of points of ``t^kappa``).
    """
    y = np.asarray(y, dtype=float)
    betas, signs = _root_orbit_data(tw)
    out = np.full(y.shape[:-1], float(_moved_det(tw)))
    for b, s in zip(betas, signs):
        phase = 2 * np.pi * (y @ b.astype(float))
        out *= np.abs(1 - s * np.exp(1j * phase))
    return out


def twisted_det_factor(tw: Twist, a: TorusPoint) -> float:
    if not tw.is_fixed_point(a.xi, tol=1e-9):
        raise ValueError("torus point is not kappa-fixed")
    return float(twisted_det_factor_y(tw, tw.xi_to_y(a.xi)))


def weyl_alternating_sum_y(tw: Twist, y: np.ndarray, shift_c: Sequence[int]) -> np.ndarray:
    """``sum_{w in W^kappa} sgn(w) exp(2 pi i <w shift, y>)`` for orbit-coordinate ``shift_c``."""
    y = np.asarray(y, dtype=float)
    freqs = (tw.wk_fixed_action @ np.asarray(shift_c, dtype=np.int64)).astype(float)
    return np.exp(2j * np.pi * (y @ freqs.T)) @ tw.wk_signs.astype(complex)


def weyl_alternating_sum(tw: Twist, a: TorusPoint, shift: Sequence | None = None) -> complex:
    """Alternating sum over ``W^kappa`` of ``a^{w shift}``; ``shift`` defaults to ``rho``."""
    if shift is None:
        shift = tw.base.rho
    c = [int(x) for x in tw.weight_to_orbit(shift)]
    return complex(weyl_alternating_sum_y(tw, tw.xi_to_y(a.xi), c))


@lru_cache(maxsize=None)
def torus_covolume(tw: Twist) -> float:
    """Covolume of ``Lambda ∩ t^kappa`` in ``t^kappa``, i.e. ``vol(T^kappa)``."""
    basis = [[len(o) * int(i == j) for j in range(tw.fixed_rank)] for i, o in enumerate(tw.orbits)]
    return lattice_covolume(basis, tw.gram_y)


def class_volume(cd: ClassData) -> VolumeExpr:
    """Riemannian volume of the twisted class through ``cd.point``, as a multiple of ``vol_G``."""
    tw = cd.twist
    det = twisted_det_factor(tw, cd.point)
    if det < DEGENERATE_TOL:
        log.warning("class at %s is degenerate; returning zero volume", cd.point.xi)
        return VolumeExpr.zero(volg_power=1, degenerate=True)
    return VolumeExpr(Fraction(1), (math.sqrt(det), 1.0 / torus_covolume(tw)), 1)
