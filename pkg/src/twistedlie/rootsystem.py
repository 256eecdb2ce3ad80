"""Root systems, weights and Weyl groups of compact simple types A-G.

Coordinates
-----------
Everything exact lives in ``t*`` and is written in the basis of fundamental
weights ("omega coordinates"); the invariant form on that basis is
``RootSystem.omega_gram``.  Points of the Cartan subalgebra ``t`` are written
in the basis of simple coroots ("coroot coordinates"), so the pairing of a
weight ``mu`` with ``xi`` is the plain dot product ``mu @ xi`` and the
character of ``exp(xi)`` is ``exp(2*pi*i * mu @ xi)``.

The form is the basic inner product: the highest root has squared length 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _exact

__all__ = [
    "RootSystem",
    "TorusPoint",
    "build_root_system",
    "weyl_dimension",
    "lattice_covolume",
    "is_dominant",
    "classical_weyl_order",
    "classical_dimension",
]

MAX_RANK = 8
# Enumerating W beyond this is not useful in pure numpy (B_8 already has ~1e7 elements).
MAX_WEYL_ORDER = 3_000_000


def _simple_gram(series: str, n: int) -> list[list[Fraction]]:
    """Gram matrix of the simple roots in Bourbaki order, long roots of length^2 2."""
    g = [[Fraction(0)] * n for _ in range(n)]
    half = Fraction(1, 2)

    def link(i, j, v):
        g[i][j] = g[j][i] = Fraction(v)

    if series in "ADE":
        for i in range(n):
            g[i][i] = Fraction(2)
        if series == "A":
            for i in range(n - 1):
                link(i, i + 1, -1)
        elif series == "D":
            for i in range(n - 2):
                link(i, i + 1, -1)
            link(n - 3, n - 1, -1)
        else:
            link(0, 2, -1)
            link(1, 3, -1)
            for i in range(2, n - 1):
                link(i, i + 1, -1)
    elif series == "B":
        for i in range(n - 1):
            g[i][i] = Fraction(2)
            if i < n - 2:
                link(i, i + 1, -1)
        g[n - 1][n - 1] = Fraction(1)
        link(n - 2, n - 1, -1)
    elif series == "C":
        for i in range(n - 1):
            g[i][i] = Fraction(1)
            if i < n - 2:
                link(i, i + 1, -half)
        g[n - 1][n - 1] = Fraction(2)
        link(n - 2, n - 1, -1)
    elif series == "F":
        g[0][0] = g[1][1] = Fraction(2)
        g[2][2] = g[3][3] = Fraction(1)
        link(0, 1, -1)
        link(1, 2, -1)
        link(2, 3, -half)
    elif series == "G":
        g[0][0] = Fraction(2, 3)
        g[1][1] = Fraction(2)
        link(0, 1, -1)
    return g


def _check_type(series: str, rank: int) -> None:
    ok = {
        "A": rank >= 1,
        "B": rank >= 2,
        "C": rank >= 2,
        "D": rank >= 3,
        "E": rank in (6, 7, 8),
        "F": rank == 4,
        "G": rank == 2,
    }
    if series not in ok:
        raise ValueError(f"unknown series {series!r}; expected one of A-G")
    if not ok[series]:
        raise ValueError(f"{series}{rank} is not a simple type")
    if rank > MAX_RANK:
        raise ValueError(f"rank {rank} exceeds the supported maximum {MAX_RANK}")


def classical_weyl_order(series: str, n: int) -> int:
    f = math.factorial
    return {
        "A": lambda: f(n + 1),
        "B": lambda: 2**n * f(n),
        "C": lambda: 2**n * f(n),
        "D": lambda: 2 ** (n - 1) * f(n),
        "E": lambda: {6: 51840, 7: 2903040, 8: 696729600}[n],
        "F": lambda: 1152,
        "G": lambda: 12,
    }[series]()


def classical_dimension(series: str, n: int) -> int:
    """Dimension of the compact simple group."""
    return {
        "A": lambda: n * (n + 2),
        "B": lambda: n * (2 * n + 1),
        "C": lambda: n * (2 * n + 1),
        "D": lambda: n * (2 * n - 1),
        "E": lambda: {6: 78, 7: 133, 8: 248}[n],
        "F": lambda: 52,
        "G": lambda: 14,
    }[series]()


class RootSystem:
    """Root datum of a compact, simply connected, simple group.

    Instances are immutable in practice; the Weyl group is enumerated lazily
    on first access of :attr:`weyl_elements`.
    """

    def __init__(self, series: str, rank: int):
        _check_type(series, rank)
        self.series = series
        self.rank = rank
        r = rank
        self.simple_gram = _simple_gram(series, r)
        g = self.simple_gram
        # cartan[i][j] = <alpha_i, alpha_j^vee>; row i is alpha_i in omega coordinates
        self.cartan_matrix = np.array(
            [[int(2 * g[i][j] / g[j][j]) for j in range(r)] for i in range(r)], dtype=np.int64)
        d = [g[i][i] for i in range(r)]
        ginv = _exact.inverse(g)
        self.omega_gram = [[d[i] * ginv[i][j] * d[j] / 4 for j in range(r)] for i in range(r)]
        self.coroot_gram = [[4 * g[i][j] / (d[i] * d[j]) for j in range(r)] for i in range(r)]
        self.omega_gram_f = _exact.as_float(self.omega_gram)
        self.coroot_gram_f = _exact.as_float(self.coroot_gram)

        self.roots_simple = self._generate_roots()
        self.roots = self.roots_simple @ self.cartan_matrix
        pos = np.all(self.roots_simple >= 0, axis=1)
        pos_idx = sorted(np.nonzero(pos)[0],
                         key=lambda i: (int(self.roots_simple[i].sum()), tuple(-self.roots_simple[i])))
        self.positive_roots_simple = self.roots_simple[pos_idx]
        self.positive_roots = self.roots[pos_idx]
        self.simple_roots = self.cartan_matrix.copy()
        self.rho = np.ones(r, dtype=np.int64)
        self.fundamental_weights = np.eye(r, dtype=np.int64)
        # coroot alpha^vee = 2 alpha/(alpha, alpha), in coroot coordinates (always integral)
        lengths = np.array([self.inner(a, a) for a in self.positive_roots], dtype=object)
        self.positive_root_lengths = lengths
        cor = []
        for a, l in zip(self.positive_roots, lengths):
            v = [2 * sum(self.omega_gram[i][j] * int(a[j]) for j in range(r)) / l for i in range(r)]
            assert all(x.denominator == 1 for x in v)
            cor.append([int(x) for x in v])
        self.positive_coroots = np.array(cor, dtype=np.int64)
        self.highest_root = self.positive_roots[-1].copy()
        self.comarks = self.positive_coroots[-1].copy()

    def __repr__(self) -> str:
        return f"RootSystem({self.series}{self.rank})"

    @property
    def label(self) -> str:
        return f"{self.series}{self.rank}"

    @property
    def integral_lattice_basis(self) -> np.ndarray:
        """Simple coroots, in coroot coordinates (pair with :attr:`coroot_gram`)."""
        return np.eye(self.rank, dtype=np.int64)

    @property
    def weight_lattice_basis(self) -> np.ndarray:
        """Fundamental weights, in omega coordinates (pair with :attr:`omega_gram`)."""
        return self.fundamental_weights

    @property
    def B_gram(self):
        """Gram matrix of the basic inner product on ``t`` in the simple-coroot basis."""
        return self.coroot_gram

    def _generate_roots(self) -> np.ndarray:
        r = self.rank
        a = self.cartan_matrix
        found = {tuple(int(i == j) for j in range(r)) for i in range(r)}
        frontier = list(found)
        while frontier:
            nxt = []
            for k in frontier:
                kv = np.array(k)
                om = kv @ a
                for i in range(r):
                    new = kv.copy()
                    new[i] -= om[i]
                    t = tuple(int(x) for x in new)
                    if t not in found:
                        found.add(t)
                        nxt.append(t)
            frontier = nxt
        return np.array(sorted(found), dtype=np.int64)

    # -- inner products ----------------------------------------------------
    def inner(self, mu: Sequence, nu: Sequence) -> Fraction:
        """Exact ``B(mu, nu)`` for weights in omega coordinates."""
        return _exact.dot(mu, self.omega_gram, nu)

    def to_coroot_coords(self, mu: Sequence) -> list[Fraction]:
        """The element ``B^#(mu)`` of ``t`` in coroot coordinates."""
        r = self.rank
        return [sum((self.omega_gram[i][j] * _exact.frac(mu[j]) for j in range(r)), Fraction(0))
                for i in range(r)]

    def level(self, mu: Sequence) -> int:
        """``<mu, theta^vee>`` for the highest root ``theta``."""
        return int(np.dot(np.asarray(mu), self.comarks))

    # -- Weyl group -------------------------------------------------------
    @property
    def weyl_order(self) -> int:
        return classical_weyl_order(self.series, self.rank)

    def simple_reflection_matrices(self) -> np.ndarray:
        r = self.rank
        mats = np.zeros((r, r, r), dtype=np.int64)
        for i in range(r):
            s = np.eye(r, dtype=np.int64)
            s[:, i] -= self.cartan_matrix[i]
            mats[i] = s
        return mats

    @cached_property
    def _weyl(self) -> tuple[np.ndarray, np.ndarray]:
        if self.weyl_order > MAX_WEYL_ORDER:
            raise ValueError(
                f"Weyl group of {self.label} has {self.weyl_order} elements; "
                f"enumeration is limited to {MAX_WEYL_ORDER}")
        r = self.rank
        gens = self.simple_reflection_matrices().astype(np.int8)
        # w is determined by w(rho); pack it into one integer key
        radix = 1 << 7
        weights = radix ** np.arange(r, dtype=np.int64)

        def keys(layer):
            return ((layer.sum(axis=2, dtype=np.int64) + radix // 2) * weights).sum(axis=1)

        layer = np.eye(r, dtype=np.int8)[None]
        prev_keys = np.empty(0, dtype=np.int64)
        mats, lens = [layer], [np.zeros(1, dtype=np.int16)]
        length = 0
        while True:
            length += 1
            cand = np.einsum("gij,njk->gnik", gens, layer).reshape(-1, r, r)
            k = keys(cand)
            # s w has length l(w) +- 1, so only the previous layer can collide
            uniq, first = np.unique(k, return_index=True)
            fresh = ~np.isin(uniq, prev_keys)
            if not fresh.any():
                break
            prev_keys = keys(layer)
            layer = cand[np.sort(first[fresh])]
            mats.append(layer)
            lens.append(np.full(len(layer), length, dtype=np.int16))
        w = np.concatenate(mats)
        if len(w) != self.weyl_order:
            raise ArithmeticError(f"enumerated {len(w)} Weyl elements, expected {self.weyl_order}")
        return w, np.concatenate(lens)

    @property
    def weyl_elements(self) -> np.ndarray:
        """All Weyl group elements as integer matrices acting on omega coordinates."""
        return self._weyl[0]

    @property
    def weyl_lengths(self) -> np.ndarray:
        return self._weyl[1]

    def reflect(self, mu: np.ndarray, root: np.ndarray) -> np.ndarray:
        """Reflection of weight ``mu`` in the hyperplane orthogonal to ``root``."""
        num = self.inner(mu, root)
        den = self.inner(root, root)
        c = 2 * num / den
        return np.asarray(mu, dtype=object) - c * np.asarray(root, dtype=object)

    def dominant_conjugate(self, mu: Sequence[int]) -> tuple[np.ndarray, int]:
        """Return ``(w mu, l(w))`` with ``w mu`` dominant (integral weights)."""
        v = np.array(mu, dtype=np.int64)
        steps = 0
        while True:
            neg = np.nonzero(v < 0)[0]
            if not len(neg):
                return v, steps
            i = neg[0]
            v = v - v[i] * self.cartan_matrix[i]
            steps += 1


def build_root_system(series: str, rank: int) -> RootSystem:
    """The root system of type ``series`` + ``rank`` (e.g. ``("E", 6)``).

    Instances are cached, so equal types give the same object.
    """
    return _cached_root_system(str(series).upper(), int(rank))


@lru_cache(maxsize=None)
def _cached_root_system(series: str, rank: int) -> RootSystem:
    return RootSystem(series, rank)


def is_dominant(lam: Sequence) -> bool:
    return all(_exact.frac(x) >= 0 for x in lam)


def weyl_dimension(rs: RootSystem, lam: Sequence[int]) -> int:
    """Weyl dimension formula, evaluated exactly."""
    if not is_dominant(lam):
        raise ValueError(f"weight {tuple(lam)} is not dominant")
    lr = np.asarray(lam, dtype=object) + 1
    num = Fraction(1)
    for c in rs.positive_coroots:
        num *= Fraction(int(np.dot(lr, c)), int(c.sum()))
    if num.denominator != 1:
        raise ArithmeticError(f"non-integral Weyl dimension {num}")
    return int(num)


def lattice_covolume(basis, gram) -> float:
    """Covolume ``sqrt(det(basis . gram . basis^T))`` of the lattice spanned by the rows.

    Exact arithmetic is used whenever the inputs are integers or fractions.
    """
    rows = [list(r) for r in basis]
    exact = all(isinstance(x, (int, np.integer, Fraction)) for r in rows for x in r) and all(
        isinstance(x, (int, np.integer, Fraction)) for r in gram for x in r)
    if exact:
        b = _exact.to_fraction_matrix([[int(x) if isinstance(x, np.integer) else x for x in r]
                                       for r in rows])
        g = _exact.to_fraction_matrix([[int(x) if isinstance(x, np.integer) else x for x in r]
                                       for r in gram])
        d = _exact.det(_exact.matmul(_exact.matmul(b, g), _exact.transpose(b)))
        if d <= 0:
            raise ValueError("basis is degenerate")
        return math.sqrt(d)
    b = np.asarray(rows, dtype=float)
    d = float(np.linalg.det(b @ np.asarray(gram, dtype=float) @ b.T))
    if not d > 1e-300:
        raise ValueError("basis is degenerate")
    return math.sqrt(d)


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """``a = exp(xi)`` with ``xi`` in coroot coordinates."""

    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))

    def character(self, mu: Sequence) -> complex:
        return complex(np.exp(2j * np.pi * np.dot(np.asarray(mu, dtype=float), self.xi)))

    def equivalent(self, other: "TorusPoint", tol: float = 1e-9) -> bool:
        """Equality of torus elements, i.e. modulo the integral lattice."""
        d = self.xi - other.xi
        return bool(np.all(np.abs(d - np.round(d)) < tol))
