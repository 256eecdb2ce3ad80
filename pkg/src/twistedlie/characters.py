"""Weyl characters, twining characters and twisted Weyl integration.

A twining character of a kappa-fixed highest weight is evaluated on
``T^kappa`` as the ratio of ``W^kappa``-alternating sums.  Near the walls,
where both sums nearly vanish, the ratio is replaced by the equivalent
weight expansion with Freudenthal multiplicities of the orbit root system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from . import _exact
from .measures import twisted_det_factor_y
from .rootsystem import RootSystem, TorusPoint, build_root_system, is_dominant
from .twist import Twist, named_twist

__all__ = [
    "CharacterContext",
    "TwiningCharacter",
    "weyl_character",
    "twining_character",
    "twining_values",
    "weighted_twining_values",
    "heat_eigenvalue",
    "weight_multiplicities",
    "fixed_dominant_weights",
    "inner_product",
    "gram_matrix",
    "quadrature_size",
    "calibration_constant",
]

DEFAULT_REGULAR_TOLERANCE = 1e-3
# rationally independent offsets keep the grid off every wall
_SHIFTS = tuple(math.sqrt(p) % 1.0 for p in (2, 3, 5, 7, 11, 13, 17, 19))
_CHUNK_POINTS = 1 << 21


@dataclass(frozen=True, eq=False)
class _System:
    """A root system seen through its own fundamental-weight coordinates."""

    actions: np.ndarray  # Weyl group on weight coordinates
    signs: np.ndarray
    cartan: np.ndarray  # rows are the simple roots
    positive: np.ndarray  # positive roots (integer weight coordinates)
    gram: tuple  # exact form on weight coordinates

    @property
    def rank(self) -> int:
        return self.cartan.shape[0]

    @property
    def rho(self) -> np.ndarray:
        return np.ones(self.rank, dtype=np.int64)


@lru_cache(maxsize=None)
def _base_system(rs: RootSystem) -> _System:
    signs = np.where(rs.weyl_lengths % 2 == 0, 1, -1).astype(np.int64)
    return _System(rs.weyl_elements.astype(np.int64), signs, rs.cartan_matrix,
                   rs.positive_roots.astype(np.int64), tuple(map(tuple, rs.omega_gram)))


@lru_cache(maxsize=None)
def _twisted_system(tw: Twist) -> _System:
    osys = tw.orbit_system
    cartan = np.array([[int(x) for x in b] for b in osys.simple_roots], dtype=np.int64)
    pos = np.array([[int(x) for x in b] for b in osys.positive_roots], dtype=np.int64)
    return _System(tw.wk_fixed_action, tw.wk_signs, cartan, pos, tuple(map(tuple, tw.gram_c)))


# -- Freudenthal ---------------------------------------------------------------
def _dominant_conjugate(cartan: np.ndarray, v: np.ndarray) -> np.ndarray:
    v = v.copy()
    while True:
        neg = np.nonzero(v < 0)[0]
        if not len(neg):
            return v
        i = neg[0]
        v = v - v[i] * cartan[i]


@lru_cache(maxsize=None)
def _multiplicities(system: _System, lam: tuple[int, ...]) -> dict[tuple[int, ...], int]:
    gram = [list(r) for r in system.gram]
    den = math.lcm(*(x.denominator for r in gram for x in r))
    g = np.array([[int(x * den) for x in r] for r in gram], dtype=object)

    def ip(u, v):
        return int(np.asarray(u, dtype=object) @ g @ np.asarray(v, dtype=object))

    cartan_inv = _exact.inverse(_exact.to_fraction_matrix(system.cartan))
    lam_v = np.array(lam, dtype=np.int64)

    def depth(mu):
        d = lam_v - mu
        return sum(sum(int(d[i]) * cartan_inv[i][j] for i in range(len(d))) for j in range(len(d)))

    dominant = {lam: None}
    frontier = [lam_v]
    while frontier:
        nxt = []
        for mu in frontier:
            for a in system.positive:
                nu = mu - a
                t = tuple(int(x) for x in nu)
                if np.all(nu >= 0) and t not in dominant:
                    dominant[t] = None
                    nxt.append(nu)
        frontier = nxt
    order = sorted(dominant, key=lambda t: depth(np.array(t)))
    rho = system.rho
    top = ip(lam_v + rho, lam_v + rho)
    mult: dict[tuple[int, ...], int] = {lam: 1}
    for t in order[1:]:
        mu = np.array(t, dtype=np.int64)
        acc = 0
        for a in system.positive:
            k = 1
            while True:
                nu = mu + k * a
                m = mult.get(tuple(int(x) for x in _dominant_conjugate(system.cartan, nu)), 0)
                if not m:
                    break
                acc += m * ip(nu, a)
                k += 1
        val = Fraction(2 * acc, top - ip(mu + rho, mu + rho))
        if val.denominator != 1:
            raise ArithmeticError(f"non-integral multiplicity {val} at {t}")
        if val:
            mult[t] = int(val)
    return mult


def weight_multiplicities(rs: RootSystem, lam: Sequence[int]) -> dict[tuple[int, ...], int]:
    """Freudenthal multiplicities of the dominant weights of ``V_lam``."""
    if not is_dominant(lam):
        raise ValueError(f"weight {tuple(lam)} is not dominant")
    return dict(_multiplicities(_base_system(rs), tuple(int(x) for x in lam)))


@lru_cache(maxsize=None)
def _all_weights(system: _System, lam: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    ws, ms = [], []
    for mu, m in _multiplicities(system, lam).items():
        orbit = np.unique(system.actions @ np.array(mu, dtype=np.int64), axis=0)
        ws.append(orbit)
        ms.append(np.full(len(orbit), m, dtype=np.int64))
    return np.concatenate(ws), np.concatenate(ms)


# -- evaluation ---------------------------------------------------------------
def _alternant(system: _System, v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    freqs = (system.actions @ v).astype(float)
    return np.exp(2j * np.pi * (pts @ freqs.T)) @ system.signs.astype(complex)


def _character(system: _System, lam: tuple[int, ...], pts: np.ndarray, tol: float) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if not any(lam):
        return np.ones(len(pts), dtype=complex)
    s = pts @ system.positive.T.astype(float)
    dist = np.min(np.abs(s - np.rint(s)), axis=1)
    near = dist < tol
    out = np.empty(len(pts), dtype=complex)
    reg = ~near
    if reg.any():
        lr = np.array(lam, dtype=np.int64) + system.rho
        out[reg] = _alternant(system, lr, pts[reg]) / _alternant(system, system.rho, pts[reg])
    if near.any():
        ws, ms = _all_weights(system, lam)
        out[near] = np.exp(2j * np.pi * (pts[near] @ ws.T.astype(float))) @ ms.astype(complex)
    return out


def weyl_character(rs: RootSystem, lam: Sequence[int], t: TorusPoint,
                   regular_tolerance: float = DEFAULT_REGULAR_TOLERANCE) -> complex:
    """Weyl character ``chi_lam(t)``."""
    if not is_dominant(lam):
        raise ValueError(f"weight {tuple(lam)} is not dominant")
    return complex(_character(_base_system(rs), tuple(int(x) for x in lam), t.xi, regular_tolerance)[0])


@dataclass(frozen=True, eq=False)
class CharacterContext:
    twist: Twist
    regular_tolerance: float = DEFAULT_REGULAR_TOLERANCE

    def __post_init__(self):
        if not self.regular_tolerance > 0:
            raise ValueError("regular_tolerance must be positive")

    @classmethod
    def named(cls, series: str, rank: int, twist: str = "identity", **kw) -> "CharacterContext":
        return cls(named_twist(build_root_system(series, rank), twist), **kw)

    @property
    def system(self) -> _System:
        return _twisted_system(self.twist)


def _fixed_orbit_weight(tw: Twist, lam: Sequence[int]) -> tuple[int, ...]:
    if not is_dominant(lam):
        raise ValueError(f"weight {tuple(lam)} is not dominant")
    if not tw.is_fixed_weight(list(lam)):
        raise ValueError(f"weight {tuple(lam)} not kappa-fixed")
    return tuple(int(x) for x in tw.weight_to_orbit(lam))


def twining_values(ctx: CharacterContext, lam: Sequence[int], y: np.ndarray) -> np.ndarray:
    """Twining character at points of ``T^kappa`` given in y coordinates, shape ``(N, k)``."""
    c = _fixed_orbit_weight(ctx.twist, lam)
    return _character(ctx.system, c, y, ctx.regular_tolerance)


def weighted_twining_values(ctx: CharacterContext, lam: Sequence[int], y: np.ndarray) -> np.ndarray:
    """``A_rho * conj(A_{lam+rho})`` at y points, i.e. ``|Sigma|^2 conj(chi~_lam)`` without division.

    Times ``|T^kappa ∩ T_kappa|`` this is ``Delta conj(chi~_lam)``, smooth up to the walls.
    """
    c = _fixed_orbit_weight(ctx.twist, lam)
    system = ctx.system
    y = np.atleast_2d(np.asarray(y, dtype=float))
    a_rho = _alternant(system, system.rho, y)
    a_lam = _alternant(system, np.array(c, dtype=np.int64) + system.rho, y)
    return a_rho * np.conj(a_lam)


def twining_character(ctx: CharacterContext, lam: Sequence[int], t: TorusPoint) -> complex:
    """Twining character ``tr(kappa~ rho_lam(t))`` for ``t`` in ``T^kappa``."""
    tw = ctx.twist
    if not tw.is_fixed_point(t.xi, tol=1e-9):
        raise ValueError("torus point is not in T^kappa")
    return complex(twining_values(ctx, lam, tw.xi_to_y(t.xi)[None])[0])


@dataclass(frozen=True, eq=False)
class TwiningCharacter:
    """The class function ``chi~_lam`` on ``T^kappa``, callable on y arrays."""

    ctx: CharacterContext
    lam: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(int(x) for x in self.lam))
        _fixed_orbit_weight(self.ctx.twist, self.lam)

    @property
    def orbit_weight(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.ctx.twist.weight_to_orbit(self.lam))

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return twining_values(self.ctx, self.lam, y)


def heat_eigenvalue(rs: RootSystem, lam: Sequence[int]) -> Fraction:
    """``|lam + rho|^2 - |rho|^2``, exactly."""
    if not is_dominant(lam):
        raise ValueError(f"weight {tuple(lam)} is not dominant")
    lr = [_exact.frac(x) + 1 for x in lam]
    return rs.inner(lr, lr) - rs.inner(rs.rho, rs.rho)


def fixed_dominant_weights(tw: Twist, max_level: int) -> list[tuple[int, ...]]:
    """kappa-fixed dominant weights with ``<lam, theta^vee> <= max_level``, by level."""
    comarks = tw.base.comarks
    orbit_level = [int(sum(comarks[i] for i in o)) for o in tw.orbits]
    out = []

    def rec(o, acc, lvl):
        if o == len(tw.orbits):
            out.append(tuple(int(x) for x in tw.orbit_to_weight(acc)))
            return
        c = 0
        while lvl + c * orbit_level[o] <= max_level:
            rec(o + 1, acc + [c], lvl + c * orbit_level[o])
            c += 1

    rec(0, [], 0)
    return sorted(out, key=lambda lam: (tw.base.level(lam), lam))


# -- twisted Weyl integration ------------------------------------------------------
def _band(system: _System, v: Sequence[int]) -> np.ndarray:
    return np.max(np.abs(system.actions @ np.asarray(v, dtype=np.int64)), axis=0)


def _grid_shape(grid_n: int, band: np.ndarray) -> tuple[int, ...]:
    # the shifted trapezoid rule is exact for frequencies |m_O| < n_O
    return tuple(int(min(grid_n, b + 1)) for b in band)


def _shifts(k: int) -> np.ndarray:
    return np.array(_SHIFTS[:k])


def _grid_points(shape: Sequence[int], rows: slice | None = None) -> np.ndarray:
    k = len(shape)
    s = _shifts(k)
    axes = [(np.arange(n) + s[o]) / n for o, n in enumerate(shape)]
    if rows is not None:
        axes[0] = axes[0][rows]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _alternant_on_grid(system: _System, v: np.ndarray, shape: tuple[int, ...], rows: slice) -> np.ndarray:
    """Alternating sum at the grid rows ``rows`` (flattened), by inverse FFT over the trailing axes."""
    k = len(shape)
    s = _shifts(k)
    freqs = system.actions @ v
    y0 = (np.arange(shape[0])[rows] + s[0]) / shape[0]
    if k == 1:
        return np.exp(2j * np.pi * np.outer(y0, freqs[:, 0])) @ system.signs.astype(complex)
    rest = shape[1:]
    phase = np.exp(2j * np.pi * (freqs[:, 1:] @ (s[1:] / np.array(rest)))) * system.signs
    coef = np.zeros((len(y0),) + rest, dtype=complex)
    lead = np.exp(2j * np.pi * np.outer(y0, freqs[:, 0])) * phase[None, :]
    idx = tuple((freqs[:, o] % rest[o - 1]) for o in range(1, k))
    for j in range(len(y0)):
        np.add.at(coef[j], idx, lead[j])
    vals = np.fft.ifftn(coef, axes=tuple(range(1, k))) * math.prod(rest)
    return vals.reshape(len(y0), -1)


def _row_chunks(shape: tuple[int, ...]):
    per_row = math.prod(shape[1:])
    step = max(1, _CHUNK_POINTS // per_row)
    for start in range(0, shape[0], step):
        yield slice(start, min(shape[0], start + step))


@lru_cache(maxsize=None)
def calibration_constant(tw: Twist) -> float:
    """``c`` with ``c * mean(Delta) = 1`` over ``t^kappa / M``."""
    system = _twisted_system(tw)
    # Delta is a product over positive root orbits; its frequencies lie in the
    # zonotope spanned by the positive roots, whose vertices are W(2 rho)
    shape = _grid_shape(1 << 30, 2 * _band(system, system.rho))
    total, count = 0.0, 0
    for rows in _row_chunks(shape):
        d = twisted_det_factor_y(tw, _grid_points(shape, rows))
        total += float(d.sum())
        count += len(d)
    return count / total


def quadrature_size(ctx: CharacterContext, weights: Sequence[Sequence[int]], grid_n: int = 256) -> int:
    """Number of grid points :func:`gram_matrix` would use for these weights."""
    system = ctx.system
    cs = [np.array(_fixed_orbit_weight(ctx.twist, lam), dtype=np.int64) for lam in weights]
    band = 2 * np.max([_band(system, c) for c in cs], axis=0) + 2 * _band(system, system.rho)
    return int(np.prod(_grid_shape(grid_n, band), dtype=object))


def gram_matrix(ctx: CharacterContext, weights: Sequence[Sequence[int]], grid_n: int = 256) -> np.ndarray:
    """``G[i, j] = <chi~_i, chi~_j>`` for kappa-fixed dominant weights, by twisted Weyl quadrature.

    The grid is the uniform ``grid_n`` grid, coarsened per axis to the
    smallest grid on which the trapezoid rule is still exact for the
    integrand (same value, less work).
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    tw = ctx.twist
    system = ctx.system
    cs = [np.array(_fixed_orbit_weight(tw, lam), dtype=np.int64) for lam in weights]
    bands = [_band(system, c) for c in cs]
    band = 2 * np.max(bands, axis=0) + 2 * _band(system, system.rho)
    shape = _grid_shape(grid_n, band)
    rho = system.rho
    n = len(cs)
    g = np.zeros((n, n), dtype=complex)
    count = 0
    for rows in _row_chunks(shape):
        pts = _grid_points(shape, rows)
        den = _alternant_on_grid(system, rho, shape, rows).ravel()
        f = np.stack([_alternant_on_grid(system, c + rho, shape, rows).ravel() / den for c in cs])
        delta = twisted_det_factor_y(tw, pts)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(delta))):
            raise FloatingPointError("non-finite integrand values on the quadrature grid")
        g += (f * delta) @ f.conj().T
        count += len(pts)
    return calibration_constant(tw) * g / count


ClassFunction = Union[TwiningCharacter, Callable[[np.ndarray], np.ndarray], complex, float, int]


def inner_product(ctx: CharacterContext, f: ClassFunction, g: ClassFunction, grid_n: int = 256) -> complex:
    """``<f, g>`` for class functions on ``T^kappa``.

    ``f`` and ``g`` are :class:`TwiningCharacter` objects, scalars, or
    callables mapping y-coordinate arrays ``(N, k)`` to values ``(N,)``.
    """
    if grid_n < 8:
        raise ValueError("grid_n must be at least 8")
    tw = ctx.twist
    zero = tuple([0] * tw.base.rank)

    def as_char(h):
        if isinstance(h, TwiningCharacter):
            return complex(1), h.lam
        if isinstance(h, (int, float, complex)):
            return complex(h), zero
        return None

    cf, cg = as_char(f), as_char(g)
    if cf is not None and cg is not None:
        gm = gram_matrix(ctx, [cf[1], cg[1]], grid_n)
        return cf[0] * np.conj(cg[0]) * complex(gm[0, 1])

    def values(h, pts):
        if isinstance(h, (int, float, complex)):
            return np.full(len(pts), complex(h))
        return np.asarray(h(pts), dtype=complex)

    shape = (grid_n,) * tw.fixed_rank
    total, count = 0j, 0
    for rows in _row_chunks(shape):
        pts = _grid_points(shape, rows)
        vf, vg = values(f, pts), values(g, pts)
        delta = twisted_det_factor_y(tw, pts)
        if not (np.all(np.isfinite(vf)) and np.all(np.isfinite(vg))):
            raise FloatingPointError("non-finite integrand values on the quadrature grid")
        total += complex(np.sum(vf * np.conj(vg) * delta))
        count += len(pts)
    return calibration_constant(tw) * total / count
