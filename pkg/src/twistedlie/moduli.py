"""Duistermaat-Heckman measures of twisted moduli spaces of flat connections.

A surface is described by ``h`` handles, each a fused double with a pair of
twists ``(tau_i, kappa_i)``, and ``b`` boundary classes.  Fourier
coefficients are :class:`VolumeExpr` monomials in ``vol_G``; densities are
heat-regularized partial sums of the twining-character expansion.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .characters import (
    CharacterContext,
    calibration_constant,
    fixed_dominant_weights,
    heat_eigenvalue,
    twining_values,
    weighted_twining_values,
)
from .measures import ClassData, VolumeExpr, class_volume
from .rootsystem import RootSystem, TorusPoint, weyl_dimension
from .twist import Twist, make_twist

__all__ = [
    "SurfaceSpec",
    "VanishingCoefficient",
    "DensityResult",
    "compose_twists",
    "commutator_twist",
    "dh_coefficient",
    "dh_coefficient_table",
    "fused_double_coefficient",
    "double_coefficient",
    "boundary_coefficient",
    "fuse_coefficients",
    "fuse_all",
    "dh_density",
    "dh_density_extrapolated",
    "dh_density_values",
    "default_level_cutoff",
    "alcove_probability_density",
    "reduced_volume",
]

log = logging.getLogger(__name__)

DEFAULT_HEAT_T = 0.02
TAIL_TOLERANCE = 1e-8


def compose_twists(first: Twist, second: Twist) -> Twist:
    """The diagram automorphism ``first o second``."""
    if first.base is not second.base:
        raise ValueError("twists belong to different root systems")
    perm = [first.simple_perm[second.simple_perm[i]] for i in range(first.base.rank)]
    return make_twist(first.base, perm)


def _inverse(tw: Twist) -> Twist:
    perm = [0] * tw.base.rank
    for i, j in enumerate(tw.simple_perm):
        perm[j] = i
    return make_twist(tw.base, perm)


def commutator_twist(tau: Twist, kappa: Twist) -> Twist:
    """``[tau, kappa] = tau kappa tau^-1 kappa^-1``, the target twist of a fused double."""
    return compose_twists(compose_twists(tau, kappa), compose_twists(_inverse(tau), _inverse(kappa)))


@dataclass(frozen=True, eq=False)
class SurfaceSpec:
    """``h`` fused doubles and ``b`` boundary classes, fused in that order."""

    group: RootSystem
    genus: int
    handle_twists: tuple[tuple[Twist, Twist], ...] = ()
    boundaries: tuple[ClassData, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "handle_twists", tuple(tuple(p) for p in self.handle_twists))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")
        if len(self.handle_twists) != self.genus:
            raise ValueError(f"expected {self.genus} handle twist pairs, got {len(self.handle_twists)}")
        if 2 * self.genus + len(self.boundaries) < 1:
            raise ValueError("need 2h + b >= 1")
        for tw in self.all_twists:
            if tw.base is not self.group:
                raise ValueError("all twists must act on the surface's group")

    @classmethod
    def untwisted(cls, group: RootSystem, genus: int, boundaries: Sequence[ClassData] = ()) -> "SurfaceSpec":
        ident = make_twist(group, range(group.rank))
        return cls(group, genus, tuple((ident, ident) for _ in range(genus)), tuple(boundaries))

    @property
    def b(self) -> int:
        return len(self.boundaries)

    @property
    def h(self) -> int:
        return self.genus

    @property
    def all_twists(self) -> list[Twist]:
        out = [t for pair in self.handle_twists for t in pair]
        return out + [c.twist for c in self.boundaries]

    @property
    def handle_targets(self) -> list[Twist]:
        return [commutator_twist(t, k) for t, k in self.handle_twists]

    @property
    def target_twist(self) -> Twist:
        """``tau_1 ... tau_h kappa_1 ... kappa_b`` with ``tau_i`` the handle targets."""
        tw = make_twist(self.group, range(self.group.rank))
        for t in self.handle_targets + [c.twist for c in self.boundaries]:
            tw = compose_twists(tw, t)
        return tw

    def admits(self, lam: Sequence[int]) -> bool:
        """Whether ``lam`` is fixed by every twist in the spec."""
        return all(tw.is_fixed_weight(list(lam)) for tw in self.all_twists)

    @property
    def volg_power(self) -> int:
        return 2 * self.genus + self.b


@dataclass(frozen=True)
class VanishingCoefficient:
    """The Fourier coefficient of a weight not fixed by every twist: identically zero."""

    weight: tuple[int, ...]
    twist: Twist

    @property
    def coeff(self) -> complex:
        return 0j

    def __bool__(self) -> bool:
        return False


def fused_double_coefficient(tau: Twist, kappa: Twist, lam: Sequence[int]) -> VolumeExpr:
    """``<DH, chi~_lam^{[tau, kappa]}>`` of a fused double."""
    return VolumeExpr(Fraction(1, weyl_dimension(tau.base, lam)), (), 2)


def double_coefficient(lam: Sequence[int], mu: Sequence[int]) -> VolumeExpr:
    """Coefficient of ``chi~_lam (x) chi~_mu`` for the double: ``delta_{lam mu} vol_G^2``."""
    return VolumeExpr(Fraction(int(tuple(lam) == tuple(mu))), (), 2)


def boundary_coefficient(cd: ClassData, lam: Sequence[int],
                         regular_tolerance: float | None = None) -> VolumeExpr:
    """``Vol(C) chi~_lam^kappa(C)`` for a twisted class ``C``."""
    ctx = CharacterContext(cd.twist) if regular_tolerance is None else CharacterContext(cd.twist, regular_tolerance)
    chi = complex(twining_values(ctx, lam, cd.y[None])[0])
    return class_volume(cd) * chi


def fuse_coefficients(c1: VolumeExpr, c2: VolumeExpr, dim: int) -> VolumeExpr:
    """Coefficient of a fusion product: ``c1 c2 / dim V_lam``."""
    if dim < 1:
        raise ValueError("dim must be a positive integer")
    return (c1 * c2) / dim


def fuse_all(coeffs: Sequence[VolumeExpr], dim: int) -> VolumeExpr:
    """Iterated fusion of ``r`` pieces: ``dim^{1-r} prod c_i``."""
    out = coeffs[0]
    for c in coeffs[1:]:
        out = fuse_coefficients(out, c, dim)
    return out


def dh_coefficient(spec: SurfaceSpec, lam: Sequence[int]) -> VolumeExpr | VanishingCoefficient:
    """Fourier coefficient of the DH measure against ``chi~_lam`` of the target twist."""
    lam = tuple(int(x) for x in lam)
    for tw in spec.all_twists:
        if not tw.is_fixed_weight(list(lam)):
            return VanishingCoefficient(lam, tw)
    h, b = spec.genus, spec.b
    dim = weyl_dimension(spec.group, lam)
    out = VolumeExpr(Fraction(1, dim ** (2 * h + b - 1)), (), 2 * h)
    for cd in spec.boundaries:
        out = out * boundary_coefficient(cd, lam)
    return out


def dh_coefficient_table(spec: SurfaceSpec, max_level: int) -> dict[tuple[int, ...], VolumeExpr]:
    """All nonvanishing coefficients with ``level <= max_level``."""
    return {lam: dh_coefficient(spec, lam) for lam in _admissible_weights(spec, max_level)}


def _admissible_weights(spec: SurfaceSpec, max_level: int) -> list[tuple[int, ...]]:
    return [lam for lam in fixed_dominant_weights(spec.target_twist, max_level) if spec.admits(lam)]


def default_level_cutoff(spec: SurfaceSpec, heat_t: float, tol: float = TAIL_TOLERANCE) -> int:
    """A level ``L`` with ``exp(-t p(lam)) < tol`` for every dominant weight of level above ``L``.

    Uses the lower bound ``p(lam) >= 2 c L + m L^2 / rank`` for weights of
    level ``L``, where ``c = min (omega_i, rho) / a_i`` and
    ``m = min |omega_i|^2 / a_i^2`` (``a_i`` the comarks); it holds because
    fundamental weights have nonnegative inner products.
    """
    if heat_t <= 0:
        raise ValueError("heat_t must be positive")
    rs = spec.group
    target = math.log(1 / tol) / heat_t
    r = rs.rank
    om = rs.omega_gram
    c = min(float(sum(om[i][j] for j in range(r))) / int(rs.comarks[i]) for i in range(r))
    m = min(float(om[i][i]) / int(rs.comarks[i]) ** 2 for i in range(r))
    # smallest L with 2 c (L+1) + m (L+1)^2 / r > target
    q = m / r
    x = (-2 * c + math.sqrt(4 * c * c + 4 * q * target)) / (2 * q)
    return max(0, int(math.floor(x)))


@dataclass(frozen=True)
class DensityResult:
    """A heat-regularized density value with its error estimates."""

    value: VolumeExpr
    trunc_residual: float
    heat_t: float
    level_cutoff: int
    extrapolation_residual: float | None = None

    @property
    def coeff(self) -> complex:
        return self.value.coeff

    @property
    def volg_power(self) -> int:
        return self.value.volg_power


def _series_terms(spec: SurfaceSpec, weights, y: np.ndarray, heat_t: float,
                  weighted: bool = False) -> np.ndarray:
    """``exp(-t p) c_lam conj(chi~_lam(y))`` for each weight (rows) and point (columns).

    With ``weighted`` the characters are multiplied by ``Delta(y)``.
    """
    ctx = CharacterContext(spec.target_twist)
    if weighted:
        scale = spec.target_twist.intersection_order
    out = np.zeros((len(weights), len(y)), dtype=complex)
    for n, lam in enumerate(weights):
        c = dh_coefficient(spec, lam)
        damp = math.exp(-heat_t * float(heat_eigenvalue(spec.group, lam)))
        if damp == 0.0:
            continue
        if weighted:
            out[n] = damp * c.coeff * scale * weighted_twining_values(ctx, lam, y)
        else:
            out[n] = damp * c.coeff * np.conj(twining_values(ctx, lam, y))
    return out


def _as_y(spec: SurfaceSpec, a) -> np.ndarray:
    tw = spec.target_twist
    if isinstance(a, TorusPoint):
        if not tw.is_fixed_point(a.xi, tol=1e-9):
            raise ValueError("point is not in T^kappa for the target twist")
        return tw.xi_to_y(a.xi)[None]
    y = np.asarray(a, dtype=float)
    return y[None] if y.ndim == 1 else y


def _density_values(spec: SurfaceSpec, y: np.ndarray, heat_t: float, level_cutoff: int | None,
                    weighted: bool = False):
    if heat_t <= 0:
        raise ValueError("heat_t must be positive")
    if level_cutoff is None:
        level_cutoff = default_level_cutoff(spec, heat_t)
    weights = _admissible_weights(spec, level_cutoff)
    vals = _series_terms(spec, weights, y, heat_t, weighted).sum(axis=0)
    # tail: absolute sum of the next few levels
    extra = max(2, level_cutoff // 4)
    tail_w = [lam for lam in _admissible_weights(spec, level_cutoff + extra)
              if spec.group.level(lam) > level_cutoff]
    tail = (np.abs(_series_terms(spec, tail_w, y, heat_t, weighted)).sum(axis=0)
            if tail_w else np.zeros(len(y)))
    return vals, tail, level_cutoff


def dh_density(spec: SurfaceSpec, a, heat_t: float = DEFAULT_HEAT_T,
               level_cutoff: int | None = None) -> DensityResult:
    """``dDH / dvol_G`` at ``a`` (a TorusPoint of ``T^kappa`` or y coordinates), heat-regularized."""
    y = _as_y(spec, a)
    vals, tail, cutoff = _density_values(spec, y, heat_t, level_cutoff)
    return DensityResult(VolumeExpr(Fraction(1), (complex(vals[0]),), spec.volg_power - 1),
                         float(tail[0]), heat_t, cutoff)


def dh_density_values(spec: SurfaceSpec, y: np.ndarray, heat_t: float = DEFAULT_HEAT_T,
                      level_cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Vectorized :func:`dh_density` coefficients at y points ``(N, k)``.

    Returns ``(values, truncation_residuals, level_cutoff)``; the ``vol_G``
    power of every value is ``spec.volg_power - 1``.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    return _density_values(spec, y, heat_t, level_cutoff)


def dh_density_extrapolated(spec: SurfaceSpec, a, heat_t: float = DEFAULT_HEAT_T,
                            level_cutoff: int | None = None) -> DensityResult:
    """Richardson extrapolation ``t -> 0+`` from the schedule ``t, t/2, t/4``."""
    ts = (heat_t, heat_t / 2, heat_t / 4)
    if level_cutoff is None:
        level_cutoff = default_level_cutoff(spec, ts[-1])
    res = [dh_density(spec, a, t, level_cutoff) for t in ts]
    f = [r.coeff for r in res]
    r1 = 2 * f[1] - f[0]
    r1b = 2 * f[2] - f[1]
    r2 = (4 * r1b - r1) / 3
    return DensityResult(VolumeExpr(Fraction(1), (complex(r2),), spec.volg_power - 1),
                         max(r.trunc_residual for r in res), heat_t, level_cutoff,
                         extrapolation_residual=float(abs(r2 - r1b)))


def alcove_probability_density(spec: SurfaceSpec, y: np.ndarray, heat_t: float = DEFAULT_HEAT_T,
                               level_cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Density on the twisted alcove (Lebesgue measure in y) of the normalized DH measure.

    Returns ``(density, truncation_residual)`` at the points ``y`` of shape ``(N, k)``.
    The class-function density is divided by the total mass (the coefficient
    of the trivial weight) and multiplied by the calibrated twisted Weyl
    density ``c |W^kappa| Delta``.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    vals, tail, _ = _density_values(spec, y, heat_t, level_cutoff, weighted=True)
    total = dh_coefficient(spec, [0] * spec.group.rank).coeff
    tw = spec.target_twist
    w = calibration_constant(tw) * tw.wk_order
    return (vals / total).real * w, np.abs(tail / total) * w


def reduced_volume(spec: SurfaceSpec, a, gamma_order: int, heat_t: float = DEFAULT_HEAT_T,
                   level_cutoff: int | None = None) -> DensityResult:
    """``Vol(M_a) = |Gamma| (Vol(C_a) / vol_G) dDH/dvol_G (a)``.

    Assumes the level set over ``a`` meets the principal stratum, which is
    not checked.  ``gamma_order`` is the order of the principal stabilizer.
    """
    if gamma_order < 1:
        raise ValueError("gamma_order must be a positive integer")
    y = _as_y(spec, a)[0]
    tw = spec.target_twist
    cd = ClassData(tw, TorusPoint(tw.y_to_xi(y)))
    vol = class_volume(cd)
    if vol.degenerate:
        raise ValueError("the class through a is degenerate (stabilizer larger than T^kappa)")
    dens = dh_density(spec, y, heat_t, level_cutoff)
    value = VolumeExpr(Fraction(gamma_order), vol.factors + (dens.coeff,), vol.volg_power + dens.volg_power - 1)
    scale = abs(gamma_order * vol.coeff)
    return DensityResult(value, dens.trunc_residual * scale, heat_t, dens.level_cutoff)
