"""Brute-force references for the closed-form machinery.

Everything here works with explicit matrices: literal traces over tensor
representations of sl3, Haar sampling of SU(n) and SO(n), projection of
group elements onto twisted alcoves, determinants of ``Ad_a kappa - 1`` on
matrix Lie algebras, Monte Carlo pushforwards of moduli spaces, and the
single-qutrit Clifford group as an exact unitary 2-design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .characters import CharacterContext, twining_values
from .moduli import SurfaceSpec, _inverse, alcove_probability_density, compose_twists
from .rootsystem import TorusPoint
from .twist import Twist, named_twist

__all__ = [
    "SL3_ORACLE_WEIGHTS",
    "sl3_twining_oracle",
    "MatrixGroupModel",
    "matrix_model",
    "haar_sample",
    "class_projection",
    "twining_at",
    "matrix_twisted_det_factor",
    "MCHistogram",
    "mc_density",
    "series_bin_density",
    "mc_compare",
    "MCComparison",
    "kde_density",
    "qutrit_clifford_group",
    "frame_potential",
]

SL3_ORACLE_WEIGHTS = ((0, 0), (1, 1), (2, 2), (3, 3))
STREAM_SIZE = 1 << 16


def _antidiagonal_signs(n: int) -> np.ndarray:
    j = np.zeros((n, n))
    for r in range(n):
        j[r, n - 1 - r] = (-1) ** r
    return j


# -- sl3 by explicit tensors -------------------------------------------------
def _apply_on_axis(v: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(m, v, axes=([1], [axis])), 0, axis)


@lru_cache(maxsize=None)
def _sl3_module(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (columns) of V_{k rho} in ``(C^3)^k (x) (C^3*)^k`` and kappa~ on it."""
    shape = (3,) * (2 * k)
    v0 = np.zeros(shape, dtype=complex)
    v0[(0,) * k + (2,) * k] = 1.0
    lowering = []
    for i in range(2):
        m = np.zeros((3, 3))
        m[i + 1, i] = 1.0
        lowering.append(m)

    def lower(v, i):
        out = np.zeros_like(v)
        for ax in range(k):
            out += _apply_on_axis(v, lowering[i], ax)
        for ax in range(k, 2 * k):
            out += _apply_on_axis(v, -lowering[i].T, ax)
        return out

    basis: list[np.ndarray] = []

    def add(v):
        w = v.ravel().copy()
        for b in basis:
            w -= (b.conj() @ w) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-9:
            basis.append(w / nrm)
            return True
        return False

    queue = [v0]
    add(v0)
    while queue:
        v = queue.pop()
        for i in range(2):
            u = lower(v, i)
            if np.linalg.norm(u) > 1e-12 and add(u):
                queue.append(u)
    q = np.array(basis).T

    j = _antidiagonal_signs(3)
    jit = np.linalg.inv(j).T

    def kappa_tilde(v):
        v = v.reshape(shape)
        for ax in range(k):
            v = _apply_on_axis(v, jit, ax)
        for ax in range(k, 2 * k):
            v = _apply_on_axis(v, j, ax)
        # x_1..x_k, y_1..y_k  ->  J y_1..J y_k, J^-T x_1..J^-T x_k
        order = list(range(k, 2 * k)) + list(range(k))
        return np.transpose(v, order).ravel()

    kv0 = kappa_tilde(v0)
    c = kv0[np.ravel_multi_index((0,) * k + (2,) * k, shape)]
    kt = np.array([kappa_tilde(q[:, n]) for n in range(q.shape[1])]).T / c
    return q, kt


def _sl3_weight_diagonal(k: int, theta: np.ndarray) -> np.ndarray:
    ph = np.exp(2j * np.pi * np.asarray(theta, dtype=float))
    out = np.ones((1,), dtype=complex)
    for _ in range(k):
        out = np.multiply.outer(out, ph).ravel()
    for _ in range(k):
        out = np.multiply.outer(out, ph.conj()).ravel()
    return out


def sl3_twining_oracle(lam: Sequence[int], t: TorusPoint) -> complex:
    """``tr(kappa~ rho_lam(t))`` for the A_2 flip, from the literal tensor model.

    ``t`` is given by simple-coroot coordinates; it need not be kappa-fixed.
    """
    lam = tuple(int(x) for x in lam)
    if lam not in SL3_ORACLE_WEIGHTS:
        raise ValueError(f"sl3 oracle supports {SL3_ORACLE_WEIGHTS}, got {lam}")
    k = lam[0]
    if k == 0:
        return 1.0 + 0j
    xi = np.asarray(t.xi, dtype=float)
    theta = np.array([xi[0], xi[1] - xi[0], -xi[1]])
    q, kt = _sl3_module(k)
    d = _sl3_weight_diagonal(k, theta)
    # rho(t) is diagonal on the tensor basis; trace of kappa~ rho(t) restricted to V_lam
    return complex(np.einsum("ab,a,ab->", q.conj(), d, kt))


def sl3_oracle_matrix_trace(lam: Sequence[int], g: np.ndarray) -> complex:
    """``tr(kappa~ rho_lam(g))`` for an arbitrary ``g`` in SU(3)."""
    lam = tuple(int(x) for x in lam)
    if lam not in SL3_ORACLE_WEIGHTS:
        raise ValueError(f"sl3 oracle supports {SL3_ORACLE_WEIGHTS}, got {lam}")
    k = lam[0]
    if k == 0:
        return 1.0 + 0j
    q, kt = _sl3_module(k)
    shape = (3,) * (2 * k)
    ginv_t = np.linalg.inv(g).T
    out = 0j
    for n in range(q.shape[1]):
        v = q[:, n].reshape(shape)
        for ax in range(k):
            v = _apply_on_axis(v, g, ax)
        for ax in range(k, 2 * k):
            v = _apply_on_axis(v, ginv_t, ax)
        # rho(g) q_n lies in V_lam; kt holds kappa~ of the basis columns
        out += np.vdot(q[:, n], kt @ (q.conj().T @ v.ravel()))
    return complex(out)


# -- matrix models -------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class MatrixGroupModel:
    """SU(n) (type A_{n-1}) or SO(2n) (type D_n, split form) with an explicit twist.

    For A the flip is ``g -> J conj(g) J^-1`` with ``J`` antidiagonal with
    alternating signs; for D it is conjugation by the permutation swapping
    the two middle coordinates.  Both fix the diagonal torus and the upper
    triangular Borel.
    """

    series: str
    rank: int
    twist_name: str = "identity"
    seed: int = 0

    def __post_init__(self):
        if self.series not in ("A", "D"):
            raise ValueError(f"no matrix model for type {self.series}")
        if self.twist_name not in ("identity", "flip"):
            raise ValueError(f"no matrix model for the {self.twist_name} twist")
        if self.series == "D" and self.rank < 3:
            raise ValueError("D_n needs n >= 3")

    @property
    def n(self) -> int:
        return self.rank + 1 if self.series == "A" else 2 * self.rank

    @cached_property
    def J(self) -> np.ndarray:
        if self.series == "A":
            return _antidiagonal_signs(self.n)
        p = np.eye(self.n)
        m = self.rank
        p[[m - 1, m]] = p[[m, m - 1]]
        return p

    @cached_property
    def form(self) -> np.ndarray | None:
        """The symmetric form preserved by the D model (antidiagonal ones)."""
        if self.series == "A":
            return None
        return np.fliplr(np.eye(self.n))

    @property
    def is_trivial(self) -> bool:
        return self.twist_name == "identity"

    def kappa(self, g: np.ndarray) -> np.ndarray:
        """The twist applied to (a stack of) group elements."""
        if self.is_trivial:
            return g
        j = self.J
        if self.series == "A":
            return j @ np.conj(g) @ j.T
        return j @ g @ j.T

    def kappa_lie(self, x: np.ndarray) -> np.ndarray:
        """Complex-linear extension of the twist to the Lie algebra."""
        if self.is_trivial:
            return x
        j = self.J
        if self.series == "A":
            return -j @ np.swapaxes(x, -1, -2) @ j.T
        return j @ x @ j.T

    def torus_phases(self, xi: Sequence[float]) -> np.ndarray:
        """Diagonal eigenphases (in turns) of ``exp(2 pi i sum xi_i alpha_i^vee)``."""
        xi = np.asarray(xi, dtype=float)
        if self.series == "A":
            return np.concatenate([xi, [0.0]]) - np.concatenate([[0.0], xi])
        m = self.rank
        th = np.zeros(m)
        for i in range(m - 1):
            th[i] += xi[i]
            th[i + 1] -= xi[i]
        th[m - 2] += xi[m - 1]
        th[m - 1] += xi[m - 1]
        return np.concatenate([th, -th[::-1]])

    def torus_element(self, xi: Sequence[float]) -> np.ndarray:
        return np.diag(np.exp(2j * np.pi * self.torus_phases(xi)))

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, stream])))


def matrix_model(tw: Twist, seed: int = 0) -> MatrixGroupModel:
    """The matrix model realizing ``tw``; raises ``ValueError`` when there is none."""
    rs = tw.base
    if rs.series not in "AD":
        raise ValueError(f"no matrix model for {rs.label}")
    if tw.is_trivial:
        return MatrixGroupModel(rs.series, rs.rank, "identity", seed)
    if tw.order != 2:
        raise ValueError("no matrix model for a twist of order 3")
    if tuple(tw.simple_perm) != tuple(named_twist(rs, "flip").simple_perm):
        raise ValueError("unsupported twist")
    return MatrixGroupModel(rs.series, rs.rank, "flip", seed)


def haar_sample(model: MatrixGroupModel, size: int | None = None, stream: int = 0,
                rng: np.random.Generator | None = None) -> np.ndarray:
    """Haar-random elements of SU(n) (type A) or SO(n) (type D, standard form)."""
    rng = model.rng(stream) if rng is None else rng
    n = model.n
    shape = (1 if size is None else size, n, n)
    if model.series == "A":
        z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    else:
        z = rng.standard_normal(shape)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[:, None, :]
    det = np.linalg.det(q)
    if model.series == "A":
        q = q * (det ** (-1.0 / n))[:, None, None]
    else:
        q[det < 0, :, 0] *= -1
    return q[0] if size is None else q


# -- class projection ----------------------------------------------------------
def _check_unitary(g: np.ndarray) -> None:
    n = g.shape[-1]
    err = np.abs(np.conj(np.swapaxes(g, -1, -2)) @ g - np.eye(n)).max()
    if err > 1e-8:
        raise ValueError(f"input is not unitary (deviation {err:.2e})")


def _eigenphases(g: np.ndarray) -> np.ndarray:
    return np.angle(np.linalg.eigvals(g)) / (2 * np.pi)


def class_projection(model: MatrixGroupModel, g: np.ndarray, tw: Twist) -> np.ndarray:
    """Alcove point (y coordinates) of the twisted class of ``g``; ``g`` may be a stack.

    Supported: the identity twist on SU(n), and the flip on SU(2m+1), where
    ``g kappa(g)`` is conjugate to ``t^2`` for the torus point ``t`` sought.
    """
    if model.series != "A":
        raise ValueError("class projection needs a simply connected matrix group (type A)")
    g = np.asarray(g, dtype=complex)
    single = g.ndim == 2
    g = g[None] if single else g
    _check_unitary(g)
    n = model.n
    if tw.is_trivial:
        if not model.is_trivial:
            model = MatrixGroupModel("A", model.rank, "identity", model.seed)
        th = np.sort(_eigenphases(g), axis=-1)[:, ::-1]
        # bring the total to zero with an integer correction on the last phase
        th[:, -1] -= np.round(th.sum(axis=-1))
        xi = np.cumsum(th, axis=-1)[:, :-1]
        ys = xi
    else:
        if n % 2 == 0:
            raise ValueError("flip projection is implemented for SU(2m+1) only")
        if model.is_trivial:
            model = MatrixGroupModel("A", model.rank, "flip", model.seed)
        m = n // 2
        # phases come in pairs +-psi plus one zero; W^kappa acts on the pairs by
        # signed permutations, so sorting |psi| pairs them without wrap-around trouble
        a = np.sort(np.abs(_eigenphases(g @ model.kappa(g))), axis=-1)[:, ::-1]
        half = 0.25 * (a[:, 0:2 * m:2] + a[:, 1:2 * m:2])
        th = np.concatenate([half, np.zeros((len(g), 1)), -half[:, ::-1]], axis=1)
        xi = np.cumsum(th, axis=-1)[:, :-1]
        ys = xi @ tw.F
    out = np.array([tw.reduce_to_alcove(y) for y in ys])
    return out[0] if single else out


def twining_at(ctx: CharacterContext, lam: Sequence[int], g: np.ndarray,
               model: MatrixGroupModel | None = None) -> np.ndarray:
    """Twining character evaluated at group elements, through the class projection."""
    tw = ctx.twist
    model = matrix_model(tw) if model is None else model
    y = np.atleast_2d(class_projection(model, g, tw))
    vals = twining_values(ctx, lam, y)
    return vals[0] if np.asarray(g).ndim == 2 else vals


# -- determinant on the matrix Lie algebra ------------------------------------
@lru_cache(maxsize=None)
def _lie_basis(model_key: tuple) -> np.ndarray:
    series, rank = model_key
    model = MatrixGroupModel(series, rank)
    n = model.n
    if series == "A":
        cons = np.zeros((1, n * n))
        cons[0, :: n + 1] = 1.0  # trace
    else:
        s = model.form
        rows = []
        for a in range(n):
            for b in range(n):
                e = np.zeros((n, n))
                e[a, b] = 1.0
                rows.append((e.T @ s + s @ e).ravel())
        cons = np.array(rows).T
    _, sv, vh = np.linalg.svd(cons)
    rank_c = int(np.sum(sv > 1e-10))
    return vh[rank_c:].T  # orthonormal columns spanning the algebra


def matrix_twisted_det_factor(model: MatrixGroupModel, xi: Sequence[float]) -> float:
    """``|det(Ad_t kappa - 1)|`` on the complement of the fixed torus, computed on matrices.

    ``xi`` gives ``t`` in simple-coroot coordinates and should be kappa-fixed.
    """
    basis = _lie_basis((model.series, model.rank))
    n = model.n
    t = model.torus_element(xi)

    def coords(maps):
        return basis.conj().T @ np.array([m.ravel() for m in maps]).T

    lmat = coords([t @ model.kappa_lie(c.reshape(n, n)) @ np.conj(t) for c in basis.T])
    # the Cartan subalgebra inside the basis, then its kappa-fixed part
    u, sv, _ = np.linalg.svd(coords([np.diag(e) for e in np.eye(n)]))
    cart = u[:, : int(np.sum(sv > 1e-10))]
    kmat = cart.conj().T @ coords([model.kappa_lie(c.reshape(n, n)) for c in (basis @ cart).T])
    w, v = np.linalg.eig(kmat)
    qf, _ = np.linalg.qr(cart @ v[:, np.abs(w - 1) < 1e-9])
    u, sv, _ = np.linalg.svd(np.eye(basis.shape[1]) - qf @ qf.conj().T)
    comp = u[:, : int(np.sum(sv > 0.5))]
    m = comp.conj().T @ lmat @ comp
    return float(abs(np.linalg.det(m - np.eye(m.shape[0]))))


# -- Monte Carlo pushforwards ------------------------------------------------------
def _subdivide(alcove: np.ndarray, n: int) -> np.ndarray:
    k = alcove.shape[1]
    if k == 1:
        lo, hi = alcove[:, 0].min(), alcove[:, 0].max()
        e = np.linspace(lo, hi, n + 1)
        return np.stack([e[:-1], e[1:]], axis=1)[:, :, None]
    if k == 2:
        v0, v1, v2 = alcove

        def p(i, j):
            return v0 + (i / n) * (v1 - v0) + (j / n) * (v2 - v0)

        tris = []
        for i in range(n):
            for j in range(n - i):
                tris.append([p(i, j), p(i + 1, j), p(i, j + 1)])
                if i + j <= n - 2:
                    tris.append([p(i + 1, j), p(i, j + 1), p(i + 1, j + 1)])
        return np.array(tris)
    raise ValueError("histograms are implemented for alcoves of dimension 1 and 2")


def _bin_index(alcove: np.ndarray, n: int, y: np.ndarray) -> np.ndarray:
    k = alcove.shape[1]
    if k == 1:
        lo, hi = alcove[:, 0].min(), alcove[:, 0].max()
        return np.clip(np.floor((y[:, 0] - lo) / (hi - lo) * n).astype(np.int64), 0, n - 1)
    v0, v1, v2 = alcove
    u = np.linalg.solve(np.stack([v1 - v0, v2 - v0], axis=1), (y - v0).T).T * n
    u = np.clip(u, 0, n)
    i = np.clip(np.floor(u[:, 0]).astype(np.int64), 0, n - 1)
    j = np.clip(np.floor(u[:, 1]).astype(np.int64), 0, n - 1)
    over = i + j > n - 1
    j = np.where(over, n - 1 - i, j)
    down = ((u[:, 0] - i) + (u[:, 1] - j) > 1) & (i + j <= n - 2)
    # bins are listed row by row in i; row i holds 2 (n - i) - 1 triangles
    row_start = np.concatenate([[0], np.cumsum([2 * (n - r) - 1 for r in range(n)])])
    return row_start[i] + 2 * j + down


def _simplex_volume(s: np.ndarray) -> float:
    k = s.shape[1]
    return abs(np.linalg.det(s[1:] - s[0])) / math.factorial(k)


@dataclass(frozen=True, eq=False)
class MCHistogram:
    """Histogram of Monte Carlo alcove points over a simplicial subdivision of the alcove."""

    twist: Twist
    subdivisions: int
    bins: np.ndarray
    counts: np.ndarray
    n_samples: int
    points: np.ndarray

    @cached_property
    def volumes(self) -> np.ndarray:
        return np.array([_simplex_volume(s) for s in self.bins])

    @property
    def centers(self) -> np.ndarray:
        return self.bins.mean(axis=1)

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.n_samples

    @property
    def density(self) -> np.ndarray:
        return self.probabilities / self.volumes

    @property
    def stderr(self) -> np.ndarray:
        p = self.probabilities
        return np.sqrt(p * (1 - p) / self.n_samples) / self.volumes

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())


def _pieces(spec: SurfaceSpec) -> list[tuple[str, object, Twist]]:
    out: list[tuple[str, object, Twist]] = []
    for (tau, kappa), target in zip(spec.handle_twists, spec.handle_targets):
        out.append(("handle", (tau, kappa), target))
    for cd in spec.boundaries:
        out.append(("class", cd, cd.twist))
    return out


def _apply_twist(tw: Twist, g: np.ndarray, seed: int) -> np.ndarray:
    return matrix_model(tw, seed).kappa(g)


def _sample_moment_map(spec: SurfaceSpec, n: int, rng: np.random.Generator, seed: int) -> np.ndarray:
    rs = spec.group
    base = MatrixGroupModel(rs.series, rs.rank, "identity", seed)
    acc, acc_tw = None, None

    for kind, data, target in _pieces(spec):
        if kind == "handle":
            tau, kappa = data
            x = haar_sample(base, n, rng=rng)
            y = haar_sample(base, n, rng=rng)
            # x tau(y) (tau kappa tau^-1)(x^-1) tau(y^-1)
            conj = compose_twists(compose_twists(tau, kappa), _inverse(tau))
            ty = _apply_twist(tau, y, seed)
            xinv = np.conj(np.swapaxes(x, -1, -2))
            tyinv = np.conj(np.swapaxes(ty, -1, -2))
            phi = x @ ty @ _apply_twist(conj, xinv, seed) @ tyinv
        else:
            cd = data
            xi = cd.twist.y_to_xi(cd.y)
            t = base.torus_element(xi)
            x = haar_sample(base, n, rng=rng)
            kx = _apply_twist(cd.twist, x, seed)
            phi = x @ t @ np.conj(np.swapaxes(kx, -1, -2))
        if acc is None:
            acc, acc_tw = phi, target
        else:
            acc = acc @ _apply_twist(acc_tw, phi, seed)
            acc_tw = compose_twists(acc_tw, target)
    return acc


def mc_density(spec: SurfaceSpec, n_samples: int, subdivisions: int = 20, seed: int = 0,
               stream_size: int = STREAM_SIZE) -> MCHistogram:
    """Pushforward of Haar measure under the moment map, binned on the target alcove.

    Samples are drawn in streams of ``stream_size``; stream ``s`` uses a
    Philox generator keyed by ``(seed, s)``, so results do not depend on how
    the work is split.
    """
    rs = spec.group
    if rs.series != "A":
        raise ValueError(f"no matrix model for {rs.label} Monte Carlo")
    for tw in spec.all_twists + [spec.target_twist]:
        matrix_model(tw, seed)
    tw = spec.target_twist
    model = matrix_model(tw, seed)
    alc = tw.alcove
    bins = _subdivide(alc, subdivisions)
    counts = np.zeros(len(bins), dtype=np.int64)
    pts = []
    done, stream = 0, 0
    while done < n_samples:
        m = min(stream_size, n_samples - done)
        rng = model.rng(stream)
        g = _sample_moment_map(spec, m, rng, seed)
        y = class_projection(model, g, tw)
        y = np.atleast_2d(y)
        counts += np.bincount(_bin_index(alc, subdivisions, y), minlength=len(bins))
        pts.append(y)
        done += m
        stream += 1
    return MCHistogram(tw, subdivisions, bins, counts, n_samples, np.concatenate(pts))


_RADON_A1 = (6 - math.sqrt(15)) / 21
_RADON_A2 = (6 + math.sqrt(15)) / 21
_RADON = (
    [(1 / 3, 1 / 3, 1 / 3)]
    + [p for a in (_RADON_A1, _RADON_A2) for p in ((a, a, 1 - 2 * a), (a, 1 - 2 * a, a), (1 - 2 * a, a, a))],
    [9 / 40] + [(155 - math.sqrt(15)) / 1200] * 3 + [(155 + math.sqrt(15)) / 1200] * 3,
)


def _bin_rule(bins: np.ndarray, refine: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature points (flattened) and per-bin weights summing to 1 on each bin."""
    k = bins.shape[2]
    if k == 1:
        x, w = np.polynomial.legendre.leggauss(10)
        lo, hi = bins[:, 0, 0], bins[:, 1, 0]
        pts = lo[:, None] + (hi - lo)[:, None] * (x[None] + 1) / 2
        return pts.reshape(-1, 1), np.broadcast_to(w / 2, pts.shape)
    bary, w = np.array(_RADON[0]), np.array(_RADON[1])
    sub = _subdivide(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), refine)
    # barycentric coordinates of the refined rule on the reference triangle
    ref = []
    for s in sub:
        for b in bary:
            p = b @ s
            ref.append([1 - p[0] - p[1], p[0], p[1]])
    ref = np.array(ref)
    wr = np.tile(w, len(sub)) / len(sub)
    pts = np.einsum("qv,bvk->bqk", ref, bins)
    return pts.reshape(-1, 2), np.broadcast_to(wr, pts.shape[:2])


def series_bin_density(spec: SurfaceSpec, hist: MCHistogram, heat_t: float,
                       level_cutoff: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Bin averages of the normalized series density and of its truncation residual."""
    pts, w = _bin_rule(hist.bins)
    dens, res = alcove_probability_density(spec, pts, heat_t, level_cutoff)
    nb = len(hist.bins)
    return (dens.reshape(nb, -1) * w).sum(axis=1), (res.reshape(nb, -1) * w).sum(axis=1)


def kde_density(hist: MCHistogram, points: np.ndarray, bandwidth: float | None = None) -> np.ndarray:
    """Gaussian kernel estimate on a one-dimensional alcove, reflected at both ends.

    The default bandwidth is Silverman's rule.
    """
    if hist.twist.fixed_rank != 1:
        raise ValueError("kernel density estimate is implemented for one-dimensional alcoves")
    s = hist.points[:, 0]
    lo, hi = hist.bins[0, 0, 0], hist.bins[-1, 1, 0]
    if bandwidth is None:
        iqr = np.subtract(*np.percentile(s, [75, 25]))
        bandwidth = 0.9 * min(s.std(), iqr / 1.34) * len(s) ** (-0.2)
    x = np.asarray(points, dtype=float).ravel()
    out = np.zeros_like(x)
    norm = 1 / (len(s) * bandwidth * math.sqrt(2 * math.pi))
    for mirror in (s, 2 * lo - s, 2 * hi - s):
        for start in range(0, len(mirror), 1 << 15):
            chunk = mirror[start:start + (1 << 15)]
            out += np.exp(-0.5 * ((x[:, None] - chunk[None]) / bandwidth) ** 2).sum(axis=1)
    return out * norm


@dataclass(frozen=True)
class MCComparison:
    """Side-by-side Monte Carlo and series bin densities."""

    centers: np.ndarray
    mc: np.ndarray
    stderr: np.ndarray
    series: np.ndarray
    series_residual: np.ndarray
    z: np.ndarray
    total_mass: float


def mc_compare(spec: SurfaceSpec, n_samples: int, subdivisions: int = 20, seed: int = 0,
               heat_t: float = 1e-3, level_cutoff: int | None = None) -> MCComparison:
    hist = mc_density(spec, n_samples, subdivisions, seed)
    series, res = series_bin_density(spec, hist, heat_t, level_cutoff)
    # standard error under the series hypothesis, so empty bins still get a scale
    p = np.clip(series * hist.volumes, 0, 1)
    se = np.sqrt(np.maximum(p * (1 - p), 1e-300) / n_samples) / hist.volumes
    z = (hist.density - series) / se
    return MCComparison(hist.centers, hist.density, hist.stderr, series, res, z, hist.total_mass)


# -- exact 2-design ------------------------------------------------------------
def _phase_normalize(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    i = int(np.argmax(np.abs(flat) > 1e-9))
    return u * (abs(flat[i]) / flat[i])


@lru_cache(maxsize=None)
def qutrit_clifford_group() -> np.ndarray:
    """The single-qutrit Clifford group modulo phases (216 elements), scaled into SU(3)."""
    w = np.exp(2j * np.pi / 3)
    x = np.roll(np.eye(3), 1, axis=0)
    f = np.array([[w ** (a * b) for b in range(3)] for a in range(3)]) / math.sqrt(3)
    s = np.diag([1, 1, w])
    gens = [x, f, s]

    def key(u):
        v = _phase_normalize(u).ravel()
        return tuple(np.round(np.concatenate([v.real, v.imag]) * 1e8).astype(np.int64).tolist())

    elems = {key(np.eye(3)): np.eye(3, dtype=complex)}
    frontier = [np.eye(3, dtype=complex)]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = g @ u
                kv = key(v)
                if kv not in elems:
                    elems[kv] = v
                    nxt.append(v)
        frontier = nxt
    out = np.array(list(elems.values()))
    det = np.linalg.det(out)
    return out * (det ** (-1 / 3))[:, None, None]


def frame_potential(unitaries: np.ndarray, t: int = 2) -> float:
    """``mean |tr(U^dagger V)|^(2t)`` over pairs; equals ``t!`` for a unitary t-design when d >= t."""
    tr = np.einsum("aij,bij->ab", np.conj(unitaries), unitaries)
    return float(np.mean(np.abs(tr) ** (2 * t)))
