"""Property checks shared by ``twistedlie verify`` and the test-suite."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from . import oracles
from .characters import (
    CharacterContext,
    fixed_dominant_weights,
    gram_matrix,
    quadrature_size,
    twining_values,
    weight_multiplicities,
)
from .measures import twisted_det_factor_y, weyl_alternating_sum_y
from .moduli import (
    SurfaceSpec,
    boundary_coefficient,
    compose_twists,
    dh_coefficient,
    fuse_all,
    fused_double_coefficient,
)
from .rootsystem import RootSystem, TorusPoint, build_root_system, weyl_dimension
from .twist import Twist, named_twist, sample_alcove, twisted_weyl_group

# Orbit root systems as listed in the published table, keyed by (series, rank, twist).
TABLE_ONE = {
    ("A", 2, "flip"): "A1",
    ("A", 3, "flip"): "B2",
    ("A", 4, "flip"): "C2",
    ("A", 5, "flip"): "B3",
    ("A", 6, "flip"): "C3",
    ("D", 4, "flip"): "B3",
    ("D", 5, "flip"): "B4",
    ("D", 4, "triality"): "G2",
    ("E", 6, "flip"): "F4",
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""
    skipped: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


MAX_GRID_POINTS = 50_000_000
MAX_WEYL_FOR_ORBITS = 100_000


def _skipped(name: str, reason: str) -> CheckResult:
    return CheckResult(name, 0.0, 0.0, True, "skipped: " + reason, skipped=True)


def _result(name: str, err: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, float(err), float(tol), bool(err <= tol), detail)


def table_one_expected(series: str, rank: int, twist: str) -> str | None:
    if twist == "flip" and series == "A" and rank >= 2:
        n = rank // 2
        return "A1" if rank == 2 else (f"C{n}" if rank % 2 == 0 else f"B{(rank + 1) // 2}")
    if twist == "flip" and series == "D":
        return f"B{rank - 1}"
    return TABLE_ONE.get((series, rank, twist))


def check_table_one(tw: Twist, twist_name: str) -> CheckResult | None:
    rs = tw.base
    want = table_one_expected(rs.series, rs.rank, twist_name)
    if want is None:
        return None
    got = tw.orbit_system.label
    return CheckResult("table_one", float(got != want), 0.0, got == want, f"computed {got}, table {want}")


def check_structure(tw: Twist) -> CheckResult:
    wk, full = twisted_weyl_group(tw)
    inter = tw.intersection_order
    ok = full == inter * len(wk) and inter in (2 ** tw.moved_rank, 3)
    return CheckResult("structure", float(not ok), 0.0, ok,
                       f"|W^(k)| = {full}, |T^k ∩ T_k| = {inter}, |W^k| = {len(wk)}")


def weyl_sum_errors(tw: Twist, y: np.ndarray) -> np.ndarray:
    rho_c = [int(x) for x in tw.weight_to_orbit(tw.base.rho)]
    lhs = tw.intersection_order * np.abs(weyl_alternating_sum_y(tw, y, rho_c)) ** 2
    rhs = twisted_det_factor_y(tw, y)
    return np.abs(lhs - rhs) / np.abs(rhs)


def check_weyl_sum(tw: Twist, n: int, seed: int, tol: float) -> CheckResult:
    y = sample_alcove(tw, n, np.random.default_rng(seed))
    return _result("weyl_sum_identity", weyl_sum_errors(tw, y).max(), tol, f"{n} points")


def check_orthogonality(tw: Twist, max_level: int, grid_n: int, tol: float) -> CheckResult:
    weights = fixed_dominant_weights(tw, max_level)
    size = quadrature_size(CharacterContext(tw), weights, grid_n)
    if size > MAX_GRID_POINTS:
        return _skipped("orthogonality", f"quadrature grid of {size} points")
    g = gram_matrix(CharacterContext(tw), weights, grid_n)
    err = np.abs(g - np.eye(len(weights))).max()
    return _result("orthogonality", err, tol, f"{len(weights)} weights up to level {max_level}")


def _positive_roots_coroot(rs: RootSystem) -> np.ndarray:
    # <alpha, xi> for xi in simple-coroot coordinates: rows alpha in omega coordinates
    return rs.positive_roots.astype(float)


def untwisted_errors(rs: RootSystem, weights: Sequence[Sequence[int]], y: np.ndarray) -> dict[str, float]:
    """Twining characters and determinant factors of the identity twist against classical formulas."""
    tw = named_twist(rs, "identity")
    ctx = CharacterContext(tw)
    out = {"character": 0.0, "denominator": 0.0, "alcove": 0.0}
    for lam in weights:
        mult = weight_multiplicities(rs, lam)
        # orbit sums of Freudenthal multiplicities, an independent evaluation path
        ref = np.zeros(len(y), dtype=complex)
        for mu, m in mult.items():
            orbit = np.unique(rs.weyl_elements @ np.array(mu), axis=0)
            ref += m * np.exp(2j * np.pi * (y @ orbit.T.astype(float))).sum(axis=1)
        got = twining_values(ctx, lam, y)
        out["character"] = max(out["character"], float(np.abs(got - ref).max() / max(1.0, np.abs(ref).max())))
    sines = np.prod(4 * np.sin(np.pi * (y @ _positive_roots_coroot(rs).T)) ** 2, axis=1)
    out["denominator"] = float(np.abs(twisted_det_factor_y(tw, y) / sines - 1).max())
    marks = [int(a) for a in rs.positive_roots_simple[-1]]
    simple = rs.simple_roots.astype(float)
    verts = [np.zeros(rs.rank)] + [np.linalg.solve(simple, np.eye(rs.rank)[i] / marks[i]) for i in range(rs.rank)]
    alc = tw.alcove
    out["alcove"] = float(max(min(np.abs(alc - v).max(axis=1)) for v in verts))
    return out


def check_untwisted(rs: RootSystem, max_level: int, n: int, seed: int, tol: float) -> CheckResult:
    if rs.weyl_order > MAX_WEYL_FOR_ORBITS:
        return _skipped("untwisted_limit", f"Weyl group of order {rs.weyl_order}")
    tw = named_twist(rs, "identity")
    y = sample_alcove(tw, n, np.random.default_rng(seed))
    weights = [lam for lam in fixed_dominant_weights(tw, min(max_level, 2)) if any(lam)]
    errs = untwisted_errors(rs, weights, y)
    # alternants sum |W| unit-modulus terms; scale the floor by |W| machine epsilons
    tol = max(tol, rs.weyl_order * np.finfo(float).eps * 100)
    return _result("untwisted_limit", max(errs.values()), tol,
                   ", ".join(f"{k} {v:.2e}" for k, v in errs.items()))


def check_det_crosscheck(tw: Twist, twist_name: str, n: int, seed: int, tol: float) -> CheckResult | None:
    rs = tw.base
    if rs.series not in ("A", "D") or twist_name not in ("identity", "flip") or (rs.series == "D" and rs.rank < 3):
        return None
    model = oracles.MatrixGroupModel(rs.series, rs.rank, twist_name)
    y = sample_alcove(tw, n, np.random.default_rng(seed))
    err = max(abs(oracles.matrix_twisted_det_factor(model, tw.y_to_xi(p)) / float(twisted_det_factor_y(tw, p)) - 1)
              for p in y)
    return _result("det_crosscheck", err, tol, f"{n} points, {model.n}x{model.n} matrices")


def sl3_oracle_error(n: int, seed: int) -> float:
    rs_a2 = _a2()
    tw = named_twist(rs_a2, "flip")
    ctx = CharacterContext(tw)
    y = np.random.default_rng(seed).uniform(0, 1, (n, 1))
    err = 0.0
    for lam in oracles.SL3_ORACLE_WEIGHTS:
        vals = twining_values(ctx, lam, y)
        for p, v in zip(y, vals):
            err = max(err, abs(oracles.sl3_twining_oracle(lam, TorusPoint(tw.y_to_xi(p))) - v))
    return err


def _a2() -> RootSystem:
    return build_root_system("A", 2)


def projection_invariance_error(tw: Twist, n: int, seed: int) -> float:
    model = oracles.matrix_model(tw, seed)
    g = oracles.haar_sample(model, n, stream=0)
    h = oracles.haar_sample(model, n, stream=1)
    moved = h @ g @ np.conj(np.swapaxes(model.kappa(h), -1, -2))
    return float(np.abs(oracles.class_projection(model, moved, tw) - oracles.class_projection(model, g, tw)).max())


def check_projection(tw: Twist, n: int, seed: int, tol: float) -> CheckResult | None:
    try:
        oracles.matrix_model(tw)
        if tw.base.series != "A" or (not tw.is_trivial and (tw.base.rank + 1) % 2 == 0):
            return None
    except ValueError:
        return None
    return _result("projection_invariance", projection_invariance_error(tw, n, seed), tol, f"{n} samples")


def convolution_errors(n_points: int, seed: int) -> dict[tuple[str, str], float]:
    """A_2 convolution identity, integrated exactly with the Clifford 2-design.

    Only pairs of total degree at most two (weights 0, rho, 2 rho) are used,
    the range on which a 2-design integrates exactly.
    """
    rs = _a2()
    names = {"identity": named_twist(rs, "identity"), "flip": named_twist(rs, "flip")}
    design = oracles.qutrit_clifford_group()
    design_inv = np.conj(np.swapaxes(design, -1, -2))
    xs = oracles.haar_sample(oracles.MatrixGroupModel("A", 2, seed=seed), n_points)
    weights = [(0, 0), (1, 1), (2, 2)]
    out = {}
    for kname, tname in [("flip", "identity"), ("identity", "flip"), ("flip", "flip")]:
        kap, tau = names[kname], names[tname]
        ck, ct = CharacterContext(kap), CharacterContext(tau)
        ctk = CharacterContext(compose_twists(tau, kap))
        err = 0.0
        for lam in weights:
            for mu in weights:
                if lam[0] + mu[0] > 2:
                    continue
                chi_mu = oracles.twining_at(ct, mu, design)
                for x in xs:
                    lhs = np.mean(oracles.twining_at(ck, lam, x @ design_inv) * chi_mu)
                    rhs = (lam == mu) * oracles.twining_at(ctk, lam, x) / weyl_dimension(rs, lam)
                    err = max(err, abs(lhs - rhs))
        out[(kname, tname)] = err
    return out


def corollary_error(spec: SurfaceSpec, max_level: int) -> float:
    """Zero when the closed form matches iterated fusion exactly for every admissible weight."""
    bad = 0
    for lam in fixed_dominant_weights(spec.target_twist, max_level):
        direct = dh_coefficient(spec, lam)
        if not direct:
            continue
        pieces = [fused_double_coefficient(t, k, lam) for t, k in spec.handle_twists]
        pieces += [boundary_coefficient(cd, lam) for cd in spec.boundaries]
        fused = fuse_all(pieces, weyl_dimension(spec.group, lam))
        bad += fused != direct
    return float(bad)


def run_suite(tw: Twist, twist_name: str, numerics: dict, tolerances: dict,
              spec: SurfaceSpec | None = None, progress: Callable[[CheckResult], None] | None = None
              ) -> list[CheckResult]:
    rs = tw.base
    seed = numerics["seed"]
    npts = numerics["random_points"]
    checks: list[Callable[[], CheckResult | None]] = [
        lambda: check_table_one(tw, twist_name),
        lambda: check_structure(tw),
        lambda: check_weyl_sum(tw, max(npts, 100), seed, tolerances["weyl_sum"]),
        lambda: check_orthogonality(tw, numerics["max_level"], numerics["grid_n"], tolerances["orthogonality"]),
        lambda: check_untwisted(rs, numerics["max_level"], npts, seed, tolerances["untwisted"]),
        lambda: check_det_crosscheck(tw, twist_name, npts, seed, tolerances["det_crosscheck"]),
        lambda: check_projection(tw, npts, seed, tolerances["projection"]),
    ]
    if rs.series == "A" and rs.rank == 2:
        checks.append(lambda: _result("sl3_oracle", sl3_oracle_error(npts, seed), tolerances["oracle"]))
        checks.append(lambda: _result("convolution", max(convolution_errors(3, seed).values()),
                                      tolerances["convolution"]))
    if spec is not None:
        checks.append(lambda: _result("corollary", corollary_error(spec, numerics["max_level"]), 0.0))
    out = []
    for c in checks:
        r = c()
        if r is None:
            continue
        out.append(r)
        if progress is not None:
            progress(r)
    return out
