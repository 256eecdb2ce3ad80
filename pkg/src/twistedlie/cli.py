"""``twistedlie`` command line: scenario JSON in, CSV and JSON tables out.

Exit codes: 0 success, 1 ``verify`` found a failing check, 2 the scenario
does not validate against the schema, 3 the (group, twist) combination or
the requested computation is not supported.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import _suite, oracles
from .characters import CharacterContext, fixed_dominant_weights, twining_values
from .measures import ClassData, class_volume
from .moduli import (
    SurfaceSpec,
    dh_coefficient_table,
    dh_density_values,
    reduced_volume,
)
from .rootsystem import build_root_system, classical_dimension
from .twist import named_twist, sample_alcove

log = logging.getLogger("twistedlie")

EXIT_OK, EXIT_VERIFY, EXIT_SCHEMA, EXIT_UNSUPPORTED = 0, 1, 2, 3

COLUMNS = {
    "dh-coeffs": ["lambda_coords", "coeff", "volg_power", "abs_err_estimate"],
    "mc-check": ["bin_center", "mc_estimate", "mc_stderr", "series_value", "z_score"],
}


class ScenarioError(Exception):
    """The scenario does not validate; ``pointer`` locates the offending field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(message)
        self.pointer = pointer
        self.message = message


class Unsupported(Exception):
    pass


# -- scenario loading -------------------------------------------------------------
def load_schema(name: str = "scenario.schema.json") -> dict:
    return json.loads(resources.files("twistedlie").joinpath(name).read_text(encoding="utf-8"))


def _with_defaults(cls):
    validate_props = cls.VALIDATORS["properties"]

    def fill(validator, properties, instance, schema):
        if isinstance(instance, dict):
            for key, sub in properties.items():
                if "default" in sub and key not in instance:
                    instance[key] = json.loads(json.dumps(sub["default"]))
        yield from validate_props(validator, properties, instance, schema)

    return jsonschema.validators.extend(cls, {"properties": fill})


_FillingValidator = _with_defaults(jsonschema.Draft202012Validator)


def validate_scenario(doc: Any) -> dict:
    """Validate ``doc`` and fill in every schema default (in place)."""
    schema = load_schema()
    errors = sorted(_FillingValidator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise ScenarioError(pointer, e.message)
    return doc


def validate_output(name: str, doc: Any) -> None:
    """Check an output document against its definition in ``output.schema.json``."""
    schema = load_schema("output.schema.json")
    jsonschema.validate(doc, {"$ref": f"#/$defs/{name}", "$defs": schema["$defs"]},
                        cls=jsonschema.Draft202012Validator)


def load_scenario(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError("/", f"not valid JSON ({exc})") from exc
    return validate_scenario(doc)


class Context:
    """Objects realized from a validated scenario."""

    def __init__(self, sc: dict):
        self.sc = sc
        g = sc["group"]
        try:
            self.rs = build_root_system(g["series"], g["rank"])
            self.twist_name = sc["twist"]
            self.tw = named_twist(self.rs, self.twist_name)
        except ValueError as exc:
            raise Unsupported(str(exc)) from exc
        self.num = sc["numerics"]
        self.tol = sc["tolerances"]

    @property
    def ctx(self) -> CharacterContext:
        return CharacterContext(self.tw)

    def surface(self) -> SurfaceSpec:
        s = self.sc["surface"]
        try:
            pairs = s["handle_twists"] or [["identity", "identity"]] * s["h"]
            if len(pairs) != s["h"]:
                raise ScenarioError("/surface/handle_twists", f"expected {s['h']} pairs, got {len(pairs)}")
            handles = tuple((named_twist(self.rs, a), named_twist(self.rs, b)) for a, b in pairs)
            bds = []
            for n, b in enumerate(s["boundaries"]):
                tw = named_twist(self.rs, b["twist"])
                if len(b["alcove_point"]) != tw.fixed_rank:
                    raise ScenarioError(f"/surface/boundaries/{n}/alcove_point",
                                        f"expected {tw.fixed_rank} coordinates")
                bds.append(ClassData.from_alcove(tw, b["alcove_point"]))
            return SurfaceSpec(self.rs, s["h"], handles, tuple(bds))
        except ValueError as exc:
            raise Unsupported(str(exc)) from exc

    def points(self, tw=None) -> np.ndarray:
        tw = self.tw if tw is None else tw
        pts = self.sc["points"]
        if pts:
            for n, p in enumerate(pts):
                if len(p) != tw.fixed_rank:
                    raise ScenarioError(f"/points/{n}", f"expected {tw.fixed_rank} coordinates")
            return np.array(pts, dtype=float)
        return sample_alcove(tw, self.num["random_points"], np.random.default_rng(self.num["seed"]))

    def grid(self, tw) -> np.ndarray:
        """Scenario points, or the interior lattice points of the alcove at ``density_grid``."""
        if self.sc["points"]:
            return self.points(tw)
        n = self.num["density_grid"]
        k = tw.fixed_rank
        out = []
        for idx in np.ndindex(*([n + 1] * (k + 1))):
            if sum(idx) == n and min(idx) > 0:
                out.append(np.array(idx, dtype=float) / n @ tw.alcove)
        if not out:  # coarse grid: fall back to the barycentre
            out = [tw.alcove.mean(axis=0)]
        return np.array(out)

    def weights(self, tw=None) -> list[tuple[int, ...]]:
        tw = self.tw if tw is None else tw
        ws = self.sc["weights"]
        if not ws:
            return fixed_dominant_weights(tw, self.num["max_level"])
        for n, lam in enumerate(ws):
            if len(lam) != self.rs.rank:
                raise ScenarioError(f"/weights/{n}", f"expected {self.rs.rank} coordinates")
            if not tw.is_fixed_weight(lam):
                raise Unsupported(f"weight {tuple(lam)} is not fixed by the {self.twist_name} twist")
        return [tuple(lam) for lam in ws]


# -- serialization -------------------------------------------------------------------
def fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} in output")
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON text with floats printed at 17 significant digits; key order as given."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    return json.dumps(str(obj))


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _coords(v: Sequence) -> str:
    return " ".join(fmt(x) if isinstance(x, (float, np.floating)) else str(int(x)) for x in v)


class Writer:
    def __init__(self, out: Path, outputs: Sequence[str]):
        self.out = out
        self.outputs = set(outputs)
        self.written: list[Path] = []

    def csv(self, name: str, header, rows) -> None:
        if "csv" in self.outputs:
            self._write(name + ".csv", csv_text(header, rows))

    def json(self, name: str, obj) -> None:
        if "json" in self.outputs:
            text = dumps(obj)
            validate_output(name, json.loads(text))
            self._write(name + ".json", text + "\n")

    def _write(self, fname: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / fname
        p.write_text(text, encoding="utf-8")
        self.written.append(p)


# -- commands ---------------------------------------------------------------------------
def _twist_info(tw, name: str) -> dict:
    return {"name": name, "simple_perm": list(tw.simple_perm), "order": tw.order,
            "orbits": [list(o) for o in tw.orbits], "fixed_rank": tw.fixed_rank, "moved_rank": tw.moved_rank}


def cmd_info(c: Context, w: Writer) -> int:
    rs, tw = c.rs, c.tw
    osys = tw.orbit_system
    expected = _suite.table_one_expected(rs.series, rs.rank, c.twist_name)
    report = {
        "group": {"series": rs.series, "rank": rs.rank, "label": rs.label,
                  "dimension": classical_dimension(rs.series, rs.rank),
                  "weyl_order": rs.weyl_order, "positive_roots": len(rs.positive_roots)},
        "twist": _twist_info(tw, c.twist_name),
        "orbit_system": {"label": osys.label, "rank": osys.rank,
                         "simple_roots": [[str(x) for x in r] for r in osys.simple_roots],
                         "highest_root": [str(x) for x in osys.highest_root]},
        "table_one": {"listed": expected, "matches": None if expected is None else expected == osys.label},
        "intersection_order": tw.intersection_order,
        "wk_order": tw.wk_order,
        "twisted_weyl_order": tw.twisted_weyl_order,
        "alcove_vertices": [[float(x) for x in v] for v in tw.alcove],
    }
    w.json("info", report)
    print(dumps(report))
    return EXIT_OK


def cmd_twining(c: Context, w: Writer) -> int:
    pts = c.points()
    weights = c.weights()
    k = c.tw.fixed_rank
    rows, entries = [], []
    for lam in weights:
        vals = twining_values(c.ctx, lam, pts)
        for n, (p, v) in enumerate(zip(pts, vals)):
            rows.append([n, *[float(x) for x in p], _coords(lam), float(v.real), float(v.imag)])
        entries.append({"lambda": list(lam), "values_re": [float(v.real) for v in vals],
                        "values_im": [float(v.imag) for v in vals]})
    header = ["point_index"] + [f"y{i + 1}" for i in range(k)] + ["lambda_coords", "re", "im"]
    w.csv("twining", header, rows)
    w.json("twining", {"twist": _twist_info(c.tw, c.twist_name),
                       "points": [[float(x) for x in p] for p in pts], "characters": entries})
    print(f"{len(weights)} twining characters at {len(pts)} points")
    return EXIT_OK


def cmd_class_volume(c: Context, w: Writer) -> int:
    pts = c.points()
    k = c.tw.fixed_rank
    rows, entries = [], []
    for p in pts:
        cd = ClassData.from_alcove(c.tw, p)
        v = class_volume(cd)
        rows.append([*[float(x) for x in cd.y], float(v.real_coeff), v.volg_power, int(v.degenerate)])
        entries.append({"alcove_point": [float(x) for x in cd.y], "coeff": float(v.real_coeff),
                        "volg_power": v.volg_power, "degenerate": v.degenerate})
    w.csv("class_volume", [f"y{i + 1}" for i in range(k)] + ["coeff", "volg_power", "degenerate"], rows)
    w.json("class_volume", {"twist": _twist_info(c.tw, c.twist_name), "classes": entries})
    print(f"{len(pts)} class volumes")
    return EXIT_OK


def _surface_info(spec: SurfaceSpec) -> dict:
    return {"h": spec.h, "b": spec.b,
            "handle_twists": [[list(t.simple_perm), list(k.simple_perm)] for t, k in spec.handle_twists],
            "boundaries": [{"twist": list(cd.twist.simple_perm), "alcove_point": [float(x) for x in cd.y]}
                           for cd in spec.boundaries],
            "target_twist": list(spec.target_twist.simple_perm)}


def cmd_dh_coeffs(c: Context, w: Writer) -> int:
    spec = c.surface()
    level = c.num["level_cutoff"] if c.num["level_cutoff"] is not None else c.num["max_level"]
    table = dh_coefficient_table(spec, level)
    rows, entries = [], []
    eps = np.finfo(float).eps
    for lam, v in table.items():
        coeff = v.coeff
        err = abs(coeff) * eps * (len(v.factors) + 1) if v.factors else 0.0
        rows.append([_coords(lam), float(coeff.real), v.volg_power, float(err)])
        entries.append({"lambda": list(lam), "coeff": float(coeff.real), "coeff_imag": float(coeff.imag),
                        "rational": str(v.rational), "volg_power": v.volg_power, "abs_err_estimate": float(err)})
    w.csv("dh_coeffs", COLUMNS["dh-coeffs"], rows)
    w.json("dh_coeffs", {"surface": _surface_info(spec), "level_cutoff": level, "entries": entries})
    print(f"{len(entries)} nonvanishing coefficients up to level {level}")
    return EXIT_OK


def _density_rows(c: Context):
    spec = c.surface()
    tw = spec.target_twist
    pts = c.grid(tw)
    vals, res, cutoff = dh_density_values(spec, pts, c.num["heat_t"], c.num["level_cutoff"])
    return spec, tw, pts, vals, res, cutoff


def cmd_density(c: Context, w: Writer) -> int:
    spec, tw, pts, vals, res, cutoff = _density_rows(c)
    power = spec.volg_power - 1
    k = tw.fixed_rank
    rows = [[*[float(x) for x in p], float(v.real), power, float(r)] for p, v, r in zip(pts, vals, res)]
    w.csv("density", [f"y{i + 1}" for i in range(k)] + ["density_coeff", "volg_power", "trunc_residual"], rows)
    w.json("density", {"surface": _surface_info(spec), "heat_t": c.num["heat_t"], "level_cutoff": cutoff,
                       "volg_power": power,
                       "points": [{"alcove_point": [float(x) for x in p], "density_coeff": float(v.real),
                                   "density_coeff_imag": float(v.imag), "trunc_residual": float(r)}
                                  for p, v, r in zip(pts, vals, res)]})
    print(f"density at {len(pts)} points, level cutoff {cutoff}")
    return EXIT_OK


def cmd_reduced_volume(c: Context, w: Writer, gamma_order: int) -> int:
    spec = c.surface()
    tw = spec.target_twist
    pts = c.grid(tw)
    rows, entries = [], []
    for p in pts:
        try:
            r = reduced_volume(spec, p, gamma_order, c.num["heat_t"], c.num["level_cutoff"])
        except ValueError as exc:
            log.warning("skipping %s: %s", p, exc)
            continue
        rows.append([*[float(x) for x in p], float(r.coeff.real), r.volg_power, float(r.trunc_residual)])
        entries.append({"alcove_point": [float(x) for x in p], "volume_coeff": float(r.coeff.real),
                        "volg_power": r.volg_power, "trunc_residual": float(r.trunc_residual)})
    k = tw.fixed_rank
    w.csv("reduced_volume", [f"y{i + 1}" for i in range(k)] + ["volume_coeff", "volg_power", "trunc_residual"],
          rows)
    w.json("reduced_volume", {"surface": _surface_info(spec), "gamma_order": gamma_order,
                              "heat_t": c.num["heat_t"], "points": entries})
    print(f"reduced volumes at {len(entries)} points")
    return EXIT_OK


def cmd_mc_check(c: Context, w: Writer) -> int:
    spec = c.surface()
    try:
        cmp_ = oracles.mc_compare(spec, c.num["mc_samples"], c.num["mc_bins"], c.num["seed"],
                                  c.num["mc_heat_t"], c.num["level_cutoff"])
    except ValueError as exc:
        raise Unsupported(str(exc)) from exc
    rows = [[_coords(ctr), float(m), float(s), float(v), float(z)]
            for ctr, m, s, v, z in zip(cmp_.centers, cmp_.mc, cmp_.stderr, cmp_.series, cmp_.z)]
    w.csv("mc_check", COLUMNS["mc-check"], rows)
    frac = float(np.mean(np.abs(cmp_.z) < 3))
    w.json("mc_check", {"surface": _surface_info(spec), "samples": c.num["mc_samples"], "seed": c.num["seed"],
                        "total_mass": cmp_.total_mass, "fraction_within_3_sigma": frac,
                        "max_abs_z": float(np.abs(cmp_.z).max())})
    print(f"{len(rows)} bins, {100 * frac:.1f}% within 3 sigma")
    return EXIT_OK


def cmd_verify(c: Context, w: Writer) -> int:
    spec = c.surface()

    def show(r):
        state = "skip" if r.skipped else ("pass" if r.passed else "FAIL")
        print(f"{state:4s} {r.name:24s} {r.value:.3e} (tol {r.tolerance:.1e}) {r.detail}")

    results = _suite.run_suite(c.tw, c.twist_name, c.num, c.tol, spec, progress=show)
    ok = all(r.passed for r in results)
    w.json("verify_report", {"passed": ok, "group": c.rs.label, "twist": c.twist_name,
                             "checks": [r.as_dict() for r in results]})
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = ("info", "twining", "class-volume", "dh-coeffs", "density", "reduced-volume", "mc-check", "verify")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistedlie", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("scenario", help="scenario JSON file")
        s.add_argument("-o", "--out", default=".", help="output directory (default: current)")
        if name == "reduced-volume":
            s.add_argument("--gamma-order", type=int, required=True,
                           help="order of the principal stabilizer (no default)")
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        sc = load_scenario(args.scenario)
        c = Context(sc)
        w = Writer(Path(args.out), sc["outputs"])
        if args.command == "reduced-volume":
            if args.gamma_order < 1:
                raise ScenarioError("--gamma-order", "must be a positive integer")
            return cmd_reduced_volume(c, w, args.gamma_order)
        handler = {"info": cmd_info, "twining": cmd_twining, "class-volume": cmd_class_volume,
                   "dh-coeffs": cmd_dh_coeffs, "density": cmd_density, "mc-check": cmd_mc_check,
                   "verify": cmd_verify}[args.command]
        return handler(c, w)
    except ScenarioError as exc:
        print(f"scenario error at {exc.pointer}: {exc.message}", file=sys.stderr)
        return EXIT_SCHEMA
    except Unsupported as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except FileNotFoundError as exc:
        print(f"scenario error at /: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
