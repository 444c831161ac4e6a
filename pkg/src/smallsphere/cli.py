"""Command-line front end.

Input is a YAML document holding exactly one curvature source::

    weyl_em:                 # vacuum, electric/magnetic parts
      D: [[2, 0, 0], [0, -1, 0], [0, 0, -1]]
      E: [[0, 0, 0], [0, 0, 0], [0, 0, 0]]

    riemann:                 # sparse components, symmetry-completed
      R_0101: 1.0
      R_0202: -0.5

    stress: [[1, 0, 0, 0], [0, 0.2, 0, 0], [0, 0, 0.2, 0], [0, 0, 0, 0.2]]

plus the optional keys ``dweyl`` (sparse ``dW_mabcd`` map, completed over the
last four slots and projected onto Bianchi-valid derivatives) and ``options``
(``grid_degree``, ``observer``, ``seed``, ``tolerances``).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import checks as checks_mod
from . import energy, expansion, nonvacuum
from .checks import SUITES, Check, rel
from .quadrature import build_grid
from .tensor import (
    CurvatureAtPoint, CurvatureError, ElectricMagneticParts, Observer, bel_robinson,
    electric_magnetic_from_weyl, q_contract, v_vector, validate_riemann,
    weyl_from_electric_magnetic,
)

COMMANDS = ("decompose", "energy", "minimize", "nonvacuum", "verify")
SOURCES = ("riemann", "weyl_em", "stress")
DEFAULT_GRID = 12
DEFAULT_SEED = 42

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad input document or unmet precondition; maps to exit code 2."""


@dataclass(frozen=True)
class InputDocument:
    source: str
    curvature: CurvatureAtPoint | None = None
    stress: nonvacuum.StressEnergy | None = None
    derivatives: expansion.CurvatureDerivatives | None = None
    options: dict = field(default_factory=dict)
    digest: str = "none"


# the eight index orderings related by the Riemann symmetries, with signs
_ORBIT = (
    ((0, 1, 2, 3), 1, None),
    ((1, 0, 2, 3), -1, "antisymmetry in the first pair"),
    ((0, 1, 3, 2), -1, "antisymmetry in the last pair"),
    ((1, 0, 3, 2), 1, "antisymmetry in both pairs"),
    ((2, 3, 0, 1), 1, "pair symmetry"),
    ((3, 2, 0, 1), -1, "pair symmetry with antisymmetry"),
    ((2, 3, 1, 0), -1, "pair symmetry with antisymmetry"),
    ((3, 2, 1, 0), 1, "pair symmetry with antisymmetry"),
)


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InputError(f"{where}: value must be finite")
    return float(value)


def _matrix(value, shape, where) -> np.ndarray:
    if not isinstance(value, list) or len(value) != shape[0]:
        raise InputError(f"{where}: expected a {shape[0]}x{shape[1]} nested list")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise InputError(f"{where}: row {i} must have {shape[1]} entries")
        rows.append([_number(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows)


def complete_sparse(entries, prefix, lead=0) -> np.ndarray:
    """Fill a dense array from ``{prefix + digits: value}`` using the Riemann symmetries
    of the last four slots.  ``lead`` counts extra leading derivative slots."""
    if not isinstance(entries, dict):
        raise InputError(f"{prefix}... components must be a mapping")
    pattern = re.compile(rf"^{prefix}([0-3]{{{lead + 4}}})$")
    out = np.zeros((4,) * (lead + 4))
    owner = {}
    for key, value in entries.items():
        m = pattern.match(str(key))
        if not m:
            raise InputError(f"bad component name {key!r}; expected {prefix} followed by {lead + 4} digits 0-3")
        v = _number(value, key)
        idx = tuple(int(ch) for ch in m.group(1))
        head, tail = idx[:lead], idx[lead:]
        if v != 0 and (tail[0] == tail[1] or tail[2] == tail[3]):
            raise InputError(f"{key}: nonzero component with a repeated antisymmetric pair")
        for perm, sign, _ in _ORBIT:
            pos = head + tuple(tail[p] for p in perm)
            if pos in owner:
                if abs(out[pos] - v * sign) > 1e-12 * max(1.0, abs(v), abs(out[pos])):
                    prev_key, prev_tail = owner[pos]
                    raise InputError(f"{key} is inconsistent with {prev_key} under {_law(prev_tail, tail)}")
            else:
                owner[pos] = (key, tail)
                out[pos] = v * sign
    return out


def _law(a, b) -> str:
    for perm, _, name in _ORBIT:
        if name and tuple(a[p] for p in perm) == tuple(b):
            return name
    return "the Riemann symmetries"


def _load_yaml(text):
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else "?"
        raise InputError(f"parse error at line {line}: {exc.problem or exc}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"parse error: {exc}") from None


def parse_text(text: str, digest="none") -> InputDocument:
    data = _load_yaml(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise InputError("top level must be a mapping")
    unknown = set(data) - set(SOURCES) - {"dweyl", "options"}
    if unknown:
        raise InputError(f"unknown keys: {', '.join(sorted(map(str, unknown)))}")
    present = [k for k in SOURCES if k in data]
    if len(present) != 1:
        raise InputError("exactly one curvature source (riemann, weyl_em or stress) is required"
                         + (f"; found {', '.join(present)}" if present else ""))
    source = present[0]
    curvature = stress = None
    try:
        if source == "riemann":
            curvature = validate_riemann(complete_sparse(data["riemann"], "R_"))
        elif source == "weyl_em":
            em = data["weyl_em"]
            if not isinstance(em, dict) or set(em) != {"D", "E"}:
                raise InputError("weyl_em needs exactly the keys D and E")
            parts = ElectricMagneticParts(_matrix(em["D"], (3, 3), "weyl_em.D"),
                                          _matrix(em["E"], (3, 3), "weyl_em.E"))
            curvature = weyl_from_electric_magnetic(parts)
        else:
            stress = nonvacuum.StressEnergy(_matrix(data["stress"], (4, 4), "stress"))
    except (CurvatureError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{source}: {exc}") from None
    derivs = None
    if "dweyl" in data:
        derivs = expansion.project_bianchi(complete_sparse(data["dweyl"], "dW_", lead=1))
    return InputDocument(source, curvature, stress, derivs, _options(data.get("options")), digest)


def _options(raw) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise InputError("options must be a mapping")
    unknown = set(raw) - {"grid_degree", "observer", "seed", "tolerances"}
    if unknown:
        raise InputError(f"unknown options: {', '.join(sorted(map(str, unknown)))}")
    out = dict(raw)
    if "observer" in raw:
        obs = raw["observer"]
        if not isinstance(obs, list) or len(obs) != 3:
            raise InputError("options.observer must be a list of three numbers")
        out["observer"] = [_number(v, "options.observer") for v in obs]
    for key in ("grid_degree", "seed"):
        if key in raw and (isinstance(raw[key], bool) or not isinstance(raw[key], int)):
            raise InputError(f"options.{key} must be an integer")
    tols = raw.get("tolerances", {})
    if not isinstance(tols, dict):
        raise InputError("options.tolerances must map check names to numbers")
    out["tolerances"] = {str(k): _number(v, f"options.tolerances.{k}") for k, v in tols.items()}
    return out


def parse_input(path) -> InputDocument:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    return parse_text(text, "sha256:" + hashlib.sha256(raw).hexdigest())


# ---- commands -------------------------------------------------------------

def _vacuum(doc: InputDocument, command) -> CurvatureAtPoint:
    c = doc.curvature
    if c is None or not c.is_vacuum:
        raise InputError(f"{command} needs vacuum curvature (weyl_em, or riemann with vanishing Ricci)")
    return c


def _observer(doc, args) -> Observer:
    a = args.observer if args.observer is not None else doc.options.get("observer", [0.0, 0.0, 0.0])
    return Observer(np.asarray(a, dtype=float))


def _grid(doc, args):
    deg = args.grid_degree if args.grid_degree is not None else doc.options.get("grid_degree", DEFAULT_GRID)
    try:
        return build_grid(deg)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_decompose(doc, args):
    c = _vacuum(doc, "decompose")
    parts = electric_magnetic_from_weyl(c)
    v = v_vector(c)
    rebuilt = weyl_from_electric_magnetic(parts).riemann
    full = np.einsum("abcd,a,b,c,d->", bel_robinson(c).q, *[np.eye(4)[0]] * 4)
    results = {"D": parts.D, "E": parts.E,
               "V": {"components": v.components, "class": v.kind, "norm2": v.norm2}}
    return results, [Check("reconstruction from (D, E)", rel(rebuilt, c.riemann), 1e-12),
                     Check("Q(e0,e0,e0,e0) component formula", rel(q_contract(c, Observer(np.zeros(3))), full), 1e-12)]


def cmd_energy(doc, args):
    c = _vacuum(doc, "energy")
    t0 = _observer(doc, args)
    grid = _grid(doc, args)
    coef = energy.coefficients_closed_form(c)
    closed = energy.e5_closed_form(c, t0)
    via_a = coef.energy(t0)
    pieces = {
        "energy_component": energy.energy_component_limit(c, t0, grid),
        "reference_hamiltonian": energy.reference_hamiltonian_limit(c, t0, grid),
        "physical_hamiltonian": energy.physical_hamiltonian_limit(c, t0, grid),
    }
    assembled = (pieces["energy_component"] + pieces["reference_hamiltonian"]
                 - pieces["physical_hamiltonian"]) / energy.EIGHT_PI
    results = {
        "observer": {"a": t0.a, "a0": t0.a0},
        "A0": coef.A0, "Ai": coef.Ai, "Aij": coef.Aij,
        "e5_bel_robinson": closed, "e5_coefficients": via_a,
        "pieces": pieces, "e5_pieces": assembled,
    }
    return results, [Check("E5 dual representation", rel(via_a, closed), 1e-12),
                     Check("E5 three-piece assembly", rel(assembled, closed), 1e-8)]


def cmd_minimize(doc, args):
    c = _vacuum(doc, "minimize")
    r = energy.minimize(c)
    results = {"a_bar": r.a_bar, "e5_min": r.e5_min, "gradient_norm": r.gradient_norm,
               "hessian_min_eigenvalue": r.hessian_min_eigenvalue, "status": r.status,
               "iterations": r.iterations, "V_class": v_vector(c).kind}
    out = []
    if r.status == "unique-minimum":
        out = [Check("minimizer gradient norm", r.gradient_norm, 1e-10),
               Check("Hessian positive definite", max(0.0, -r.hessian_min_eigenvalue), 0.0)]
    elif r.status == "not-converged":
        out = [Check("minimizer converged", r.gradient_norm, 1e-10)]
    return results, out


def cmd_nonvacuum(doc, args):
    c = doc.curvature
    t = doc.stress if doc.stress is not None else nonvacuum.stress_from_curvature(c)
    t0 = _observer(doc, args)
    v = nonvacuum.classify(t.energy_momentum)
    results = {
        "T": t.T, "energy_momentum": {"components": v.components, "class": v.kind},
        "observer": {"a": t0.a, "a0": t0.a0},
        "limit_energy": nonvacuum.limit_energy(t, t0),
        "momentum": -nonvacuum.FOUR_PI_3 * t.T[0, 1:],
        "dominant_energy": t.dominant_energy,
    }
    out = []
    if v.kind == "timelike-future":
        obs, value = nonvacuum.min_energy_over_observers(t)
        results["minimum"] = {"a": obs.a, "value": value}
        out.append(Check("minimum attained at the reported observer",
                         rel(nonvacuum.limit_energy(t, obs), value), 1e-12))
    else:
        results["minimum"] = None
    if c is not None:
        grid = _grid(doc, args)
        mq = nonvacuum.momentum_components(c, grid)
        eq = nonvacuum.energy_component(c, grid)
        results["momentum_quadrature"] = mq
        results["energy_quadrature"] = eq
        out.append(Check("momentum quadrature", rel(mq, results["momentum"]), 1e-9))
        out.append(Check("energy quadrature", rel(eq, nonvacuum.FOUR_PI_3 * t.T[0, 0]), 1e-9))
    return results, out


def cmd_verify(doc, args):
    suites = SUITES if args.suite == "all" else (args.suite,)
    seed = args.seed if args.seed is not None else (doc.options.get("seed", DEFAULT_SEED) if doc else DEFAULT_SEED)
    given = []
    derivs = None
    if doc is not None:
        if doc.curvature is not None and doc.curvature.is_vacuum:
            given = [doc.curvature]
        elif doc.curvature is not None or doc.stress is not None:
            raise InputError("verify needs vacuum curvature input (or no input)")
        derivs = doc.derivatives
    out = []
    for name in suites:
        for ch in checks_mod.run_suite(name, seed=seed, curvatures=given, derivs=derivs):
            out.append(Check(f"{name}: {ch.name}", ch.residual, ch.tolerance))
    return {"suites": list(suites), "seed": seed, "count": len(out)}, out


HANDLERS = {"decompose": cmd_decompose, "energy": cmd_energy, "minimize": cmd_minimize,
            "nonvacuum": cmd_nonvacuum, "verify": cmd_verify}


def run(command, doc: InputDocument | None, args=None) -> dict:
    """Execute one command and return the report dictionary."""
    args = args or build_parser().parse_args([command])
    if command != "verify" and doc is None:
        raise InputError(f"{command} requires --input")
    results, found = HANDLERS[command](doc, args)
    overrides = doc.options.get("tolerances", {}) if doc else {}
    found = [Check(ch.name, ch.residual, overrides.get(ch.name, ch.tolerance)) for ch in found]
    return {
        "input_digest": doc.digest if doc else "none",
        "command": command,
        "results": results,
        "checks": [ch.as_dict() for ch in found],
    }


# ---- output ---------------------------------------------------------------

def fmt_number(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % (x + 0.0)


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _json(obj, indent=0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_number(obj)
    return json.dumps(obj)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _scalar(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return fmt_number(v)
    return str(v)


def render(report: dict, fmt="json") -> str:
    report = _plain(report)
    if fmt == "json":
        return _json(report) + "\n"
    head = {k: report[k] for k in ("input_digest", "command")}
    rows = list(_flatten({**head, "results": report["results"]}))
    if fmt == "text":
        lines = [f"{k} = {_scalar(v)}" for k, v in rows]
        for ch in report["checks"]:
            status = "PASS" if ch["pass"] else "FAIL"
            lines.append(f"{status} {ch['name']}: residual {fmt_number(ch['residual'])}"
                         f" <= {fmt_number(ch['tolerance'])}")
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "key", "value", "tolerance", "pass"])
        for k, v in rows:
            w.writerow(["value", k, _scalar(v), "", ""])
        for ch in report["checks"]:
            w.writerow(["check", ch["name"], fmt_number(ch["residual"]),
                        fmt_number(ch["tolerance"]), _scalar(ch["pass"])])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


# ---- entry point ----------------------------------------------------------

def _observer_arg(text):
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("observer must be three comma-separated numbers") from None
    if len(vals) != 3 or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("observer must be three comma-separated finite numbers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", metavar="FILE")
    common.add_argument("--observer", type=_observer_arg, metavar="a1,a2,a3")
    common.add_argument("--grid-degree", type=int, metavar="N")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", metavar="FILE")
    parser = argparse.ArgumentParser(prog="smallsphere",
                                     description="Small-sphere limit of quasi-local energy from curvature at a point.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        doc = parse_input(args.input) if args.input else None
        report = run(args.command, doc, args)
    except (InputError, CurvatureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(report, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if all(ch["pass"] for ch in report["checks"]) else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
