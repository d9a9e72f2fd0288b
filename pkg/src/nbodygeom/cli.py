"""Command-line front end.

Input is a JSON document::

    {"masses": [1, 2, 3], "dim": 3,
     "positions": [[...], ...], "velocities": [[...], ...],
     "matrix": [[...], ...],
     "options": {"tol": 1e-12, "max_iter": 100000, "seed": 7}}

Only ``masses`` is required.  Results go to standard output (or
``--output``) as JSON with every float written to 17 significant digits.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import central, invariants, jacobi, rootsys, shape
from .core import Configuration, center, is_centered
from .errors import ConvergenceError, GeometryError

SCHEMA_VERSION = "1.0"
EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3
EXIT_USAGE = 64

COMMANDS = ("jacobi", "invariants", "roots", "canon", "strata", "collision", "central", "quintic", "embed")


class InputError(ValueError):
    """Input document failed validation; ``errors`` lists every problem found."""

    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class UsageError(Exception):
    pass


@dataclass
class InputDocument:
    masses: list
    dim: int = 3
    positions: list | None = None
    velocities: list | None = None
    matrix: list | None = None
    options: dict = field(default_factory=dict)


def _reject_constant(name):
    raise InputError([f"non-finite number {name} is not allowed"])


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_table(doc, key, rows, width, errors):
    if not isinstance(rows, list):
        errors.append(f"{key} must be an array of rows")
        return
    masses = doc.get("masses")
    expected = len(masses) if isinstance(masses, list) else None
    if expected is not None and len(rows) != expected:
        errors.append(f"{key} has {len(rows)} rows, expected {expected}")
    for r, row in enumerate(rows):
        if not isinstance(row, list):
            errors.append(f"{key} row {r} is not an array")
        elif width is not None and len(row) != width:
            errors.append(f"{key} row {r} has {len(row)} entries, expected {width}")
        elif not all(_is_number(v) for v in row):
            errors.append(f"{key} row {r} contains a non-numeric entry")


def validate(doc) -> InputDocument:
    """Check a decoded JSON object, collecting every problem before raising."""
    if not isinstance(doc, dict):
        raise InputError(["input must be a JSON object"])
    errors = []
    known = {"masses", "dim", "positions", "velocities", "matrix", "options"}
    for key in sorted(set(doc) - known):
        errors.append(f"unknown field {key!r}")
    masses = doc.get("masses")
    if masses is None:
        errors.append("masses is required")
    elif not isinstance(masses, list) or not masses:
        errors.append("masses must be a non-empty array")
    else:
        for i, v in enumerate(masses):
            if not _is_number(v):
                errors.append(f"mass {i} is not a finite number")
            elif v <= 0:
                errors.append(f"mass must be positive (mass {i} is {v!r})")
    dim = doc.get("dim", 3)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        errors.append("dim must be a positive integer")
        dim = None
    for key in ("positions", "velocities"):
        if key in doc and doc[key] is not None:
            _check_table(doc, key, doc[key], dim, errors)
    if doc.get("velocities") is not None and doc.get("positions") is None:
        errors.append("velocities given without positions")
    mat = doc.get("matrix")
    if mat is not None:
        if not isinstance(mat, list) or not mat or not all(isinstance(r, list) for r in mat):
            errors.append("matrix must be a non-empty array of rows")
        else:
            width = len(mat[0])
            for r, row in enumerate(mat):
                if len(row) != width:
                    errors.append(f"matrix row {r} has {len(row)} entries, expected {width}")
                elif not all(_is_number(v) for v in row):
                    errors.append(f"matrix row {r} contains a non-numeric entry")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        errors.append("options must be an object")
        options = {}
    else:
        for key in sorted(options):
            val = options[key]
            if key == "tol":
                if not _is_number(val) or val <= 0:
                    errors.append("options.tol must be a positive number")
            elif key in ("max_iter", "seed"):
                if not isinstance(val, int) or isinstance(val, bool) or val < 0:
                    errors.append(f"options.{key} must be a nonnegative integer")
            else:
                errors.append(f"unknown option {key!r}")
    if errors:
        raise InputError(errors)
    return InputDocument(
        masses=[float(v) for v in masses],
        dim=dim,
        positions=doc.get("positions"),
        velocities=doc.get("velocities"),
        matrix=mat,
        options=dict(options),
    )


def parse_input(source=None) -> InputDocument:
    """Read and validate a document from a path, a file object, or stdin."""
    if source is None or source == "-":
        text = sys.stdin.read()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError([f"cannot read {source}: {exc.strerror}"]) from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError([f"malformed JSON: {exc}"]) from None
    return validate(doc)


# -- output -----------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize a non-finite float")
    s = "%.17g" % x
    # keep floats recognizable as floats in the JSON text
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats written to 17 significant digits."""
    out = []
    _encode(_plain(obj), out)
    return "".join(out)


def to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in _plain(rows):
        writer.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------


@dataclass
class Outcome:
    results: dict
    diagnostics: dict = field(default_factory=dict)
    table: list | None = None


def _configuration(doc: InputDocument, want_center: bool):
    if doc.positions is None:
        raise InputError(["positions are required for this command"])
    cfg = Configuration(np.array(doc.positions, dtype=float).reshape(len(doc.masses), doc.dim), doc.masses)
    if want_center:
        cfg, offset = center(cfg)
        return cfg, offset
    if not is_centered(cfg):
        raise InputError(["configuration is not centered (use --center)"])
    return cfg, np.zeros(cfg.dim)


def cmd_jacobi(doc, args):
    cfg, offset = _configuration(doc, args.center)
    coeffs = jacobi.standard_coefficients(cfg.masses)
    x = jacobi.forward(coeffs, cfg)
    res = {"jacobi_matrix": x.matrix, "zetas": coeffs.zetas}
    if doc.velocities is not None:
        vel = Configuration(np.array(doc.velocities, dtype=float), cfg.masses)
        vel, _ = center(vel)
        res["jacobi_velocities"] = jacobi.forward(coeffs, vel).matrix
    back = jacobi.inverse(coeffs, x).positions
    diag = {
        "center_offset": offset,
        "round_trip_error": float(np.max(np.abs(back - cfg.positions))),
    }
    table = [["vector"] + [f"c{k}" for k in range(x.dim)]]
    table += [[k + 1] + row for k, row in enumerate(x.columns.tolist())]
    return Outcome(res, diag, table)


def cmd_invariants(doc, args):
    cfg, offset = _configuration(doc, args.center)
    jac = invariants.jacobi_invariants(jacobi.jacobi_vectors(cfg))
    mw = invariants.mass_weighted_invariants(cfg)
    res = {"jacobi": jac.values, "mass_weighted": mw.values}
    if cfg.n == 3:
        res["triangle_area"] = invariants.triangle_area(cfg)
    if cfg.n == 4 and cfg.dim == 3:
        res["tetra_volume"] = invariants.tetra_volume(cfg)
    diff = float(np.max(np.abs(jac.values - mw.values), initial=0.0))
    table = [["k", "jacobi", "mass_weighted"]]
    table += [[k + 1, a, b] for k, (a, b) in enumerate(zip(jac.values.tolist(), mw.values.tolist()))]
    return Outcome(res, {"center_offset": offset, "max_form_difference": diff}, table)


def cmd_roots(doc, args):
    system = rootsys.standard_roots(doc.masses)
    res = {
        "pairs": [list(p) for p in system.pairs],
        "roots": system.roots,
        "normalized": system.normalized,
        "reduced_masses": [system.masses.reduced_mass(i, j) for i, j in system.pairs],
        "gram": system.gram(),
    }
    if system.n == 3:
        betas, alphas = rootsys.shape_circle_angles(system.masses)
        res["shape_circle"] = {"beta": betas, "alpha": alphas}
    problems = rootsys.check_reduced_masses(system.masses.reduced)
    table = [["i", "j"] + [f"w{k}" for k in range(system.n - 1)]]
    table += [list(p) + row for p, row in zip(system.pairs, system.roots.tolist())]
    return Outcome(res, {"reduced_mass_violations": problems}, table)


def _shape_matrix(doc, args):
    if doc.matrix is not None:
        return np.array(doc.matrix, dtype=float), "matrix"
    cfg, _ = _configuration(doc, args.center)
    return jacobi.jacobi_vectors(cfg).matrix, "jacobi"


def cmd_canon(doc, args):
    x, source = _shape_matrix(doc, args)
    form = shape.canonical_form(x)
    tol = args.tol if args.tol is not None else doc.options.get("tol", shape.SUBRANK_TOL)
    sig = shape.subrank(form.normalized(), tol)
    iso = shape.isotropy_descriptor(sig, form.d, form.m)
    res = {
        "r": form.r,
        "lambda": form.lam,
        "rank": sig.rank,
        "kappa": list(sig.kappa),
        "isotropy": {"factors": list(iso.factors), "dimension": iso.dimension},
    }
    table = [["i", "r", "lambda"]] + [
        [i + 1, r, lam] for i, (r, lam) in enumerate(zip(form.r.tolist(), form.lam.tolist()))
    ]
    return Outcome(res, {"source": source, "tol": tol}, table)


def cmd_strata(doc, args):
    if args.d is None:
        raise UsageError("strata needs --d")
    if args.d < 1:
        raise InputError(["d must be at least 1"])
    return Outcome({"multistrata": shape.stratum_census(args.d)}, {"d": args.d})


def cmd_collision(doc, args):
    cfg, offset = _configuration(doc, args.center)
    rows = [
        {"i": i, "j": j, "distance": shape.collision_distance(cfg, i, j)}
        for i, j in combinations(range(cfg.n), 2)
    ]
    table = [["i", "j", "distance"]] + [[r["i"], r["j"], r["distance"]] for r in rows]
    return Outcome({"distances": rows}, {"center_offset": offset}, table)


def _descent_options(doc, args):
    tol = args.tol if args.tol is not None else doc.options.get("tol", 1e-12)
    max_iter = args.max_iter if args.max_iter is not None else doc.options.get("max_iter", 100_000)
    return central.DescentOptions(max_iter=max_iter, tol=tol)


def _seed(doc, args):
    return args.seed if args.seed is not None else doc.options.get("seed")


def cmd_central(doc, args):
    opts = _descent_options(doc, args)
    seed = _seed(doc, args)
    sols = central.moulton_solve_all(doc.masses, opts, seed=seed)
    out = []
    table = [["ordering", "potential", "multiplier", "residual", "central_residual", "iterations"]
             + [f"a{k}" for k in range(len(doc.masses))]]
    for s in sols:
        cres, _ = central.central_residual(s.configuration(doc.masses, dim=1))
        out.append({
            "ordering": list(s.chamber.ordering),
            "x": s.x,
            "positions": s.positions,
            "gaps": s.gaps,
            "potential": s.potential,
            "multiplier": s.multiplier,
            "residual": s.residual,
            "central_residual": cres,
            "iterations": s.iterations,
        })
        table.append([" ".join(map(str, s.chamber.ordering)), s.potential, s.multiplier,
                      s.residual, cres, s.iterations] + s.positions.tolist())
    diag = {
        "count": len(sols),
        "tol": opts.tol,
        "max_iter": opts.max_iter,
        "seed": seed,
        "total_iterations": sum(s.iterations for s in sols),
    }
    return Outcome({"solutions": out}, diag, table)


def cmd_quintic(doc, args):
    coef, omega = central.euler_quintic(doc.masses)
    res = {
        "coefficients": coef,
        "omega": omega,
        "gap_ratio": omega / (1.0 - omega),
    }
    resid = float(abs(np.polyval(coef, omega)))
    return Outcome(res, {"polynomial_residual": resid})


def cmd_embed(doc, args):
    if doc.matrix is not None:
        y = np.array(doc.matrix, dtype=float)
        source = "matrix"
    else:
        x, _ = _shape_matrix(doc, args)
        y = shape.gram_map(x)
        if np.trace(y) == 0:
            raise InputError(["the zero configuration has no shape"])
        y = y / np.trace(y)
        source = "gram"
    y0 = shape.linear_model_embed(y)
    res = {"embedded": y0, "norm": float(np.linalg.norm(y0))}
    ev = np.linalg.eigvalsh(0.5 * (y + y.T))
    if ev[0] <= shape.PSD_TOL:
        res["boundary"] = shape.boundary_model_map(y)
    return Outcome(res, {"source": source})


HANDLERS = {
    "jacobi": cmd_jacobi,
    "invariants": cmd_invariants,
    "roots": cmd_roots,
    "canon": cmd_canon,
    "strata": cmd_strata,
    "collision": cmd_collision,
    "central": cmd_central,
    "quintic": cmd_quintic,
    "embed": cmd_embed,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_masses(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid mass list {text!r}") from None
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--input", "-i", help="JSON input file (default: stdin)")
    common.add_argument("--output", "-o", help="write results here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", type=float, help="solver or subrank tolerance")
    common.add_argument("--max-iter", type=int, dest="max_iter")
    common.add_argument("--center", action="store_true", help="center the configuration first")
    common.add_argument("--seed", type=int, help="randomize chamber starts with this seed")

    parser = _Parser(prog="nbodygeom", description="Geometry of n-body configurations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "jacobi": "standard Jacobi vectors of a configuration",
        "invariants": "congruence invariants I_k in both forms",
        "roots": "weighted root system of the masses",
        "canon": "canonical form, subrank and isotropy type",
        "strata": "number of subrank strata in dimension d",
        "collision": "kinematic distances to the binary collisions",
        "central": "all collinear central configurations",
        "quintic": "Euler's quintic for three bodies",
        "embed": "linear and boundary models of a shape",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "central":
            p.add_argument("--masses", type=_parse_masses, help="comma-separated masses")
            p.add_argument("--n", type=int, help="number of bodies")
        if name == "strata":
            p.add_argument("--d", type=int, help="spatial dimension")
    return parser


def _load(args) -> InputDocument:
    if args.command == "strata":
        return InputDocument(masses=[])
    if args.command == "central" and (args.masses is not None or args.n is not None):
        masses = args.masses
        if masses is None:
            masses = [1.0] * args.n
        if args.n is not None and args.n != len(masses):
            raise InputError([f"--n {args.n} disagrees with {len(masses)} masses"])
        return validate({"masses": masses})
    return parse_input(args.input)


def _error_doc(kind, messages, command=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "error": {"type": kind, "messages": list(messages)},
    }


def _emit(text, path, stream):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stream.write(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
    except UsageError as exc:
        stderr.write(f"{parser.prog}: error: {exc}\n")
        stderr.write(parser.format_usage())
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    echo = {"name": args.command, "argv": list(argv) if argv is not None else sys.argv[1:]}
    try:
        doc = _load(args)
        outcome = HANDLERS[args.command](doc, args)
    except UsageError as exc:
        stderr.write(f"{parser.prog} {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        stdout.write(dumps(_error_doc("validation", exc.errors, echo)) + "\n")
        return EXIT_INVALID
    except ConvergenceError as exc:
        stdout.write(dumps(_error_doc("convergence", [str(exc)], echo)) + "\n")
        return EXIT_NO_CONVERGENCE
    except GeometryError as exc:
        stdout.write(dumps(_error_doc("validation", [str(exc)], echo)) + "\n")
        return EXIT_INVALID

    if args.format == "csv":
        if outcome.table is None:
            stdout.write(dumps(_error_doc("validation", [f"{args.command} has no tabular output"], echo)) + "\n")
            return EXIT_INVALID
        text = to_csv(outcome.table)
    else:
        text = dumps({
            "schema_version": SCHEMA_VERSION,
            "command": echo,
            "results": outcome.results,
            "diagnostics": outcome.diagnostics,
        }) + "\n"
    _emit(text, args.output, stdout)
    return EXIT_OK


def main():
    sys.exit(run())
