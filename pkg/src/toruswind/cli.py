"""Command-line interface.

Every subcommand writes one JSON result document (``"schema": 1``) to stdout
or ``--out`` and exits with

    0  success
    2  validation error (bad expression, bad option, open curve, ...)
    3  numerical failure (field zero on the curve, non-convergence, ...)
    4  assertion failure (e.g. theorem-check index != 1)

Options may also come from a JSON file given with ``--config``; command-line
flags override the file, which overrides built-in defaults. Relative output
paths are resolved against ``$TORUSWIND_OUTPUT_DIR`` when it is set.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .expr import DomainError, ExprError, parse_pair
from .field import (
    PlaneVectorField,
    conjugacy_residual,
    example_field,
    field_from_spec,
    map_from_spec,
    pushforward,
    Diffeo2,
)
from .firstintegral import (
    FirstIntegralGrid,
    GradientSpec,
    Rect,
    build_first_integral,
    flow_drift,
    residual_X_of_h,
)
from .geometry import GeometryError, curve_from_expr
from .index import index_quadrature, index_unwrap
from .svg import emit_svg
from .uniformization import THEOREM_SWEEP, image_curve, theorem_check

SCHEMA = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_ASSERTION = 0, 2, 3, 4
OUTPUT_DIR_ENV = "TORUSWIND_OUTPUT_DIR"

EXPRESSION_HELP = """\
expressions: numbers, pi, x, y (fields and maps), t (curves), + - * / ^,
  sin cos tan atan2 exp log sqrt abs. Pairs are written "(first, second)".
fields: a pair expression in x, y, or one of constant(a,b), radial, rotation,
  example(psi,a,b), theorem-pushforward(p,q).
maps: a pair expression in x, y, "identity" or phi(p,q).
curves: a pair expression in t over [0, 2*pi].
first-integral CSV columns: x, y, h (one row per grid node).
"""

DEFAULTS = {
    "index": {"field": None, "curve": None, "snap_tol": 1e-3, "oracle_tol": 1e-6, "samples": 4096, "out": None, "svg": None},
    "theorem-check": {"p": None, "q": None, "sweep": None, "oracle_tol": 1e-6, "snap_tol": 1e-6, "out": None, "svg": None},
    "corollary-check": {"field": None, "curve": None, "snap_tol": 1e-3, "oracle_tol": 1e-6, "out": None},
    "first-integral": {
        "psi": None,
        "a": None,
        "b": None,
        "domain": "0,1,0,1",
        "res": 64,
        "anchor": None,
        "curl_tol": 1e-5,
        "residual_tol": 1e-4,
        "flow_time": 0.25,
        "out": None,
        "csv": None,
        "svg": None,
    },
    "pushforward": {"field": None, "map": None, "inverse": None, "points": None, "conjugate_to": None, "domain": "0,1,0,1", "res": 32, "out": None},
    "plot": {"kind": None, "field": None, "curve": None, "psi": None, "a": None, "b": None, "p": None, "q": None, "domain": "-1,1,-1,1", "res": 16, "svg": None, "out": None},
}
TOLERANCES = ("snap_tol", "oracle_tol", "curl_tol", "residual_tol", "flow_time")


class ValidationError(ValueError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


class AssertionFailure(Exception):
    def __init__(self, message: str, document: dict):
        super().__init__(message)
        self.document = document


# JSON ------------------------------------------------------------------------


def _num(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with floats printed to 17 significant digits, key order preserved."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _output_path(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# Config ----------------------------------------------------------------------


def _effective_config(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ValidationError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key == "command":
                continue
            if key not in cfg:
                raise ValidationError(f"unknown config key {key!r} for {command}")
            cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key in TOLERANCES:
        if key in cfg and cfg[key] is not None and not float(cfg[key]) > 0:
            raise ValidationError(f"{key} must be positive")
    return cfg


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ValidationError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _as_list(value):
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _parse_points(text: str) -> np.ndarray:
    try:
        pts = [[float(c) for c in chunk.split(",")] for chunk in text.split(";") if chunk.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad point list {text!r}") from exc
    if not pts or any(len(p) != 2 for p in pts):
        raise ValidationError(f"points must be 'x,y;x,y;...', got {text!r}")
    return np.array(pts)


def _parse_sweep(value) -> list[tuple[int, int]]:
    if value in (True, "default", ""):
        return list(THEOREM_SWEEP)
    if isinstance(value, list):
        return [tuple(int(c) for c in pair) for pair in value]
    return [tuple(int(c) for c in chunk.split(",")) for chunk in str(value).split(";") if chunk.strip()]


def _validate_expressions(cfg: dict) -> None:
    """Parse every expression-valued option before any computation."""
    try:
        for f in _as_list(cfg.get("field")):
            field_from_spec(f)
        for c in _as_list(cfg.get("curve")):
            parse_pair(c, variables=("t",))
        for key in ("psi", "map"):
            if cfg.get(key) is not None:
                map_from_spec(cfg[key])
        if cfg.get("inverse") is not None:
            parse_pair(cfg["inverse"], variables=("x", "y"))
        if cfg.get("conjugate_to") is not None:
            field_from_spec(cfg["conjugate_to"])
        if cfg.get("domain") is not None:
            Rect.parse(cfg["domain"])
    except (ExprError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc


def _document(command: str, cfg: dict, result: dict, status: str = "ok", **extra) -> dict:
    doc = {"schema": SCHEMA, "command": command, "version": __version__, "status": status, "config": dict(sorted(cfg.items())), "result": result}
    doc.update(extra)
    return doc


# Commands --------------------------------------------------------------------


def _index_pair(X: PlaneVectorField, curve_src: str, cfg: dict) -> dict:
    curve = curve_from_expr(curve_src, sample_count=int(cfg.get("samples", 4096)))
    try:
        curve.check()
    except GeometryError as exc:
        raise ValidationError(str(exc)) from exc
    quad = index_quadrature(X, curve, snap_tol=float(cfg["snap_tol"]))
    unwrap = index_unwrap(X, curve, snap_tol=float(cfg["snap_tol"]))
    return {
        "curve": curve_src,
        "snapped": quad.snapped,
        "raw": quad.raw,
        "snap_residual": quad.snap_residual,
        "oracle_delta": abs(quad.raw - unwrap.raw),
        "quadrature": quad.as_dict(),
        "unwrap": unwrap.as_dict(),
    }


def cmd_index(cfg: dict) -> dict:
    _require(cfg, "field", "curve")
    X = field_from_spec(cfg["field"])
    res = _index_pair(X, cfg["curve"], cfg)
    doc = _document("index", cfg, res)
    if cfg.get("svg"):
        curve = curve_from_expr(cfg["curve"])
        _, pts = curve.sample(256, endpoint=True)
        base = pts[::8]
        u, v = X(base[:, 0], base[:, 1])
        emit_svg(_output_path(cfg["svg"]), curves=[pts], quiver=(base[:, 0], base[:, 1], u, v), title=f"index {res['snapped']}: {cfg['field']}")
    if res["oracle_delta"] >= float(cfg["oracle_tol"]):
        raise AssertionFailure(f"quadrature and unwrap disagree by {res['oracle_delta']:.3e}", doc)
    return doc


def cmd_theorem_check(cfg: dict) -> dict:
    if cfg.get("sweep") is not None:
        cases = _parse_sweep(cfg["sweep"])
    else:
        _require(cfg, "p", "q")
        cases = [(int(cfg["p"]), int(cfg["q"]))]
    for p, q in cases:
        if (p, q) == (0, 0):
            raise ValidationError("curve type (0, 0) is not allowed")
    checks = [theorem_check(p, q, oracle_tol=float(cfg["oracle_tol"])) for p, q in cases]
    rows = [c.as_dict() for c in checks]
    failed = [c for c in checks if c.snapped != 1 or c.snap_residual >= float(cfg["snap_tol"])]
    result = rows[0] if cfg.get("sweep") is None else {"cases": rows, "all_passed": not failed}
    doc = _document("theorem-check", cfg, result, "ok" if not failed else "assertion_failed")
    if cfg.get("svg"):
        curves = [image_curve(c.p, c.q).sample(512, endpoint=True)[1] for c in checks]
        emit_svg(_output_path(cfg["svg"]), curves=curves, title="phi o Gamma for " + ", ".join(f"({c.p},{c.q})" for c in checks))
    if failed:
        raise AssertionFailure("index differs from 1 for " + ", ".join(f"({c.p},{c.q})" for c in failed), doc)
    return doc


def cmd_corollary_check(cfg: dict) -> dict:
    _require(cfg, "field", "curve")
    X = field_from_spec(cfg["field"])
    rows = [_index_pair(X, c, cfg) for c in _as_list(cfg["curve"])]
    holds = all(r["snapped"] == 1 for r in rows)
    result = {"curves": rows, "necessary_condition_holds": holds}
    doc = _document("corollary-check", cfg, result, "ok" if holds else "assertion_failed")
    if not holds:
        raise AssertionFailure("index along some curve differs from 1; the field cannot be uniformized this way", doc)
    return doc


def cmd_first_integral(cfg: dict) -> dict:
    _require(cfg, "psi", "a", "b")
    psi = map_from_spec(cfg["psi"])
    a, b = float(cfg["a"]), float(cfg["b"])
    domain = Rect.parse(cfg["domain"])
    res = int(cfg["res"])
    anchor = None if cfg.get("anchor") is None else tuple(float(c) for c in str(cfg["anchor"]).split(","))
    spec = GradientSpec(psi, a, b)
    h = build_first_integral(spec, domain, res, anchor=anchor, curl_tol=float(cfg["curl_tol"]))
    X = example_field(psi, a, b)
    residual = residual_X_of_h(X, h)
    cx, cy = 0.5 * (domain.x0 + domain.x1), 0.5 * (domain.y0 + domain.y1)
    drift = flow_drift(X, h, (cx, cy), float(cfg["flow_time"]))
    result = {
        "integrability_residual": h.integrability_residual,
        "path_disagreement": h.path_disagreement,
        "anchor_node": [float(h.xs[h.anchor[0]]), float(h.ys[h.anchor[1]])],
        "residual_X_of_h": residual,
        "flow_check": {"start": list(drift.start), "end": list(drift.end), "time": drift.time, "drift": drift.drift, "rate": drift.rate},
        "h_min": float(h.values.min()),
        "h_max": float(h.values.max()),
    }
    assumptions = ["the flow of X is Hausdorff (assumed, not checked)"]
    ok = residual < float(cfg["residual_tol"])
    doc = _document("first-integral", cfg, result, "ok" if ok else "assertion_failed", assumptions=assumptions)
    if cfg.get("csv"):
        _write_csv(_output_path(cfg["csv"]), h)
    if cfg.get("svg"):
        levels = np.linspace(h.values.min(), h.values.max(), 14)[1:-1]
        emit_svg(_output_path(cfg["svg"]), contours=(h.xs, h.ys, h.values, levels), title=f"level sets of h for psi={cfg['psi']}")
    if not ok:
        raise AssertionFailure(f"X(h) residual {residual:.3e} exceeds {cfg['residual_tol']}", doc)
    return doc


def _write_csv(path: Path, h: FirstIntegralGrid) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "h"])
        for i, x in enumerate(h.xs):
            for j, y in enumerate(h.ys):
                writer.writerow([_num(float(x)), _num(float(y)), _num(float(h.values[i, j]))])


def cmd_pushforward(cfg: dict) -> dict:
    _require(cfg, "field", "map", "points")
    X = field_from_spec(cfg["field"])
    d = map_from_spec(cfg["map"])
    if cfg.get("inverse") is not None:
        d = Diffeo2.from_expr(cfg["map"], inverse=cfg["inverse"])
    pts = _parse_points(cfg["points"])
    Y = pushforward(X, d)
    u, v = Y(pts[:, 0], pts[:, 1])
    result = {"points": [{"at": list(p), "value": [float(a), float(b)]} for p, a, b in zip(pts, u, v)]}
    if cfg.get("conjugate_to") is not None:
        Z = field_from_spec(cfg["conjugate_to"])
        xs, ys = Rect.parse(cfg["domain"]).nodes(int(cfg["res"]))
        grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        result["conjugacy_residual"] = conjugacy_residual(X, Z, d, grid)
    return _document("pushforward", cfg, result)


def cmd_plot(cfg: dict) -> dict:
    _require(cfg, "kind", "svg")
    kind = cfg["kind"]
    path = _output_path(cfg["svg"])
    domain = Rect.parse(cfg["domain"])
    res = int(cfg["res"])
    if kind == "curve":
        _require(cfg, "curve")
        curves = [curve_from_expr(c).sample(512, endpoint=True)[1] for c in _as_list(cfg["curve"])]
        emit_svg(path, curves=curves, title="curves")
    elif kind == "quiver":
        _require(cfg, "field")
        X = field_from_spec(cfg["field"])
        xs, ys = domain.nodes(res)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        u, v = X(gx, gy)
        emit_svg(path, quiver=(gx, gy, np.broadcast_to(u, gx.shape), np.broadcast_to(v, gx.shape)), title=f"field {cfg['field']}")
    elif kind == "contour":
        _require(cfg, "psi", "a", "b")
        h = build_first_integral(GradientSpec(map_from_spec(cfg["psi"]), float(cfg["a"]), float(cfg["b"])), domain, res)
        levels = np.linspace(h.values.min(), h.values.max(), 14)[1:-1]
        emit_svg(path, contours=(h.xs, h.ys, h.values, levels), title=f"level sets of h for psi={cfg['psi']}")
    elif kind == "theorem":
        _require(cfg, "p", "q")
        curve = image_curve(int(cfg["p"]), int(cfg["q"]))
        emit_svg(path, curves=[curve.sample(512, endpoint=True)[1]], title=f"phi o Gamma for ({cfg['p']},{cfg['q']})")
    else:
        raise ValidationError(f"unknown plot kind {kind!r}; use curve, quiver, contour or theorem")
    return _document("plot", cfg, {"svg": cfg["svg"]})


COMMANDS = {
    "index": cmd_index,
    "theorem-check": cmd_theorem_check,
    "corollary-check": cmd_corollary_check,
    "first-integral": cmd_first_integral,
    "pushforward": cmd_pushforward,
    "plot": cmd_plot,
}


# Parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="toruswind",
        description="Winding-number indices, torus uniformization checks and first integrals.",
        epilog=EXPRESSION_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, epilog=EXPRESSION_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="JSON file with options (flags override it)")
        p.add_argument("--out", help="write the JSON result here instead of stdout")
        return p

    p = add("index", "index of a field along a closed curve (quadrature and unwrap oracle)")
    p.add_argument("--field", help="field spec")
    p.add_argument("--curve", help="curve pair expression in t")
    p.add_argument("--samples", type=int, help="curve sample count for closedness checks")
    p.add_argument("--snap-tol", type=float)
    p.add_argument("--oracle-tol", type=float)
    p.add_argument("--svg", help="figure with the curve and the field along it")

    p = add("theorem-check", "index of the pushed-forward constant field along phi o Gamma")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--sweep", nargs="?", const="default", help="'p,q;p,q;...' or no value for the standard list")
    p.add_argument("--snap-tol", type=float)
    p.add_argument("--oracle-tol", type=float)
    p.add_argument("--svg", help="figure of the image curve(s)")

    p = add("corollary-check", "test the index-equals-1 necessary condition along curves")
    p.add_argument("--field", help="field spec")
    p.add_argument("--curve", action="append", help="curve pair expression in t (repeatable)")
    p.add_argument("--snap-tol", type=float)
    p.add_argument("--oracle-tol", type=float)

    p = add("first-integral", "build h from psi=(f,g) and slope (a,b); export CSV/SVG")
    p.add_argument("--psi", help="map spec")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--domain", help="x0,x1,y0,y1")
    p.add_argument("--res", type=int, help="grid intervals per axis")
    p.add_argument("--anchor", help="x,y of the node where h = 0")
    p.add_argument("--curl-tol", type=float)
    p.add_argument("--residual-tol", type=float)
    p.add_argument("--flow-time", type=float)
    p.add_argument("--csv", help="grid export (columns x, y, h)")
    p.add_argument("--svg", help="contour plot of h")

    p = add("pushforward", "evaluate d(map) X map^-1 at points, optional conjugacy residual")
    p.add_argument("--field", help="field spec")
    p.add_argument("--map", help="map spec")
    p.add_argument("--inverse", help="closed-form inverse pair expression (else Newton)")
    p.add_argument("--points", help="target points 'x,y;x,y;...'")
    p.add_argument("--conjugate-to", help="field Z for max |J X - Z o map| over --domain/--res")
    p.add_argument("--domain")
    p.add_argument("--res", type=int)

    p = add("plot", "SVG figures")
    p.add_argument("--kind", choices=["curve", "quiver", "contour", "theorem"])
    p.add_argument("--field")
    p.add_argument("--curve", action="append")
    p.add_argument("--psi")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--domain")
    p.add_argument("--res", type=int)
    p.add_argument("--svg")
    return parser


def _error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(dumps({"schema": SCHEMA, "error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc) + "\n"
    path = _output_path(out)
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except ValidationError as exc:
        return _error("usage", str(exc), EXIT_VALIDATION)
    command = args.command
    try:
        cfg = _effective_config(command, args)
        _validate_expressions(cfg)
        doc = COMMANDS[command](cfg)
    except AssertionFailure as exc:
        _emit(exc.document, cfg.get("out"))
        return _error("assertion", str(exc), EXIT_ASSERTION)
    except (ArithmeticError, DomainError) as exc:
        return _error(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except (ValidationError, ExprError, GeometryError, ValueError, TypeError) as exc:
        return _error(type(exc).__name__, str(exc), EXIT_VALIDATION)
    _emit(doc, cfg.get("out"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
