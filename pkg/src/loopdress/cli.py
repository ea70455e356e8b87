"""Command-line interface.

Every subcommand except ``run`` executes one scenario operation on JSON input
files, prints a JSON summary, optionally writes the resulting object with
``--out`` and per-point tables with ``--emit-csv`` (a PNG figure is rendered
next to the CSV).  Settings come from defaults, then the context stored in
the first input file, then LOOPDRESS_* environment variables, then flags.

Exit codes: 0 success, 1 failed assertion or numerical error, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import LoopDressError, SchemaError
from .factorization import DressingElement, ExtendedFraming
from .loops import LoopElement
from .scenario import (
    EXIT_ASSERT,
    EXIT_OK,
    EXIT_SCHEMA,
    OPS,
    Session,
    _grid_from_spec,
    _load_file,
    emit_table,
    jsonable,
    make_context,
    resolve_settings,
    run_scenario,
)

# subcommand -> (operation, [(flag, parameter, kind)]); kind "file" loads JSON, others are literals
COMMANDS = {
    "check": ("check", [("--x", "x", "file"), ("--loop", "loop", "file")]),
    "symes": ("symes", [("--eta", "eta", "file"), ("--grid", "grid", "grid"), ("--h", "h", float)]),
    "vacuum": ("vacuum", [("--A", "A", "file"), ("--grid", "grid", "grid"), ("--h", "h", float)]),
    "dress": ("dress", [("--g", "g", "file"), ("--framing", "framing", "file"), ("--h", "h", float)]),
    "lax": ("lax", [("--seed-loop", "seed", "file"), ("--grid", "grid", "grid"), ("--d", "d", int),
                    ("--compare", "compare", "flag")]),
    "ft-test": ("ft-test", [("--g", "g", "file"), ("--A", "A", "file"), ("--d", "d", int)]),
    "normalize": ("normalize", [("--X", "X", "file")]),
    "untangle": ("untangle", [("--eta", "eta", "file")]),
    "stab": ("stab", [("--g", "g", "file"), ("--A", "A", "file"), ("--cross-check", "cross_check", "flag")]),
    "flow": ("flow", [("--g", "g", "file"), ("--zeta", "zeta", "file"), ("--A", "A", "file"),
                      ("--t", "t", float), ("--pole-order", "pole_order", int)]),
    "rank-probe": ("rank-probe", [("--g", "g", "file"), ("--A", "A", "file"), ("--mmax", "mmax", int)]),
    "uniton": ("uniton", [("--eta", "eta", "file")]),
}


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--algebra", default=default, help="preset name (su2, su3_k2, su3_k3, sl2_untwisted)")
    parser.add_argument("--eps", type=float, default=default, help="inner radius of the annulus")
    parser.add_argument("--trunc", type=int, default=default, help="Laurent truncation N")
    parser.add_argument("--tol", type=float, default=default, help="symmetry tolerance")
    parser.add_argument("--seed", type=int, default=default, help="random seed")
    parser.add_argument("--emit-csv", default=default, metavar="PATH",
                        help="write per-point table as CSV (and a PNG alongside)")


def build_parser():
    p = argparse.ArgumentParser(prog="loopdress", description="Loop-group factorization and dressing toolkit",
                                allow_abbrev=False)
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, params) in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run the {name} operation", allow_abbrev=False)
        _global_flags(sp, suppress=True)
        for flag, dest, kind in params:
            if kind == "flag":
                sp.add_argument(flag, dest="p_" + dest, action="store_true")
            elif kind in ("file", "grid"):
                sp.add_argument(flag, dest="p_" + dest, metavar="PATH" if kind == "file" else "GRID")
            else:
                sp.add_argument(flag, dest="p_" + dest, type=kind)
        sp.add_argument("--out", help="write the resulting object as JSON")
    lp = sub.add_parser("loop", help="loop utilities", allow_abbrev=False)
    _global_flags(lp, suppress=True)
    lp.add_argument("action", choices=["check"])
    lp.add_argument("path", help="loop JSON file")
    rp = sub.add_parser("run", help="run a scenario file", allow_abbrev=False)
    _global_flags(rp, suppress=True)
    rp.add_argument("scenario", help="scenario YAML path, or the name of a bundled scenario")
    rp.add_argument("--report", help="write the JSON report here (CSV/PNG files go next to it)")
    return p


def _file_settings(paths):
    """Context stored in the first input file that carries one."""
    for path in paths:
        try:
            doc = io.read_json(path)
        except (OSError, SchemaError):
            continue
        if not isinstance(doc, dict):
            continue
        ctx_doc = doc.get("context") or (doc.get("loop") or {}).get("context")
        if ctx_doc:
            alg = ctx_doc["algebra"]
            return {"algebra": alg.get("name") if alg.get("name") in ("su2", "su3_k2", "su3_k3", "sl2_untwisted")
                    else alg, "eps": ctx_doc.get("eps"), "trunc": ctx_doc.get("trunc"), "tol": ctx_doc.get("tol"),
                    "outer": ctx_doc.get("outer", 1.0)}
    return {}


def _parse_grid(text):
    """A JSON grid file, or "radius,resolution[,h]"."""
    if Path(text).is_file():
        doc = io.read_json(text)
        if isinstance(doc, dict) and "format" in doc:
            return io.grid_from_doc(doc), None
        return _grid_from_spec(doc)
    parts = text.split(",")
    try:
        spec = {"radius": float(parts[0]), "resolution": int(parts[1]) if len(parts) > 1 else 1}
        if len(parts) > 2:
            spec["h"] = float(parts[2])
    except ValueError:
        raise SchemaError(f"grid {text!r} is neither a file nor radius,resolution[,h]") from None
    return _grid_from_spec(spec)


def _serialize(value):
    if isinstance(value, ExtendedFraming):
        return io.framing_to_json(value)
    if isinstance(value, DressingElement):
        return io.dressing_to_json(value)
    if isinstance(value, LoopElement):
        return io.loop_to_json(value)
    if isinstance(value, np.ndarray):
        return io.matrix_doc(value)
    return None


def _flags(args):
    return {k: getattr(args, k, None) for k in ("algebra", "eps", "trunc", "tol", "seed")}


def _run_op(args):
    op, params = COMMANDS[args.command]
    files = [getattr(args, "p_" + dest) for _, dest, kind in params if kind == "file" and getattr(args, "p_" + dest)]
    settings = resolve_settings(_file_settings(files), _flags(args))
    ctx = make_context(settings)
    grid, h = _grid_from_spec(None)
    step = {}
    for flag, dest, kind in params:
        val = getattr(args, "p_" + dest)
        if val is None or val is False:
            continue
        if kind == "file":
            step[dest] = _load_file(ctx, val, Path("."))
        elif kind == "grid":
            grid, h = _parse_grid(val)
        else:
            step[dest] = val
    for key in OPS[op].required:
        if key not in step:
            raise SchemaError(f"{args.command}: missing --{key}")
    sess = Session(ctx, np.random.default_rng(int(settings["seed"])), grid, step.pop("h", h))
    out = OPS[op].func(sess, step)
    print(json.dumps({"op": op, "summary": jsonable(out.summary)}, indent=1, sort_keys=True))
    if getattr(args, "out", None):
        doc = _serialize(out.value)
        if doc is None:
            raise SchemaError(f"{args.command} produces no storable object")
        io.write_json(args.out, doc)
    csv_path = getattr(args, "emit_csv", None)
    if csv_path:
        emit_table(csv_path, out.rows, out.plot, args.command)
    return EXIT_OK


def _run_loop_check(args):
    settings = resolve_settings(_file_settings([args.path]), _flags(args))
    ctx = make_context(settings)
    x = io.loop_from_json(io.read_json(args.path), ctx, check_twist=False)
    from .loops import check_symmetries

    print(json.dumps(jsonable(check_symmetries(x).to_dict()), indent=1, sort_keys=True))
    return EXIT_OK


def _run_scenario(args):
    path = Path(args.scenario)
    if not path.exists():
        from .scenario import bundled_scenario

        path = bundled_scenario(args.scenario)
    report = args.report
    if report is None and getattr(args, "emit_csv", None):
        report = Path(args.emit_csv).with_suffix(".json")
    result = run_scenario(path, _flags(args), report)
    print(json.dumps(result.report, indent=1, sort_keys=True))
    for c in result.report["assertions"]:
        if not c["passed"]:
            print(f"assertion failed: {c['value']} {c['comparator']} {c['bound']} (actual {c['actual']})",
                  file=sys.stderr)
    for e in result.report["errors"]:
        print(f"error: {e}", file=sys.stderr)
    return result.exit_code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run_scenario(args)
        if args.command == "loop":
            return _run_loop_check(args)
        return _run_op(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except LoopDressError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
