"""Scenario files: a YAML document naming inputs, a pipeline of operations and
assertions on their results.

Layout::

    name: vacuum_su2
    algebra: su2                 # preset name or {n, k, Q}
    eps: 0.5
    trunc: 24
    tol: 1.0e-8
    seed: 0
    grid: {radius: 1.0, resolution: 1, h: 1.0e-3}
    inputs:
      A: {real: [[0, 1], [-1, 0]]}
      eta: {loop: {-1: A}}
    pipeline:
      - {op: vacuum, A: A, out: F}
      - {op: residuals, framing: F, out: res}
    assert:
      - {value: res.flatness_residual, lt: 1.0e-6}

Input kinds: ``real`` (nested real lists), ``matrix`` ([re, im] pairs),
``diag``, ``loop`` (mode -> input name or matrix literal), ``random_loop``,
``dressing`` ({constant: ...} or {generator: ...}), ``grid`` and ``file``
(any JSON document written by this package).

Parameters of an operation named in its ``refs`` are looked up among the
inputs and earlier outputs; the rest are literals.  Every CLI subcommand is
an operation here, so anything the CLI does can be scripted.
"""
from __future__ import annotations

import csv
import datetime
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import io
from .errors import ConfigurationError, LoopDressError, SchemaError
from .factorization import (
    DressingElement,
    dress_framing,
    factor_group,
    framing_residuals,
    gauge_equivalent,
    patch_grid,
    symes_framing,
    vacuum_framing_grid,
)
from .finite_type import (
    AKSStructure,
    finite_type_witness,
    integrate_killing_field,
    killing_field_via_symes,
    spectral_invariants,
)
from .flows import FlowGenerator, flow_apply, orbit_rank_probe
from .lie import bracket, classify_element, frob, sigma
from .loops import LoopContext, LoopElement, check_symmetries
from .orbits import normalize_semisimple, stabilizer_membership, untangle_to_vacuum
from .unitons import uniton_classify

ENV_PREFIX = "LOOPDRESS_"
DEFAULTS = {"algebra": "su2", "eps": 0.5, "trunc": 24, "tol": 1e-8, "seed": 0}
SETTING_TYPES = {"algebra": str, "eps": float, "trunc": int, "tol": float, "seed": int}
TOP_KEYS = {"name", "algebra", "eps", "trunc", "tol", "seed", "outer", "grid", "inputs", "pipeline", "assert"}
COMPARATORS = {"lt": lambda a, b: a < b, "le": lambda a, b: a <= b, "gt": lambda a, b: a > b,
               "ge": lambda a, b: a >= b, "eq": lambda a, b: a == b}

EXIT_OK, EXIT_ASSERT, EXIT_SCHEMA = 0, 1, 2


# -- settings ------------------------------------------------------------------------

def env_overrides(environ=None):
    """Settings from LOOPDRESS_EPS, LOOPDRESS_TRUNC, LOOPDRESS_TOL, LOOPDRESS_SEED, LOOPDRESS_ALGEBRA."""
    environ = os.environ if environ is None else environ
    out = {}
    for key, typ in SETTING_TYPES.items():
        raw = environ.get(ENV_PREFIX + key.upper())
        if raw is None or raw == "":
            continue
        try:
            out[key] = typ(raw)
        except ValueError:
            raise ConfigurationError(f"{ENV_PREFIX}{key.upper()}={raw!r} is not a valid {typ.__name__}") from None
    return out


def resolve_settings(file_values=None, flags=None, environ=None):
    """Defaults < scenario file < environment < command-line flags."""
    out = dict(DEFAULTS)
    for layer in (file_values or {}, env_overrides(environ), flags or {}):
        out.update({k: v for k, v in layer.items() if v is not None})
    return out


def make_context(settings):
    alg = io.algebra_from_json(settings["algebra"])
    return LoopContext(alg, float(settings["eps"]), int(settings["trunc"]), float(settings["tol"]),
                       float(settings.get("outer", 1.0)))


# -- JSON-safe summaries ---------------------------------------------------------------

def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if v is None or isinstance(v, str):
        return v
    raise TypeError(f"cannot serialize {type(v).__name__}")


# -- operations ------------------------------------------------------------------------

@dataclass
class StepOutput:
    value: object
    summary: dict
    rows: list = field(default_factory=list)
    plot: str | None = None


@dataclass
class Session:
    """Shared state of one run: context, rng, default grid."""

    ctx: LoopContext
    rng: np.random.Generator
    grid: tuple
    h: float | None = None


def _grid_param(sess, step):
    if "grid" in step:
        return step["grid"]
    return sess.grid


def _framing_output(F, h):
    summary = {"points": len(F.z_grid), "kind": F.meta.get("kind")}
    rows = []
    if h:
        rep = framing_residuals(F, h)
        summary.update(extended_residual=rep.extended_residual, flatness_residual=rep.flatness_residual,
                       centers=len(rep.per_center))
        rows = [{"z_re": r["z"].real, "z_im": r["z"].imag, "extended": r["extended"],
                 "flatness": r["flatness"]} for r in rep.per_center]
    return StepOutput(F, summary, rows, "residuals" if rows else None)


def op_check(sess, step):
    alg = sess.ctx.algebra
    summary = {"algebra": alg.name, "n": alg.n, "k": alg.k}
    if "x" in step:
        x = step["x"]
        cls = classify_element(x)
        summary.update(kind=cls.kind, regular=cls.regular, centralizer_dim=cls.centralizer_dim,
                       sigma_commutator=frob(bracket(x, sigma(x))),
                       grades={str(l): frob(alg.grade_project(x, l)) for l in range(alg.k)})
    if "loop" in step:
        summary.update(check_symmetries(step["loop"]).to_dict())
    return StepOutput(None, summary)


def op_vacuum(sess, step):
    F = vacuum_framing_grid(sess.ctx, step["A"], _grid_param(sess, step), h=sess.h)
    return _framing_output(F, step.get("h", sess.h))


def op_symes(sess, step):
    F = symes_framing(step["eta"], _grid_param(sess, step), polish=step.get("polish", True), h=sess.h)
    return _framing_output(F, step.get("h", sess.h))


def op_dress(sess, step):
    F = dress_framing(step["g"], step["framing"], polish=step.get("polish", True))
    return _framing_output(F, step.get("h", sess.h))


def op_residuals(sess, step):
    F = step["framing"]
    out = _framing_output(F, step.get("h") or F.meta.get("h") or sess.h)
    return StepOutput(out.summary, out.summary, out.rows, out.plot)


def op_gauge(sess, step):
    res = gauge_equivalent(step["framing"], step["other"], tol=float(step.get("tol", 1e-6)))
    summary = {"equivalent": res.equivalent, "leakage": res.leakage, "unitarity": res.unitarity}
    return StepOutput(res, summary)


def op_factor(sess, step):
    X = step["X"].with_flavor("group")
    res = factor_group(X, polish=step.get("polish", True))
    summary = {"product_residual": res.product_residual, "reality_residual": res.reality_residual,
               "method": res.method}
    return StepOutput(res, summary)


def op_lax(sess, step):
    xi0 = step["seed"]
    d = int(step.get("d", 1))
    aks = AKSStructure(sess.ctx.algebra, d, step.get("variant", "derived"))
    grid = _grid_param(sess, step)
    kf = integrate_killing_field(xi0, aks, grid)
    spec = spectral_invariants(kf)
    summary = {"d": d, "points": len(kf.z_grid), "spectral_drift": spec.drift}
    rows = []
    if step.get("compare", False):
        other = killing_field_via_symes(xi0, aks, grid)
        diffs = {z: (kf(z) - other(z)).norm() for z in kf.z_grid}
        summary["route_difference"] = max(diffs.values())
        rows = [{"z_re": z.real, "z_im": z.imag, "route_difference": v} for z, v in diffs.items()]
    return StepOutput(kf, summary, rows)


def op_ft_test(sess, step):
    w = finite_type_witness(step["g"], step["A"], int(step.get("d", 1)))
    summary = {"feasible": w.feasible, "residual": w.residual, "obstruction_norm": frob(w.obstruction),
               "near_threshold": w.near_threshold}
    return StepOutput(w.xi, summary)


def op_normalize(sess, step):
    seed, b, trace = normalize_semisimple(sess.ctx.algebra, step["X"])
    A = seed.A
    summary = {"A": A, "b": b, "norm_X": frob(step["X"]), "norm_A": frob(A),
               "sigma_commutator": frob(bracket(A, sigma(A))), "iterations": len(trace.steps)}
    return StepOutput(A, summary)


def op_untangle(sess, step):
    res = untangle_to_vacuum(step["eta"])
    summary = {"commutator_residual": res.commutator_residual, "twist_residual": res.twist_residual,
               "radius": res.radius}
    return StepOutput(res.g, summary)


def op_stab(sess, step):
    res = stabilizer_membership(step["g"], step["A"], tol=float(step.get("tol", 1e-8)),
                                cross_check=bool(step.get("cross_check", False)))
    summary = {"member": res.member, "residual": res.residual, "variation": res.variation}
    if res.gauge is not None:
        summary.update(gauge_equivalent=res.gauge.equivalent, gauge_leakage=res.gauge.leakage)
    return StepOutput(res, summary)


def op_flow(sess, step):
    g = step["g"]
    if "zeta" in step:
        zeta = step["zeta"]
    else:
        zeta = FlowGenerator.random(sess.ctx.algebra, step["A"], int(step.get("pole_order", 1)), sess.rng)
    g_new = flow_apply(g, zeta, float(step.get("t", 0.5)))
    summary = {"t": float(step.get("t", 0.5)), "norm_change": (g_new.loop - g.loop).norm()}
    return StepOutput(g_new, summary)


def op_rank_probe(sess, step):
    res = orbit_rank_probe(step["g"], step["A"], int(step.get("mmax", 8)))
    summary = {"ranks": list(res.ranks), "finite_type": res.finite_type,
               "stabilized_at": res.stabilized_at(), "ambiguous": any(res.ambiguous)}
    rows = [{"m": m, "rank": r} for m, r in enumerate(res.ranks)]
    return StepOutput(res, summary, rows, "ranks")


def op_uniton(sess, step):
    v = uniton_classify(step["eta"])
    summary = {"verdict": v.verdict, "det_tail": {str(n): c for n, c in sorted(v.det_tail.items())},
               "det_tail_mass": v.det_tail_mass, "d_estimate": v.d_estimate,
               "band_collapse": {f"{z.real:g}{z.imag:+g}j": d for z, d in v.collapse.items()}}
    return StepOutput(v, summary)


@dataclass(frozen=True)
class OpSpec:
    func: object
    refs: tuple
    required: tuple


OPS = {
    "check": OpSpec(op_check, ("x", "loop"), ()),
    "vacuum": OpSpec(op_vacuum, ("A", "grid"), ("A",)),
    "symes": OpSpec(op_symes, ("eta", "grid"), ("eta",)),
    "dress": OpSpec(op_dress, ("g", "framing"), ("g", "framing")),
    "residuals": OpSpec(op_residuals, ("framing",), ("framing",)),
    "gauge": OpSpec(op_gauge, ("framing", "other"), ("framing", "other")),
    "factor": OpSpec(op_factor, ("X",), ("X",)),
    "lax": OpSpec(op_lax, ("seed", "grid"), ("seed",)),
    "ft-test": OpSpec(op_ft_test, ("g", "A"), ("g", "A")),
    "normalize": OpSpec(op_normalize, ("X",), ("X",)),
    "untangle": OpSpec(op_untangle, ("eta",), ("eta",)),
    "stab": OpSpec(op_stab, ("g", "A"), ("g", "A")),
    "flow": OpSpec(op_flow, ("g", "zeta", "A"), ("g",)),
    "rank-probe": OpSpec(op_rank_probe, ("g", "A"), ("g", "A")),
    "uniton": OpSpec(op_uniton, ("eta",), ("eta",)),
}


# -- inputs --------------------------------------------------------------------------------

def _matrix_literal(spec, n):
    if isinstance(spec, dict):
        if "real" in spec:
            m = np.array(spec["real"], dtype=complex)
        elif "matrix" in spec:
            m = io.matrix_from_json(spec["matrix"], n)
        elif "diag" in spec:
            m = np.diag(np.array(spec["diag"], dtype=complex))
        else:
            raise SchemaError(f"not a matrix literal: {sorted(spec)}")
    else:
        m = np.array(spec, dtype=complex)
    if m.shape != (n, n):
        raise SchemaError(f"matrix literal has shape {m.shape}, algebra expects {(n, n)}")
    return m


def _random_loop(ctx, rng, spec):
    """Random twisted algebra loop on the given modes, optionally scaled to unit l1 norm."""
    alg = ctx.algebra
    modes = spec.get("modes", [-1, 0, 1])
    terms = {}
    for m in modes:
        basis = alg.grade_basis(int(m))
        w = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        terms[int(m)] = np.tensordot(w, basis, axes=1)
    x = LoopElement.from_coeffs(ctx, terms, "algebra")
    scale = float(spec.get("scale", 1.0))
    total = float(np.sum(x.mode_norms()))
    return (scale / total) * x if spec.get("normalize", True) else scale * x


def _load_file(ctx, path, base):
    path = Path(path)
    if not path.is_absolute():
        path = base / path
    doc = io.read_json(path)
    if isinstance(doc, list):
        return io.matrix_from_json(doc, ctx.n)
    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt == "loopdress.matrix":
        return io.matrix_from_doc(doc, ctx.n)
    if fmt == "loopdress.loop":
        loop = io.loop_from_json(doc, ctx)
        return loop
    if fmt == "loopdress.dressing":
        return io.dressing_from_json(doc, ctx)
    if fmt == "loopdress.framing":
        return io.framing_from_json(doc, ctx)
    if fmt == "loopdress.grid" or (isinstance(doc, dict) and "radius" in doc):
        return io.grid_from_doc(doc)
    raise SchemaError(f"{path}: unrecognized document format {fmt!r}")


def build_input(ctx, rng, spec, env, base=Path(".")):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise SchemaError(f"input must be a mapping with exactly one kind, got {spec!r}")
    (kind, body), = spec.items()
    n = ctx.n
    if kind in ("real", "matrix", "diag"):
        return _matrix_literal(spec, n)
    if kind == "loop":
        terms = {}
        for mode, val in body.items():
            if isinstance(val, str):
                if val not in env:
                    raise SchemaError(f"loop coefficient refers to undefined input {val!r}")
                terms[int(mode)] = env[val]
            else:
                terms[int(mode)] = _matrix_literal(val, n)
        return LoopElement.from_coeffs(ctx, terms, "algebra")
    if kind == "random_loop":
        return _random_loop(ctx, rng, body or {})
    if kind == "dressing":
        if "constant" in body:
            b = env[body["constant"]] if isinstance(body["constant"], str) else _matrix_literal(body["constant"], n)
            return DressingElement.constant(ctx, b)
        if "generator" in body:
            rho = env.get(body["generator"])
            if rho is None:
                raise SchemaError(f"dressing generator refers to undefined input {body['generator']!r}")
            return DressingElement.from_generator(rho)
        if body.get("identity"):
            return DressingElement.identity(ctx)
        raise SchemaError("dressing input needs constant, generator or identity")
    if kind == "grid":
        return _grid_from_spec(body)[0]
    if kind == "file":
        return _load_file(ctx, body, base)
    raise SchemaError(f"unknown input kind {kind!r}")


def _grid_from_spec(spec):
    """(grid, h): polar grid, optionally expanded into 3x3 patches of spacing h."""
    if spec is None:
        return io.polar_grid(1.0, 1), None
    if isinstance(spec, list):
        return io.grid_from_doc(spec), None
    if not isinstance(spec, dict):
        raise SchemaError("grid must be a list of points or {radius, resolution, h}")
    if "points" in spec:
        centers = io.grid_from_doc(spec["points"])
    else:
        centers = io.polar_grid(float(spec.get("radius", 1.0)), int(spec.get("resolution", 1)))
    h = spec.get("h")
    if h is None:
        return centers, None
    return patch_grid(centers, float(h)), float(h)


# -- validation and execution -------------------------------------------------------------

def load_scenario(path):
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: malformed YAML ({exc})") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return validate(doc if doc is not None else {})


def validate(doc):
    """Structural checks done before anything runs; returns the document."""
    if not isinstance(doc, dict):
        raise SchemaError("scenario must be a mapping")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown top-level keys {sorted(unknown)}")
    inputs = doc.get("inputs") or {}
    pipeline = doc.get("pipeline") or []
    asserts = doc.get("assert") or []
    if not isinstance(inputs, dict) or not isinstance(pipeline, list) or not isinstance(asserts, list):
        raise SchemaError("inputs must be a mapping; pipeline and assert must be lists")
    defined = set()
    for name, spec in inputs.items():
        if isinstance(spec, dict) and "loop" in spec and isinstance(spec["loop"], dict):
            for ref in spec["loop"].values():
                if isinstance(ref, str) and ref not in defined:
                    raise SchemaError(f"input {name!r} refers to undefined input {ref!r}")
        if isinstance(spec, dict) and "dressing" in spec and isinstance(spec["dressing"], dict):
            for ref in spec["dressing"].values():
                if isinstance(ref, str) and ref not in defined:
                    raise SchemaError(f"input {name!r} refers to undefined input {ref!r}")
        defined.add(name)
    outputs = set()
    for i, step in enumerate(pipeline):
        if not isinstance(step, dict) or "op" not in step:
            raise SchemaError(f"step {i} must be a mapping with an 'op' key")
        op = step["op"]
        if op not in OPS:
            raise SchemaError(f"step {i}: unknown operation {op!r}; known: {sorted(OPS)}")
        spec = OPS[op]
        for key in spec.required:
            if key not in step:
                raise SchemaError(f"step {i} ({op}): missing parameter {key!r}")
        for key in spec.refs:
            if key in step and isinstance(step[key], str) and step[key] not in defined:
                raise SchemaError(f"step {i} ({op}): {key} refers to undefined input {step[key]!r}")
        if "out" in step:
            defined.add(step["out"])
            outputs.add(step["out"])
    for j, a in enumerate(asserts):
        if not isinstance(a, dict) or "value" not in a:
            raise SchemaError(f"assertion {j} needs a 'value'")
        head = str(a["value"]).split(".")[0]
        if head not in outputs:
            raise SchemaError(f"assertion {j} refers to undefined output {head!r}")
        if not (set(a) - {"value"}) <= set(COMPARATORS) | {"true", "false"}:
            raise SchemaError(f"assertion {j}: unknown comparator in {sorted(a)}")
    return doc


def _lookup(summaries, path):
    parts = str(path).split(".")
    cur = summaries[parts[0]]
    for p in parts[1:]:
        if isinstance(cur, dict) and p in cur:
            cur = cur[p]
        elif isinstance(cur, list) and p.lstrip("-").isdigit():
            cur = cur[int(p)]
        else:
            raise SchemaError(f"{path}: no field {p!r}")
    return cur


def _evaluate_assertion(a, summaries):
    actual = _lookup(summaries, a["value"])
    results = []
    for cmp, bound in a.items():
        if cmp == "value":
            continue
        if cmp == "true":
            ok = bool(actual) is bool(bound)
        elif cmp == "false":
            ok = bool(actual) is not bool(bound)
        else:
            ok = actual is not None and COMPARATORS[cmp](actual, bound)
        results.append({"value": a["value"], "comparator": cmp, "bound": bound,
                        "actual": actual, "passed": bool(ok)})
    return results


def write_csv(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = list(rows[0]) if rows else []
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in r.items()})


def emit_table(path, rows, plot_kind=None, title=""):
    """CSV rows plus, when a plot kind is given, a PNG with the same stem."""
    write_csv(path, rows)
    if plot_kind and rows:
        from .plotting import render
        render(plot_kind, rows, Path(path).with_suffix(".png"), title)


@dataclass
class RunResult:
    report: dict
    exit_code: int


def execute_step(sess, env, step):
    spec = OPS[step["op"]]
    params = {}
    for key, val in step.items():
        if key in ("op", "out"):
            continue
        if key in spec.refs and isinstance(val, str):
            params[key] = env[val]
        elif key == "grid" and not isinstance(val, str):
            params[key] = _grid_from_spec(val)[0]
        else:
            params[key] = val
    return spec.func(sess, params)


def run_document(doc, flags=None, report_dir=None, base=Path("."), environ=None):
    """Validate and run a scenario document; returns the report and exit code."""
    doc = validate(doc)
    settings = resolve_settings({k: doc[k] for k in SETTING_TYPES if k in doc}, flags, environ)
    if "outer" in doc:
        settings["outer"] = doc["outer"]
    try:
        ctx = make_context(settings)
    except LoopDressError as exc:
        raise SchemaError(f"invalid settings: {exc}") from None
    rng = np.random.default_rng(int(settings["seed"]))
    grid, h = _grid_from_spec(doc.get("grid"))
    sess = Session(ctx, rng, grid, h)
    env = {}
    for name, spec in (doc.get("inputs") or {}).items():
        try:
            env[name] = build_input(ctx, rng, spec, env, base)
        except SchemaError:
            raise
        except LoopDressError as exc:
            raise SchemaError(f"input {name!r}: {exc}") from None
    steps, summaries, failures = [], {}, []
    for i, step in enumerate(doc.get("pipeline") or []):
        entry = {"index": i, "op": step["op"], "out": step.get("out")}
        try:
            out = execute_step(sess, env, step)
        except LoopDressError as exc:
            entry.update(status="error", error=f"{type(exc).__name__}: {exc}")
            steps.append(entry)
            failures.append(f"step {i} ({step['op']}): {exc}")
            break
        entry.update(status="ok", summary=jsonable(out.summary))
        name = step.get("out")
        if name:
            env[name] = out.value
            summaries[name] = entry["summary"]
            if out.rows and report_dir is not None:
                csv_path = Path(report_dir) / f"{name}.csv"
                emit_table(csv_path, out.rows, out.plot, f"{step['op']}: {name}")
                entry["csv"] = csv_path.name
        steps.append(entry)
    checks = []
    if not failures:
        for a in doc.get("assert") or []:
            checks.extend(_evaluate_assertion(a, summaries))
    failed = [c for c in checks if not c["passed"]]
    report = {
        "name": doc.get("name", "scenario"),
        "settings": jsonable(settings),
        "steps": steps,
        "assertions": jsonable(checks),
        "errors": failures,
        "passed": not failures and not failed,
    }
    code = EXIT_OK if report["passed"] else EXIT_ASSERT
    return RunResult(report, code)


def run_scenario(path, flags=None, report_path=None, environ=None):
    """Validate and run a scenario file; writes the report when ``report_path`` is given.

    The report file holds {"report": ..., "generated_at": ...} so the report
    itself is byte-reproducible.  Schema problems raise SchemaError.
    """
    path = Path(path)
    doc = load_scenario(path)
    report_dir = Path(report_path).parent if report_path else None
    result = run_document(doc, flags, report_dir, base=path.parent, environ=environ)
    if report_path:
        write_report(report_path, result.report)
    return result


def report_bytes(report):
    return json.dumps(report, indent=1, sort_keys=True).encode() + b"\n"


def write_report(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    path.write_text(json.dumps({"report": report, "generated_at": stamp}, indent=1, sort_keys=True) + "\n")


def bundled_scenario(name):
    """Path of a scenario shipped with the package."""
    from importlib.resources import files

    p = files("loopdress") / "scenarios" / name
    if not p.is_file():
        raise ConfigurationError(f"no bundled scenario {name!r}")
    return Path(str(p))
