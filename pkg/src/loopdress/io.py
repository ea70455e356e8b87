"""JSON interchange for matrices, loops, grids and framings.

Matrices are row-major lists of [re, im] pairs.  Every document carries a
``format`` tag and an integer ``version``; Python's float repr round-trips
exactly, so coefficient files reload bit-identically.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DomainError, SchemaError, TwistError, UnsupportedVersionError
from .factorization import DressingElement, ExtendedFraming, normalize_grid, zkey
from .lie import PRESETS, GradedLieAlgebra
from .loops import LoopContext, LoopElement, check_symmetries

VERSION = 1


# -- primitives -------------------------------------------------------------------

def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[float(v.real), float(v.imag)] for v in m.reshape(-1)]


def matrix_from_json(data, n=None):
    try:
        arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"matrix entries must be [re, im] pairs: {exc}") from None
    size = int(round(np.sqrt(arr.size)))
    if size * size != arr.size:
        raise SchemaError(f"{arr.size} entries do not form a square matrix")
    if n is not None and size != n:
        raise SchemaError(f"matrix is {size}x{size}, algebra expects {n}x{n}")
    return arr.reshape(size, size)


def complex_to_json(z):
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"complex number must be a number or [re, im], got {v!r}")


def _check_header(doc, fmt):
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if doc.get("format") != fmt:
        raise SchemaError(f"expected format {fmt!r}, got {doc.get('format')!r}")
    version = doc.get("version")
    if version != VERSION:
        raise UnsupportedVersionError(f"{fmt} version {version!r} is not supported (expected {VERSION})")


def _header(fmt):
    return {"format": fmt, "version": VERSION}


# -- algebra and context ---------------------------------------------------------

def algebra_to_json(alg):
    return {"name": alg.name, "n": alg.n, "k": alg.k, "Q": matrix_to_json(alg.Q), "tol": alg.tol}


def algebra_from_json(data):
    """Algebra from a preset name or an explicit {n, k, Q} descriptor."""
    if isinstance(data, str):
        data = {"preset": data}
    if not isinstance(data, dict):
        raise SchemaError("algebra descriptor must be a mapping or a preset name")
    if "preset" in data:
        name = data["preset"]
        if name not in PRESETS:
            raise SchemaError(f"unknown algebra preset {name!r}; known: {sorted(PRESETS)}")
        alg = PRESETS[name]()
        if "tol" in data:
            alg = GradedLieAlgebra(alg.n, alg.k, alg.Q, alg.name, float(data["tol"]))
        return alg
    try:
        n, k = int(data["n"]), int(data["k"])
        Q = matrix_from_json(data["Q"], n)
    except KeyError as exc:
        raise SchemaError(f"algebra descriptor lacks {exc}") from None
    try:
        return GradedLieAlgebra(n, k, Q, data.get("name", f"custom_n{n}_k{k}"), float(data.get("tol", 1e-10)))
    except DomainError as exc:
        raise SchemaError(f"invalid algebra descriptor: {exc}") from None


def context_to_json(ctx):
    return {"algebra": algebra_to_json(ctx.algebra), "eps": ctx.eps, "trunc": ctx.trunc,
            "tol": ctx.tol, "outer": ctx.outer}


def context_from_json(data):
    alg = algebra_from_json(data["algebra"])
    return LoopContext(alg, float(data["eps"]), int(data["trunc"]), float(data.get("tol", 1e-8)),
                       float(data.get("outer", 1.0)))


# -- loops ------------------------------------------------------------------------

def loop_to_json(x):
    doc = _header("loopdress.loop")
    doc["context"] = context_to_json(x.ctx)
    doc["flavor"] = x.flavor
    doc["coeffs"] = {str(n): matrix_to_json(c) for n, c in sorted(x.as_dict().items())}
    return doc


def loop_from_json(doc, ctx=None, check_twist=True):
    """Load a loop; with ``ctx`` given, the file's context must be compatible with it."""
    _check_header(doc, "loopdress.loop")
    file_ctx = context_from_json(doc["context"])
    if ctx is None:
        ctx = file_ctx
    elif file_ctx.n != ctx.n:
        raise SchemaError(f"loop is {file_ctx.n}x{file_ctx.n}, context expects {ctx.n}x{ctx.n}")
    flavor = doc.get("flavor", "algebra")
    mapping = {}
    for key, val in doc["coeffs"].items():
        try:
            n = int(key)
        except ValueError:
            raise SchemaError(f"mode key {key!r} is not an integer") from None
        if abs(n) > ctx.trunc:
            raise SchemaError(f"mode {n} exceeds truncation {ctx.trunc}")
        mapping[n] = matrix_from_json(val, ctx.n)
    try:
        x = LoopElement.from_coeffs(ctx, mapping, flavor)
    except DomainError as exc:
        raise SchemaError(str(exc)) from None
    if check_twist:
        tw = check_symmetries(x).twist_residual
        if tw > ctx.tol * max(1.0, x.norm()):
            raise TwistError(f"loop in file violates the twist condition (residual {tw:.2e})")
    return x


def matrix_doc(m):
    doc = _header("loopdress.matrix")
    doc["data"] = matrix_to_json(m)
    return doc


def matrix_from_doc(doc, n=None):
    if isinstance(doc, list):
        return matrix_from_json(doc, n)
    _check_header(doc, "loopdress.matrix")
    return matrix_from_json(doc["data"], n)


def grid_doc(z_grid):
    doc = _header("loopdress.grid")
    doc["z"] = [complex_to_json(z) for z in z_grid]
    return doc


def grid_from_doc(doc):
    """A grid document, a bare list of points, or {"radius", "resolution"} (polar grid)."""
    if isinstance(doc, list):
        return normalize_grid([complex_from_json(v) for v in doc])
    if "radius" in doc and "format" not in doc:
        return polar_grid(float(doc["radius"]), int(doc.get("resolution", 3)))
    _check_header(doc, "loopdress.grid")
    return normalize_grid([complex_from_json(v) for v in doc["z"]])


def polar_grid(radius, resolution):
    """0 plus ``resolution`` rings of 8 points each, out to ``radius``."""
    pts = [0j]
    for j in range(1, resolution + 1):
        r = radius * j / resolution
        pts.extend(r * np.exp(2j * np.pi * np.arange(8) / 8))
    return normalize_grid(pts)


# -- framings and dressing elements -------------------------------------------------

def framing_to_json(F):
    doc = _header("loopdress.framing")
    doc["context"] = context_to_json(F.ctx)
    doc["kind"] = F.meta.get("kind", "unknown")
    doc["values"] = [{"z": complex_to_json(z),
                      "coeffs": {str(n): matrix_to_json(c) for n, c in sorted(F(z).as_dict().items())}}
                     for z in F.z_grid]
    return doc


def framing_from_json(doc, ctx=None):
    _check_header(doc, "loopdress.framing")
    ctx = ctx or context_from_json(doc["context"])
    values = {}
    for entry in doc["values"]:
        z = complex_from_json(entry["z"])
        mapping = {int(n): matrix_from_json(v, ctx.n) for n, v in entry["coeffs"].items()}
        values[zkey(z)] = LoopElement.from_coeffs(ctx, mapping, "group")
    grid = normalize_grid(values)
    values = {g: values[g] for g in grid}
    return ExtendedFraming(ctx, grid, values, {"kind": doc.get("kind", "loaded")})


def dressing_to_json(g):
    doc = _header("loopdress.dressing")
    doc["loop"] = loop_to_json(g.loop)
    doc["generators"] = [loop_to_json(x) for x in g.generators]
    doc["strict"] = g.strict
    return doc


def dressing_from_json(doc, ctx=None):
    """A dressing document, or a bare group loop (generators are then reconstructed)."""
    if doc.get("format") == "loopdress.loop":
        return DressingElement(loop_from_json(doc, ctx).with_flavor("group"))
    _check_header(doc, "loopdress.dressing")
    loop = loop_from_json(doc["loop"], ctx).with_flavor("group")
    gens = tuple(loop_from_json(x, loop.ctx).with_flavor("algebra") for x in doc.get("generators", []))
    return DressingElement(loop, gens, bool(doc.get("strict", True)))


# -- files --------------------------------------------------------------------------

def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def serialize_loop(x, path):
    write_json(path, loop_to_json(x))


def deserialize_loop(path, ctx=None, check_twist=True):
    return loop_from_json(read_json(path), ctx, check_twist)
