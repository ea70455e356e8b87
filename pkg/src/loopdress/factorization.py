"""Annulus/disk factorization of twisted loops and the framings built from it.

Every group loop ``X`` that is reachable by an exponential path splits
uniquely as ``X = X_E X_I`` with ``X_E`` real (``X_E X_E* = I``) and ``X_I``
holomorphic on the inner disk with ``X_I(0)`` in ``B``.  The split is computed
by integrating the factorization flow for ``X_E`` along the path and then
polishing ``X_I`` by Newton iteration on the reality defect of ``X X_I^-1``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import (
    DomainError,
    NonConvergenceError,
    NotVacuumError,
    StructuralError,
    TruncationError,
    TwistError,
)
from .lie import bracket, frob, sigma
from .loops import (
    LoopContext,
    LoopElement,
    check_symmetries,
    exp_loop,
    invert,
)

ODE_TOL = 1e-10
POLISH_TARGET = 1e-14
TAIL_BUDGET = 1e-6


# -- algebra splitting ---------------------------------------------------------

def _split_coeffs(alg, c):
    """Annulus part of a coefficient stack indexed -N..N."""
    N = (c.shape[0] - 1) // 2
    out = np.zeros_like(c)
    out[:N] = c[:N]
    out[N] = alg.compact_part(c[N])
    out[N + 1:] = sigma(c[:N][::-1])
    return out


def split_algebra(xi, check_twist=True):
    """Split an algebra loop into its annulus (real) part and its disk part.

    The annulus part keeps the negative modes, the compact part of the constant
    term and the sigma-reflection of the negative modes; the remainder has only
    non-negative modes and a constant term in the B-algebra.
    """
    if check_twist:
        tw = check_symmetries(xi).twist_residual
        if tw > xi.ctx.tol * max(1.0, xi.norm()):
            raise TwistError(f"loop violates the twist condition (residual {tw:.2e})")
    e = LoopElement(xi.ctx, _split_coeffs(xi.ctx.algebra, xi.coeffs), "algebra")
    return e, (xi - e).with_flavor("algebra")


# -- factorization -------------------------------------------------------------

@dataclass(frozen=True)
class FactorPath:
    """Path X(t) built as exp(t g_m) ... exp(t g_1) applied to start_e * start_i.

    Generators are applied in order, each over a unit time interval.
    """

    generators: tuple = ()
    start_e: LoopElement | None = None
    start_i: LoopElement | None = None


@dataclass(frozen=True)
class FactorResult:
    e: LoopElement
    i: LoopElement
    product_residual: float
    reality_residual: float
    history: tuple = ()
    method: str = "flow+newton"

    def __iter__(self):
        yield self.e
        yield self.i


def _annulus_split_samples(alg, M, radius=1.0):
    """Annulus part of an algebra loop given by samples on C_radius, sampled there."""
    m = M.shape[0]
    h = m // 2
    c = np.fft.fft(M, axis=0) / m
    out = np.zeros_like(c)
    out[h + 1:] = c[h + 1:]
    out[0] = alg.compact_part(c[0])
    damp = radius ** (2.0 * np.arange(1, h))
    out[1:h] = sigma(c[m - 1:h:-1]) * damp[:, None, None]
    return np.fft.ifft(out, axis=0) * m


def _flow_annulus_factor(ctx, e0, generators, tol=ODE_TOL):
    """Integrate E' = E P_E(E^-1 g E) on samples of C_outer, one stage per generator."""
    alg = ctx.algebra
    m = ctx.n_samples
    n = ctx.n
    r = ctx.outer
    unit = r == 1.0
    E = e0.sample(r, m)
    for gen in generators:
        G = gen.sample(r, m)

        def rhs(t, y, G=G):
            Es = y.reshape(m, n, n)
            # on the unit circle E is unitary, so E^dagger is its inverse there
            Einv = np.conj(np.swapaxes(Es, 1, 2)) if unit else np.linalg.inv(Es)
            M = Einv @ G @ Es
            return (Es @ _annulus_split_samples(alg, M, r)).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), E.ravel(), method="RK45", rtol=tol, atol=tol)
        if not sol.success:
            raise NonConvergenceError(f"factorization flow failed: {sol.message}")
        E = sol.y[:, -1].reshape(m, n, n)
    if unit:
        return LoopElement.from_samples(ctx, E, 1.0, "group")
    # reality gives E on C_{1/r} at the same angles: E(1/conj(l)) = (E(l)^dagger)^-1
    mirror = np.conj(np.swapaxes(np.linalg.inv(E), 1, 2))
    return LoopElement.from_two_circles(ctx, E, mirror, "group", r_in=r, r_out=1.0 / r)


def _refine_inverse(x, y, steps=2):
    eye = LoopElement.identity(x.ctx)
    for _ in range(steps):
        y = y + y @ (eye - x @ y)
    return y


def _l1(x):
    return float(np.sum(x.mode_norms()))


def _polish(X, i0, max_iter=10):
    """Newton iteration on the disk factor so that X I^-1 satisfies the reality condition."""
    ctx = X.ctx
    alg = ctx.algebra
    eye = LoopElement.identity(ctx)
    I = i0.power_part().with_flavor("group")
    Iinv = invert(I)
    history = []
    best = None
    for _ in range(max_iter):
        E = X @ Iinv
        D = E.star() @ E - eye
        res = _l1(D)
        history.append(res)
        if best is None or res < best[0]:
            best = (res, E, I)
        if res < POLISH_TARGET or (len(history) > 1 and res > 0.5 * history[-2]):
            break
        c = np.zeros_like(D.coeffs)
        N = ctx.trunc
        c[N + 1:] = D.coeffs[N + 1:]
        c[N] = alg.hermitian_to_b(0.5 * (D.coeffs[N] + np.conj(D.coeffs[N]).T))
        step = LoopElement(ctx, c, "algebra")
        I = (exp_loop(step) @ I).power_part().with_flavor("group")
        Iinv = _refine_inverse(I, Iinv @ exp_loop(-step))
    return best[1], best[2], history


def _tail_ratio(x, width=2):
    w = x.ctx.weights * x.mode_norms()
    N = x.ctx.trunc
    edge = np.abs(x.ctx.indices) > N - width
    return float(np.sum(w[edge]) / max(np.sum(w), 1e-300))


def _log_path(X):
    """Pointwise matrix logarithm on C_outer, refit as an algebra loop."""
    r = X.ctx.outer
    vals = X.sample(r)
    logs = np.array([scipy.linalg.logm(v) for v in vals])
    return LoopElement.from_samples(X.ctx, logs, r, "algebra")


def factor_group(X, path=None, polish=True, check_i_tail=False):
    """Factor ``X = X_E X_I``; returns a FactorResult unpackable as (e, i)."""
    ctx = X.ctx
    if X.flavor != "group":
        raise DomainError("factor_group expects a group-flavored loop")
    eye = LoopElement.identity(ctx)
    # the Newton polish measures reality through coefficient reflection, which
    # amplifies disk-factor growth when the working annulus stops short of |lambda| = 1
    polish = polish and ctx.outer == 1.0
    method = "newton"
    if path is None:
        if (X - eye).norm() < 0.5:
            i0 = eye
        else:
            gamma = _log_path(X)
            if (exp_loop(gamma) - X).norm() > 1e-6 * max(1.0, X.norm()):
                raise DomainError("no exponential path to X; supply a generator path")
            path = FactorPath((gamma,))
    if path is not None:
        method = "flow+newton" if polish else "flow"
        e0 = path.start_e if path.start_e is not None else eye
        E = _flow_annulus_factor(ctx, e0, path.generators)
        i0 = (E.star() @ X).power_part()
    history = ()
    if polish or path is None:
        E, I, history = _polish(X, i0)
        history = tuple(history)
    else:
        I = i0.with_flavor("group")
    if _tail_ratio(E) > TAIL_BUDGET:
        raise TruncationError(f"annulus factor reaches the truncation edge (ratio {_tail_ratio(E):.2e})",
                              discarded=_tail_ratio(E))
    if check_i_tail and _tail_ratio(I) > TAIL_BUDGET:
        raise TruncationError("disk factor reaches the truncation edge", discarded=_tail_ratio(I))
    prod = (E @ I - X).norm() / max(1.0, X.norm())
    real = _l1(E.star() @ E - eye)
    if polish and real > ctx.tol:
        raise NonConvergenceError(f"factorization polish stalled at {real:.2e}", history)
    return FactorResult(E.with_flavor("group"), I.with_flavor("group"), prod, real, history, method)


# -- dressing elements -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DressingElement:
    """Group loop holomorphic on the inner disk, optionally with a generator.

    ``strict`` requires the value at 0 to lie in B; otherwise it may be any
    element of K^C.  ``generators`` (applied in order, as in FactorPath) give an
    exponential path to the loop and are used by dressing and flows.
    """

    loop: LoopElement
    generators: tuple = ()
    strict: bool = True

    def __post_init__(self):
        x = self.loop
        tol = x.ctx.tol
        if x.flavor != "group":
            raise DomainError("dressing element must be group-flavored")
        neg = float(np.sum(x.mode_norms()[: x.ctx.trunc]))
        if neg > tol:
            raise DomainError(f"dressing element has negative modes (mass {neg:.2e})")
        alg = x.ctx.algebra
        g0 = x.coeff(0)
        if self.strict and alg.b_distance(g0) > tol * max(1.0, frob(g0)):
            raise DomainError("value at 0 is not in B")
        if not self.strict and alg.off_block_mass(g0) > tol * max(1.0, frob(g0)):
            raise DomainError("value at 0 is not in K^C")

    @property
    def ctx(self):
        return self.loop.ctx

    @classmethod
    def identity(cls, ctx):
        return cls(LoopElement.identity(ctx), ())

    @classmethod
    def from_generator(cls, rho, strict=True):
        """g = exp(rho) for an algebra loop rho with non-negative modes."""
        if float(np.sum(rho.mode_norms()[: rho.ctx.trunc])) > 0:
            raise DomainError("generator must have only non-negative modes")
        return cls(exp_loop(rho), (rho.with_flavor("algebra"),), strict)

    @classmethod
    def constant(cls, ctx, b, strict=True):
        b = np.asarray(b, dtype=complex)
        rho = LoopElement.constant(ctx, scipy.linalg.logm(b), "algebra")
        return cls(LoopElement.constant(ctx, b, "group"), (rho,), strict)

    def path_generators(self):
        if self.generators:
            return self.generators
        return _series_log_path(self.loop)

    def compose(self, other):
        """Product self * other, keeping an exponential path."""
        return DressingElement(self.loop @ other.loop,
                               tuple(other.path_generators()) + tuple(self.path_generators()),
                               self.strict and other.strict)

    def inverse(self):
        return DressingElement(invert(self.loop),
                               tuple(-g for g in reversed(self.path_generators())), self.strict)


def _series_log_path(g):
    """Generators (log h, log b) with g = b h, b = g(0) and h(0) = I."""
    ctx = g.ctx
    b = g.coeff(0)
    h = LoopElement.constant(ctx, np.linalg.inv(b)) @ g
    u = h - LoopElement.identity(ctx)
    if u.norm() >= 0.9:
        raise DomainError("dressing element is far from its constant term; supply a generator")
    total = LoopElement.zeros(ctx)
    power = LoopElement.identity(ctx)
    for m in range(1, 200):
        power = power @ u
        total = total + power * ((-1) ** (m + 1) / m)
        if power.norm() < 1e-17:
            break
    log_b = LoopElement.constant(ctx, scipy.linalg.logm(b), "algebra")
    return (total.with_flavor("algebra"), log_b)


# -- framings -------------------------------------------------------------------

def zkey(z):
    z = complex(z)
    return complex(round(z.real, 10), round(z.imag, 10))


@dataclass(frozen=True, eq=False)
class ExtendedFraming:
    ctx: LoopContext
    z_grid: tuple
    values: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if zkey(0) not in self.values:
            raise DomainError("framing grid must contain z = 0")
        base = self.values[zkey(0)]
        if (base - LoopElement.identity(self.ctx)).norm() > 1e-8:
            raise StructuralError("framing is not based: F(0) differs from the identity")

    def __call__(self, z):
        return self.values[zkey(z)]

    def __len__(self):
        return len(self.z_grid)


def normalize_grid(z_grid):
    zs = [zkey(z) for z in z_grid]
    if zkey(0) not in zs:
        zs = [0j] + zs
    seen, out = set(), []
    for z in zs:
        if z not in seen:
            seen.add(z)
            out.append(z)
    return tuple(out)


def patch_grid(centers, h):
    """Grid containing 0 and a 3x3 patch of spacing h around each center."""
    pts = [0j]
    for c in centers:
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                pts.append(complex(c) + h * (a + 1j * b))
    return normalize_grid(pts)


def check_pole_order(eta, max_order=1):
    below = float(np.sum(eta.mode_norms()[: eta.ctx.trunc - max_order]))
    if below > 0:
        raise DomainError(f"pole order exceeds {max_order}")


def symes_framing(eta, z_grid, polish=True, h=None):
    """Framing z -> (exp z eta)_E for an algebra loop with a pole of order <= 1."""
    ctx = eta.ctx
    check_pole_order(eta, 1)
    tw = check_symmetries(eta).twist_residual
    if tw > ctx.tol * max(1.0, eta.norm()):
        raise TwistError(f"eta violates the twist condition (residual {tw:.2e})")
    grid = normalize_grid(z_grid)
    values, b0, results = {}, {}, {}
    for z in grid:
        if z == 0:
            values[z] = LoopElement.identity(ctx)
            b0[z] = np.eye(ctx.n, dtype=complex)
            continue
        gamma = (z * eta).with_flavor("algebra")
        X = exp_loop(gamma)
        use_polish = polish and X.relative_discarded() < 1e-13
        res = factor_group(X, FactorPath((gamma,)), polish=use_polish)
        values[z] = res.e
        b0[z] = res.i.coeff(0)
        results[z] = res
    meta = {"kind": "symes", "eta": eta, "b0": b0, "h": h,
            "builder": lambda zs, eta=eta, polish=polish: symes_framing(eta, zs, polish)}
    return ExtendedFraming(ctx, grid, values, meta)


def check_vacuum_seed(alg, A, tol=1e-8):
    A = np.asarray(A, dtype=complex)
    if frob(A - alg.grade_project(A, -1)) > tol * max(1.0, frob(A)):
        raise DomainError("vacuum generator must lie in the grade -1 piece")
    if frob(bracket(A, sigma(A))) > tol * max(1.0, frob(A) ** 2):
        raise NotVacuumError("[A, sigma(A)] does not vanish")
    return A


def vacuum_framing(ctx, A, z):
    """exp(z A / lambda + conj(z) lambda sigma(A)), sampled pointwise and refit."""
    A = check_vacuum_seed(ctx.algebra, A, ctx.tol)
    z = complex(z)
    sA = sigma(A)

    def closed_form(pts):
        M = (z / pts)[:, None, None] * A + (np.conj(z) * pts)[:, None, None] * sA
        return scipy.linalg.expm(M)

    return LoopElement.from_function(ctx, closed_form, None, "group", batched=True)


def vacuum_disk_factor(ctx, A, z):
    """The disk factor exp(-conj(z) lambda sigma(A)) of exp(z A / lambda)."""
    c = {}
    term = np.eye(ctx.n, dtype=complex)
    step = -np.conj(complex(z)) * sigma(np.asarray(A, dtype=complex))
    for m in range(ctx.trunc + 1):
        c[m] = term
        term = term @ step / (m + 1)
    return LoopElement.from_coeffs(ctx, c, "group")


def vacuum_framing_grid(ctx, A, z_grid, h=None):
    A = check_vacuum_seed(ctx.algebra, A, ctx.tol)
    grid = normalize_grid(z_grid)
    values = {z: vacuum_framing(ctx, A, z) for z in grid}
    meta = {"kind": "vacuum", "A": A, "h": h,
            "builder": lambda zs, A=A: vacuum_framing_grid(ctx, A, zs)}
    return ExtendedFraming(ctx, grid, values, meta)


def dress_framing(g, F, polish=True):
    """Dressed framing z -> (g F(z))_E, right-normalized so that it is based."""
    ctx = F.ctx
    gens = tuple(g.path_generators())
    raw = {}
    for z in F.z_grid:
        X = g.loop @ F(z)
        res = factor_group(X, FactorPath(gens, start_e=F(z)), polish=polish)
        raw[z] = res.e
    k0 = raw[zkey(0)].coeff(0)
    k0_inv = LoopElement.constant(ctx, np.linalg.inv(k0))
    values = {z: (v @ k0_inv).with_flavor("group") for z, v in raw.items()}
    meta = {"kind": "dressed", "g": g, "parent": F.meta.get("kind"), "h": F.meta.get("h"),
            "k0": k0, "builder": lambda zs, g=g, F=F: dress_framing(g, F.meta["builder"](zs))}
    return ExtendedFraming(ctx, F.z_grid, values, meta)


@dataclass(frozen=True)
class GaugeResult:
    equivalent: bool
    witness: dict
    leakage: float
    unitarity: float

    def __bool__(self):
        return self.equivalent


def gauge_equivalent(F, F2, tol=1e-6):
    """Whether F2(z) = F(z) k(z) with k(z) constant in lambda and unitary."""
    if set(F.values) != set(F2.values):
        raise DomainError("framings live on different grids")
    witness, leak, unit = {}, 0.0, 0.0
    n = F.ctx.n
    for z in F.z_grid:
        k = invert(F(z)) @ F2(z)
        mags = k.mode_norms()
        N = F.ctx.trunc
        leak = max(leak, float(np.sum(mags) - mags[N]))
        k0 = k.coeff(0)
        unit = max(unit, frob(k0.conj().T @ k0 - np.eye(n)))
        witness[z] = k0
    return GaugeResult(bool(leak < tol and unit < tol), witness, leak, unit)


# -- framing diagnostics --------------------------------------------------------

@dataclass(frozen=True)
class FramingReport:
    extended_residual: float
    flatness_residual: float
    per_center: tuple
    alpha_parts: dict


def _infer_spacing(grid):
    zs = np.array([z for z in grid if z != 0])
    if zs.size < 2:
        return None
    d = np.abs(zs[:, None] - zs[None, :])
    d = d[d > 1e-12]
    return float(d.min()) if d.size else None


def _patch_centers(grid, h):
    keys = set(grid)
    centers = []
    for c in grid:
        needed = [zkey(c + h * (a + 1j * b)) for a in (-1, 0, 1) for b in (-1, 0, 1)]
        if all(k in keys for k in needed):
            centers.append(c)
    return centers


def _lambda_samples(alg):
    return np.exp(2j * np.pi * np.arange(8) / 8)


def framing_residuals(F, h=None, refine=False):
    """Finite-difference checks of the extended-framing structure and of flatness."""
    ctx = F.ctx
    alg = ctx.algebra
    N = ctx.trunc
    h = h or F.meta.get("h") or _infer_spacing(F.z_grid)
    if h is None:
        return FramingReport(0.0, 0.0, (), {})
    centers = _patch_centers(F.z_grid, h)
    lams = _lambda_samples(alg)
    per, parts = [], {}
    ext_max = flat_max = 0.0
    for c in centers:
        Fc = F(c)
        Finv = invert(Fc)
        ax = Finv @ ((F(c + h) - F(c - h)) / (2 * h))
        ay = Finv @ ((F(c + 1j * h) - F(c - 1j * h)) / (2 * h))
        P = (0.5 * (ax - 1j * ay)).coeffs
        R = (0.5 * (ax + 1j * ay)).coeffs
        mP = np.linalg.norm(P, axis=(1, 2))
        mR = np.linalg.norm(R, axis=(1, 2))
        bad_p = float(np.sum(mP) - mP[N - 1] - mP[N])
        bad_r = float(np.sum(mR) - mR[N] - mR[N + 1])
        am1 = P[N - 1]
        grade_err = frob(am1 - alg.grade_project(am1, -1)) + frob(P[N] - alg.grade_project(P[N], 0))
        ext = bad_p + bad_r + grade_err
        # curvature d(alpha) + [alpha, alpha]/2 at sampled lambda
        vals = {}
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                vals[(a, b)] = F(c + h * (a + 1j * b)).evaluate_many(lams)

        def a_x(a, b):
            return np.linalg.solve(vals[(a, b)], (vals[(a + 1, b)] - vals[(a - 1, b)]) / (2 * h))

        def a_y(a, b):
            return np.linalg.solve(vals[(a, b)], (vals[(a, b + 1)] - vals[(a, b - 1)]) / (2 * h))

        dxy = (a_y(1, 0) - a_y(-1, 0)) / (2 * h)
        dyx = (a_x(0, 1) - a_x(0, -1)) / (2 * h)
        Ax, Ay = a_x(0, 0), a_y(0, 0)
        curv = dxy - dyx + Ax @ Ay - Ay @ Ax
        flat = float(np.max(np.linalg.norm(curv, axis=(1, 2))))
        per.append({"z": c, "extended": ext, "flatness": flat})
        parts[c] = {"alpha_m1": am1, "alpha_0": P[N], "alpha_pp1": R[N + 1]}
        ext_max = max(ext_max, ext)
        flat_max = max(flat_max, flat)
    report = FramingReport(ext_max, flat_max, tuple(per), parts)
    if refine and centers and "builder" in F.meta and flat_max > 1e-12:
        c = centers[0]
        finer = F.meta["builder"](patch_grid([c], h / 2))
        r2 = framing_residuals(finer, h / 2)
        ratio = per[0]["flatness"] / max(r2.flatness_residual, 1e-300)
        if ratio < 2.0:
            warnings.warn(f"grid too coarse: halving h reduced the flatness residual only by {ratio:.2f}x")
    return report
