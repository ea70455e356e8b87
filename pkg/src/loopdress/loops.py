"""Truncated matrix Laurent series on the annulus eps <= |lambda| <= outer.

A loop is stored as its coefficient array ``coeffs[n + N]`` for
``n = -N..N``.  Products, exponentials and inverses are computed by direct
coefficient convolution, which keeps the relative accuracy of small high-order
coefficients.  Sampling on circles goes through the FFT and is used only for
refits from pointwise data and for diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass, replace, asdict
from functools import lru_cache, cached_property

import numpy as np

from .errors import ConditioningError, DomainError, NonConvergenceError, TruncationError
from .lie import GradedLieAlgebra, sigma

FLAVORS = ("group", "algebra")
DISCARD_BUDGET = 1e-6


def _next_pow2(m):
    return 1 << (int(m) - 1).bit_length()


@dataclass(frozen=True, eq=False)
class LoopContext:
    algebra: GradedLieAlgebra
    eps: float = 0.5
    trunc: int = 24
    tol: float = 1e-8
    # outer edge of the working annulus; disk factors need only converge up to it
    outer: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if not self.eps <= self.outer <= 1.0:
            raise DomainError(f"outer must lie in [eps, 1], got {self.outer}")
        if self.trunc < self.algebra.k:
            raise DomainError(f"trunc ({self.trunc}) must be at least k ({self.algebra.k})")

    @property
    def n(self):
        return self.algebra.n

    @property
    def length(self):
        return 2 * self.trunc + 1

    @property
    def n_samples(self):
        return _next_pow2(4 * self.trunc)

    @cached_property
    def indices(self):
        return np.arange(-self.trunc, self.trunc + 1)

    @cached_property
    def weights(self):
        idx = self.indices.astype(float)
        return np.where(idx < 0, self.eps ** idx, self.outer ** idx)

    def with_(self, **changes):
        return replace(self, **changes)


@lru_cache(maxsize=64)
def _toeplitz_index(la, lb):
    s = np.arange(la + lb - 1)[:, None]
    j = np.arange(lb)[None, :]
    d = s - j
    return np.where((d >= 0) & (d < la), d, la)


def _support(c):
    nz = np.flatnonzero(np.any(c != 0, axis=(1, 2)))
    if nz.size == 0:
        return None
    return int(nz[0]), int(nz[-1]) + 1


def convolve(a, b):
    """Full discrete convolution of two (L, n, n) coefficient stacks."""
    la, n, _ = a.shape
    lb = b.shape[0]
    ext = np.concatenate([a, np.zeros((1, n, n), dtype=complex)])
    T = ext[_toeplitz_index(la, lb)]
    S = la + lb - 1
    return (T.transpose(0, 2, 1, 3).reshape(S * n, lb * n) @ b.reshape(lb * n, n)).reshape(S, n, n)


def circle_points(m, radius=1.0):
    return radius * np.exp(2j * np.pi * np.arange(m) / m)


class LoopElement:
    """Immutable truncated Laurent series with a group or algebra flavor."""

    __slots__ = ("ctx", "flavor", "coeffs", "discarded")

    def __init__(self, ctx, coeffs, flavor="group", discarded=0.0):
        if flavor not in FLAVORS:
            raise DomainError(f"unknown flavor {flavor!r}")
        c = np.array(coeffs, dtype=complex)
        if c.shape != (ctx.length, ctx.n, ctx.n):
            raise DomainError(f"coefficient array must have shape {(ctx.length, ctx.n, ctx.n)}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "flavor", flavor)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "discarded", float(discarded))

    def __setattr__(self, name, value):
        raise AttributeError("LoopElement is immutable")

    def __repr__(self):
        lo, hi = self.band()
        return f"LoopElement(flavor={self.flavor}, n={self.ctx.n}, modes=[{lo}, {hi}], N={self.ctx.trunc})"

    # -- constructors --------------------------------------------------------
    @classmethod
    def zeros(cls, ctx, flavor="algebra"):
        return cls(ctx, np.zeros((ctx.length, ctx.n, ctx.n)), flavor)

    @classmethod
    def from_coeffs(cls, ctx, mapping, flavor="algebra"):
        c = np.zeros((ctx.length, ctx.n, ctx.n), dtype=complex)
        for n, m in mapping.items():
            if abs(n) > ctx.trunc:
                raise DomainError(f"mode {n} exceeds truncation {ctx.trunc}")
            c[n + ctx.trunc] += np.asarray(m, dtype=complex)
        return cls(ctx, c, flavor)

    @classmethod
    def constant(cls, ctx, matrix, flavor="group"):
        return cls.from_coeffs(ctx, {0: matrix}, flavor)

    @classmethod
    def identity(cls, ctx):
        return cls.constant(ctx, np.eye(ctx.n), "group")

    @classmethod
    def from_samples(cls, ctx, samples, radius=1.0, flavor="group", chop=True):
        """Refit a loop from values at ``radius * exp(2 pi i j / m)``."""
        samples = np.asarray(samples, dtype=complex)
        m = samples.shape[0]
        N = ctx.trunc
        if m < 2 * N + 1:
            raise DomainError("need at least 2N+1 samples to refit")
        f = np.fft.fft(samples, axis=0) / m
        mags = np.linalg.norm(f, axis=(1, 2))
        idx = ctx.indices
        kept = f[idx % m]
        if chop:
            floor = 64 * np.finfo(float).eps * mags.max()
            live = np.linalg.norm(kept, axis=(1, 2)) > floor
            if live.any():
                pos = np.flatnonzero(live)
                mask = np.zeros_like(live)
                mask[pos[0]: pos[-1] + 1] = True
                kept = kept * mask[:, None, None]
            else:
                kept = np.zeros_like(kept)
        coeffs = kept / (radius ** idx.astype(float))[:, None, None]
        outside = np.ones(m, dtype=bool)
        outside[idx % m] = False
        aliased = float(mags[outside].max()) if outside.any() else 0.0
        return cls(ctx, coeffs, flavor, discarded=aliased)

    @classmethod
    def from_two_circles(cls, ctx, inner, outer, flavor="group", r_in=None, r_out=None):
        """Refit from samples on C_r_in (negative modes) and C_r_out (the rest).

        Radii default to eps and ``ctx.outer``.  Taking each side of the series
        from the circle where it is small keeps the refit noise of every mode at
        the level of its weight.
        """
        lo = cls.from_samples(ctx, inner, ctx.eps if r_in is None else r_in, flavor)
        hi = cls.from_samples(ctx, outer, ctx.outer if r_out is None else r_out, flavor)
        N = ctx.trunc
        c = np.array(hi.coeffs)
        c[:N] = lo.coeffs[:N]
        return cls(ctx, c, flavor, discarded=max(lo.discarded, hi.discarded))

    @classmethod
    def from_function(cls, ctx, func, radius=None, flavor="group", m=None, batched=False):
        """Sample a matrix-valued function of lambda and refit.

        With ``radius=None`` the annulus refit of ``from_two_circles`` is used.
        ``batched`` means ``func`` accepts an array of points.
        """
        m = m or ctx.n_samples

        def values(r):
            pts = circle_points(m, r)
            return func(pts) if batched else np.array([func(p) for p in pts])

        if radius is None:
            return cls.from_two_circles(ctx, values(ctx.eps), values(ctx.outer), flavor)
        return cls.from_samples(ctx, values(radius), radius, flavor)

    # -- access ------------------------------------------------------------
    def coeff(self, n):
        if abs(n) > self.ctx.trunc:
            return np.zeros((self.ctx.n, self.ctx.n), complex)
        return self.coeffs[n + self.ctx.trunc]

    def as_dict(self, tol=0.0):
        return {int(n): self.coeffs[i] for i, n in enumerate(self.ctx.indices)
                if np.linalg.norm(self.coeffs[i]) > tol}

    def band(self, tol=0.0):
        """Lowest and highest modes with coefficient norm above ``tol``."""
        mags = np.linalg.norm(self.coeffs, axis=(1, 2))
        live = np.flatnonzero(mags > tol)
        if live.size == 0:
            return 0, 0
        return int(self.ctx.indices[live[0]]), int(self.ctx.indices[live[-1]])

    def mode_norms(self):
        return np.linalg.norm(self.coeffs, axis=(1, 2))

    def norm(self):
        """Weighted l1 norm, submultiplicative and bounding values on the working annulus."""
        return float(np.sum(self.ctx.weights * self.mode_norms()))

    def relative_discarded(self):
        return self.discarded / max(self.norm(), 1.0)

    def check_truncation(self, budget=DISCARD_BUDGET, what="loop"):
        rel = self.relative_discarded()
        if rel > budget:
            raise TruncationError(f"{what}: discarded mass {rel:.2e} exceeds budget {budget:.0e}", discarded=rel)
        return rel

    def is_power_series(self, tol=0.0):
        return float(np.sum(self.mode_norms()[: self.ctx.trunc])) <= tol

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, lam):
        lam = complex(lam)
        if lam == 0:
            neg = self.mode_norms()[: self.ctx.trunc]
            if np.any(neg > 0):
                raise DomainError("pole: negative modes present at lambda = 0")
            return np.array(self.coeff(0))
        powers = lam ** self.ctx.indices.astype(float)
        return np.einsum("n,nij->ij", powers, self.coeffs)

    def evaluate_many(self, lams):
        lams = np.asarray(lams, dtype=complex)
        zero = lams == 0
        if zero.any() and np.any(self.mode_norms()[: self.ctx.trunc] > 0):
            raise DomainError("pole: negative modes present at lambda = 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = lams[:, None] ** self.ctx.indices[None, :].astype(float)
        powers[zero] = (self.ctx.indices == 0).astype(complex)
        return np.einsum("mn,nij->mij", powers, self.coeffs)

    def sample(self, radius=1.0, m=None):
        """Values at ``m`` equispaced points of the circle of given radius."""
        m = m or self.ctx.n_samples
        idx = self.ctx.indices
        buf = np.zeros((m, self.ctx.n, self.ctx.n), dtype=complex)
        np.add.at(buf, idx % m, self.coeffs * (radius ** idx.astype(float))[:, None, None])
        return np.fft.ifft(buf, axis=0) * m

    # -- arithmetic ------------------------------------------------------------
    def _new(self, coeffs, flavor=None, discarded=None):
        return LoopElement(self.ctx, coeffs, flavor or self.flavor,
                           self.discarded if discarded is None else discarded)

    def _check_ctx(self, other):
        if other.ctx is not self.ctx and (
            other.ctx.trunc != self.ctx.trunc or other.ctx.algebra is not self.ctx.algebra
        ):
            raise DomainError("loops live in different contexts")

    def __add__(self, other):
        if isinstance(other, LoopElement):
            self._check_ctx(other)
            flavor = self.flavor if self.flavor == other.flavor else "algebra"
            return self._new(self.coeffs + other.coeffs, flavor, self.discarded + other.discarded)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, LoopElement):
            self._check_ctx(other)
            flavor = self.flavor if self.flavor == other.flavor else "algebra"
            return self._new(self.coeffs - other.coeffs, flavor, self.discarded + other.discarded)
        return NotImplemented

    def __neg__(self):
        return self._new(-self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return self._new(self.coeffs * scalar, discarded=self.discarded * abs(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        """Loop product; the result is group-flavored only if both factors are."""
        if isinstance(other, np.ndarray):
            return self._new(self.coeffs @ other)
        self._check_ctx(other)
        N = self.ctx.trunc
        flavor = "group" if (self.flavor == "group" and other.flavor == "group") else "algebra"
        sa, sb = _support(self.coeffs), _support(other.coeffs)
        out = np.zeros((self.ctx.length, self.ctx.n, self.ctx.n), dtype=complex)
        lost = 0.0
        if sa is not None and sb is not None:
            full = convolve(self.coeffs[sa[0]: sa[1]], other.coeffs[sb[0]: sb[1]])
            start = sa[0] + sb[0] - 2 * N  # mode of full[0]
            modes = start + np.arange(full.shape[0])
            keep = np.abs(modes) <= N
            out[modes[keep] + N] = full[keep]
            if not keep.all():
                m = modes[~keep].astype(float)
                w = np.maximum(1.0, self.ctx.eps ** m)
                lost = float(np.sum(w * np.linalg.norm(full[~keep], axis=(1, 2))))
        return LoopElement(self.ctx, out, flavor, self.discarded + other.discarded + lost)

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return self._new(other @ self.coeffs)
        return NotImplemented

    def star(self):
        """lambda -> x(1/conj(lambda))^dagger; the group reality condition is x x* = I."""
        c = np.conj(np.swapaxes(self.coeffs[::-1], -1, -2))
        return self._new(c)

    def sigma_reflect(self):
        """lambda -> sigma(x(1/conj(lambda))); real algebra loops are fixed by it."""
        return self._new(sigma(self.coeffs[::-1]))

    def twisted(self):
        """lambda -> tau^-1 x(omega lambda); twisted loops are fixed by it."""
        alg = self.ctx.algebra
        phases = alg.omega ** self.ctx.indices
        return self._new(alg.tau(self.coeffs * phases[:, None, None], -1))

    def project_twist(self):
        """Keep in each mode n only its grade (n mod k) component."""
        alg = self.ctx.algebra
        c = np.array([alg.grade_project(self.coeffs[i], n) for i, n in enumerate(self.ctx.indices)])
        return self._new(c)

    def band_limit(self, lo, hi):
        idx = self.ctx.indices
        keep = (idx >= lo) & (idx <= hi)
        return self._new(self.coeffs * keep[:, None, None])

    def power_part(self):
        """Modes n >= 0."""
        return self.band_limit(0, self.ctx.trunc)

    def with_flavor(self, flavor):
        return self._new(self.coeffs, flavor)

    def shift(self, p):
        """Multiply by lambda^p, dropping modes pushed past the truncation."""
        c = np.zeros_like(self.coeffs)
        if p >= 0:
            c[p:] = self.coeffs[: self.ctx.length - p]
        else:
            c[:p] = self.coeffs[-p:]
        return self._new(c)

    def scale_variable(self, factor):
        """lambda -> x(factor * lambda)."""
        return self._new(self.coeffs * (factor ** self.ctx.indices.astype(float))[:, None, None])

    def with_context(self, ctx):
        """Re-express in another context with the same algebra (pads or truncates)."""
        c = np.zeros((ctx.length, ctx.n, ctx.n), dtype=complex)
        for i, n in enumerate(self.ctx.indices):
            if abs(n) <= ctx.trunc:
                c[n + ctx.trunc] = self.coeffs[i]
        return LoopElement(ctx, c, self.flavor, self.discarded)


def multiply(x, y):
    """Product in the loop group; both factors must be group-flavored."""
    if x.flavor != "group" or y.flavor != "group":
        raise DomainError("multiply expects group-flavored loops")
    return x @ y


def loop_bracket(x, y):
    return (x @ y - y @ x).with_flavor("algebra")


def exp_loop(x):
    """Exponential by scaled Taylor series and repeated squaring."""
    ctx = x.ctx
    nu = x.norm()
    s = max(0, int(np.ceil(np.log2(nu / 0.5))) if nu > 0 else 0)
    y = (x / 2.0 ** s).with_flavor("group")
    total = LoopElement.identity(ctx)
    term = total
    for m in range(1, 80):
        term = (term @ y) / m
        total = total + term
        if term.norm() < 1e-18 * total.norm():
            break
    for _ in range(s):
        total = total @ total
    return total.with_flavor("group")


def _newton_inverse(x, y, max_iter=12, min_iter=0):
    eye = LoopElement.identity(x.ctx)
    history = []
    for it in range(max_iter):
        r = eye - x @ y
        history.append(r.norm())
        stalled = len(history) > 1 and history[-1] > 0.5 * history[-2]
        if it >= min_iter and (history[-1] < 1e-15 or stalled):
            break
        y = y + y @ r
    return y, history


def invert(x):
    """Inverse of a group-flavored loop by Newton iteration on coefficients."""
    ctx = x.ctx
    if x.flavor != "group":
        raise DomainError("invert expects a group-flavored loop")
    if x.is_power_series():
        c0 = x.coeff(0)
        if np.linalg.cond(c0) > 1e12:
            raise ConditioningError("constant term is near-singular")
        y = LoopElement.constant(ctx, np.linalg.inv(c0))
        n_iter = int(np.ceil(np.log2(ctx.trunc + 1))) + 1
        y, history = _newton_inverse(x, y, max_iter=n_iter + 6, min_iter=n_iter)
    else:
        vals = x.sample(ctx.outer)
        conds = np.linalg.cond(vals)
        if np.max(conds) > 1e12:
            raise ConditioningError(f"near-singular sample, condition {np.max(conds):.2e}")
        y = LoopElement.from_samples(ctx, np.linalg.inv(vals), ctx.outer, "group")
        y, history = _newton_inverse(x, y)
    if min(history) > ctx.tol:
        raise NonConvergenceError(f"loop inverse residual {history[-1]:.2e} above tolerance", history)
    return y.with_flavor("group")


def adjoint(g, x, g_inv=None):
    """Ad g (x) = g x g^-1 for a group loop g."""
    g_inv = invert(g) if g_inv is None else g_inv
    return (g @ x @ g_inv).with_flavor("algebra")


def tail_norm(x, band, weighted=False):
    """Largest coefficient norm outside modes -band..band (annulus-weighted on request)."""
    if band > x.ctx.trunc:
        raise DomainError("band exceeds truncation")
    mags = x.mode_norms() * (x.ctx.weights if weighted else 1.0)
    outside = np.abs(x.ctx.indices) > band
    return float(mags[outside].max()) if outside.any() else 0.0


@dataclass(frozen=True)
class SymmetryReport:
    twist_residual: float
    reality_residual: float
    E_residual: float
    I_residual: float
    B_residual: float

    def to_dict(self):
        return asdict(self)


def _max_sample_norm(loop, radii, m=64):
    return max(float(np.max(np.linalg.norm(loop.sample(r, m), axis=(1, 2)))) for r in radii)


def check_symmetries(x, m=64):
    """Residuals of the twist, reality, E-type, I-type and B conditions."""
    ctx = x.ctx
    alg = ctx.algebra
    eps = ctx.eps
    # x(omega lambda) - tau x(lambda), sampled on C_eps
    phases = alg.omega ** ctx.indices
    twist_defect = x._new(x.coeffs * phases[:, None, None] - alg.tau(x.coeffs, 1))
    twist = _max_sample_norm(twist_defect, [eps], m)
    if x.flavor == "group":
        defect = x @ x.star() - LoopElement.identity(ctx)
        c0 = x.coeff(0)
        b_res = alg.b_distance(c0)
    else:
        defect = x.sigma_reflect() - x
        b_res = alg.b_algebra_distance(x.coeff(0))
    reality = _max_sample_norm(defect, [1.0], m)
    e_res = _max_sample_norm(defect, [1.0, eps], m)
    i_res = float(np.sum(x.mode_norms()[: ctx.trunc]))
    return SymmetryReport(twist, reality, e_res, i_res, b_res)
