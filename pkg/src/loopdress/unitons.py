"""2x2 machinery for nilpotent seeds: closed-form exponential, the
determinant test for finite uniton number, and the K x K group-case model.

Everything is computed in the defining 2x2 representation; uniton counts can
depend on the representation.  Which nilpotent seeds have finite uniton
number is not characterized here: the classifier reports what the
determinant test shows for the given seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError
from .lie import GradedLieAlgebra, classify_element, frob, sl2_untwisted
from .loops import LoopContext, LoopElement, exp_loop, invert

SERIES_CUTOFF = 1e-4
DET_TOL = 1e-10
COLLAPSE_TOL = 1e-12

E_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
E_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)


def sl2_exp(M, z=1.0):
    """exp(z M) for traceless 2x2 M via cosh(D) I + sinh(D)/D z M, D^2 = -det(z M).

    Accepts a stack (..., 2, 2); below |D| = 1e-4 the even series of both
    functions replaces the quotient.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape[-2:] != (2, 2):
        raise DomainError("sl2_exp expects 2x2 matrices")
    X = z * M
    tr = X[..., 0, 0] + X[..., 1, 1]
    if np.any(np.abs(tr) > 1e-12 * np.maximum(1.0, np.abs(X).max(axis=(-2, -1)))):
        raise DomainError("sl2_exp expects traceless input")
    D2 = -(X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0])
    D = np.sqrt(D2)
    small = np.abs(D) < SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        ch = np.where(small, 1 + D2 / 2 + D2 ** 2 / 24, np.cosh(D))
        sh = np.where(small, 1 + D2 / 6 + D2 ** 2 / 120, np.sinh(D) / D)
    eye = np.eye(2, dtype=complex)
    return ch[..., None, None] * eye + sh[..., None, None] * X


# -- determinant test -----------------------------------------------------------

def loop_det(eta):
    """det of a 2x2 loop as a scalar Laurent series, coefficients for modes -2N..2N."""
    if eta.ctx.n != 2:
        raise DomainError("determinant test needs the 2x2 realization")
    c = eta.coeffs
    a, b, cc, d = c[:, 0, 0], c[:, 0, 1], c[:, 1, 0], c[:, 1, 1]
    return np.convolve(a, d) - np.convolve(b, cc)


@dataclass(frozen=True)
class UnitonVerdict:
    verdict: str  # "finite", "infinite" or "indeterminate"
    det_tail: dict
    det_tail_mass: float
    collapse: dict = field(default_factory=dict)
    d_estimate: int | None = None

    @property
    def finite(self):
        return self.verdict == "finite"


def negative_depth(x, tol=COLLAPSE_TOL):
    """Smallest d with lambda^d x holomorphic at 0, relative to the weighted norm."""
    N = x.ctx.trunc
    w = x.mode_norms()[:N] * x.ctx.weights[:N]
    total = max(x.norm(), 1e-300)
    # tails[j] = weighted mass of modes -N..-(N - j)
    tails = np.cumsum(w)
    for d in range(0, N + 1):
        below = tails[N - d - 1] if d < N else 0.0
        if below <= tol * total:
            return d
    return None


def band_collapse(eta, z_samples=(1.0, 2.0, 4.0j), tol=COLLAPSE_TOL):
    """Depth of the pole of exp(+-z eta) at 0 for sample z; None when it reaches the truncation."""
    out = {}
    for z in z_samples:
        depths = []
        for s in (1, -1):
            depths.append(negative_depth(exp_loop((s * z) * eta), tol))
        out[complex(z)] = None if None in depths else max(depths)
    return out


def uniton_classify(eta, tol=DET_TOL, z_samples=(1.0, 2.0, 4.0j)):
    """Finite uniton number iff det eta has no negative modes (2x2 only)."""
    ctx = eta.ctx
    if ctx.n != 2:
        raise DomainError("uniton classification is implemented for 2x2 loops only")
    below = float(np.sum(eta.mode_norms()[: ctx.trunc - 1]))
    if below > 0:
        raise DomainError("pole order exceeds 1")
    det = loop_det(eta)
    N2 = 2 * ctx.trunc
    tail = {int(n - N2): complex(det[n]) for n in range(N2) if det[n] != 0}
    mass = float(sum(abs(v) for v in tail.values()))
    collapse = band_collapse(eta, z_samples)
    if tol / 10 <= mass <= tol * 10:
        verdict = "indeterminate"
    else:
        verdict = "finite" if mass < tol else "infinite"
    d_est = None
    if verdict == "finite":
        depths = [v for v in collapse.values() if v is not None]
        d_est = max(depths) if depths else None
    return UnitonVerdict(verdict, tail, mass, collapse, d_est)


def gamma_conjugate(eta):
    """Ad gamma eta with gamma = diag(1, 1/lambda); holomorphic at 0 for seeds with eta_-1 = e."""
    ctx = eta.ctx
    if ctx.n != 2:
        raise DomainError("gamma conjugation is defined for 2x2 loops")
    c = np.zeros_like(eta.coeffs)
    src = eta.coeffs
    c[:, 0, 0] = src[:, 0, 0]
    c[:, 1, 1] = src[:, 1, 1]
    # (1,2) entry gains lambda, (2,1) entry loses it
    c[1:, 0, 1] = src[:-1, 0, 1]
    c[:-1, 1, 0] = src[1:, 1, 0]
    dropped = frob(src[-1, 0, 1]) + frob(src[0, 1, 0])
    if dropped > 0:
        raise DomainError("gamma conjugation leaves the truncation window")
    return LoopElement(ctx, c, eta.flavor)


# -- nilpotent normal form ---------------------------------------------------------

def nilpotent_normal_form(X, tol=1e-12):
    """(target, c) with c in SL(2, C) and c X c^-1 = target in {e, f}.

    Uses the basis (X y, y) for a vector y outside the kernel; for X lower
    triangular the basis (y, X y) yields f, and in both cases c is diagonal
    when X is strictly triangular.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape != (2, 2):
        raise DomainError("nilpotent normal form is for 2x2 matrices")
    scale = frob(X)
    if scale == 0:
        raise DomainError("X = 0 has no normal form")
    cls = classify_element(X)
    if cls.kind != "nilpotent":
        raise DomainError(f"X is {cls.kind}, not nilpotent")
    lower = abs(X[0, 1]) <= tol * scale
    if lower:
        y = np.array([1.0, 0.0], dtype=complex)
        u = X @ y
        C = np.column_stack([y, u])
        target = E_MINUS
    else:
        y = np.array([0.0, 1.0], dtype=complex)
        u = X @ y
        C = np.column_stack([u, y])
        target = E_PLUS
    det = np.linalg.det(C)
    # scaling y by s scales u by s and det by s^2
    s = 1.0 / np.sqrt(det)
    C = C * s
    c = np.linalg.inv(C)
    return target, c


# -- K x K group case ----------------------------------------------------------------

def _swap_algebra():
    Q = np.zeros((4, 4))
    Q[:2, 2:] = np.eye(2)
    Q[2:, :2] = np.eye(2)
    return GradedLieAlgebra(4, 2, Q, name="su2xsu2_swap")


@dataclass(frozen=True, eq=False)
class GroupCaseContext:
    """Maps into K = SU(2) through G = K x K with the swap involution.

    Only the second-factor loop k(lambda) is stored (an untwisted sl(2) loop);
    the twisted pair (k(-lambda), k(lambda)) is rebuilt on demand.
    """

    eps: float = 0.5
    trunc: int = 24
    tol: float = 1e-8

    @cached_property
    def ctx(self):
        return LoopContext(sl2_untwisted(), self.eps, self.trunc, self.tol)

    @cached_property
    def pair_ctx(self):
        return LoopContext(_swap_algebra(), self.eps, self.trunc, self.tol)

    def to_pair(self, k):
        """Block-diagonal 4x4 loop (k(-lambda), k(lambda))."""
        c = np.zeros((k.ctx.length, 4, 4), dtype=complex)
        signs = (-1.0) ** k.ctx.indices
        c[:, :2, :2] = k.coeffs * signs[:, None, None]
        c[:, 2:, 2:] = k.coeffs
        return LoopElement(self.pair_ctx, c, k.flavor)

    def from_pair(self, pair):
        c = pair.coeffs
        off = frob(c[:, :2, 2:].reshape(-1)) + frob(c[:, 2:, :2].reshape(-1))
        signs = (-1.0) ** pair.ctx.indices
        mismatch = frob((c[:, :2, :2] - c[:, 2:, 2:] * signs[:, None, None]).reshape(-1))
        if off > self.tol or mismatch > self.tol:
            raise DomainError("loop is not of the form (k(-lambda), k(lambda))")
        return LoopElement(self.ctx, np.array(c[:, 2:, 2:]), pair.flavor)

    def extended_solution(self, F_z):
        """lambda -> F(lambda) F(1)^-1, a based loop."""
        f1 = F_z.evaluate(1.0)
        return (F_z @ LoopElement.constant(F_z.ctx, np.linalg.inv(f1))).with_flavor("group")


def group_map_from_framing(F):
    """phi(z) = F(z)(-1) F(z)(1)^-1 for a framing of second-factor loops."""
    out = {}
    for z in F.z_grid:
        v = F(z)
        out[z] = v.evaluate(-1.0) @ np.linalg.inv(v.evaluate(1.0))
    return out


def unitarity_defect(phi):
    return max(frob(m.conj().T @ m - np.eye(m.shape[0])) for m in phi.values())


def conjugate_loop(g, eta):
    """Ad g eta for a group loop g."""
    return (g @ eta @ invert(g)).with_flavor("algebra")
