"""Vacuum seeds, their normalization, and the dressing orbit of a vacuum.

``normalize_semisimple`` minimizes the norm over the K^C-orbit of a grade -1
element; ``untangle_to_vacuum`` builds a dressing element that carries a
pole-order-one seed into the fibre of its vacuum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConditioningError,
    DomainError,
    NonConvergenceError,
    NotVacuumError,
    TwistError,
)
from .factorization import (
    DressingElement,
    check_pole_order,
    dress_framing,
    gauge_equivalent,
    vacuum_framing_grid,
)
from .lie import bracket, centralizer, classify_element, frob, sigma
from .loops import LoopElement, check_symmetries, circle_points, invert

GRADIENT_TOL = 1e-10
ARMIJO_C = 1e-4
MIN_STEP = 1e-14
NEWTON_COND_MAX = 1e8


@dataclass(frozen=True, eq=False)
class VacuumSeed:
    A: np.ndarray
    provenance: str = "given"
    b: np.ndarray | None = None


@dataclass(frozen=True)
class NormalizationTrace:
    norms: tuple
    steps: tuple


def normalize_semisimple(alg, X, tol=GRADIENT_TOL, max_iter=20000):
    """Minimize |Ad k X|^2 over k in K^C; returns (VacuumSeed, b, trace) with A = Ad b X."""
    X = np.asarray(X, dtype=complex)
    if frob(X - alg.grade_project(X, -1)) > 1e-10 * max(1.0, frob(X)):
        raise DomainError("X must lie in the grade -1 piece")
    cls = classify_element(X)
    if cls.kind != "semisimple":
        raise NotVacuumError(f"X is {cls.kind}, not semisimple")
    n = alg.n
    Y = X.copy()
    k = np.eye(n, dtype=complex)
    norms, steps = [frob(Y) ** 2], []
    step = None
    for _ in range(max_iter):
        c = bracket(Y, sigma(Y))  # descent direction: d|Y|^2 = -2 |c|^2 along Ad exp(s c)
        cn = frob(c)
        if cn < tol:
            break
        s = 0.1 / cn if step is None else step
        f0 = norms[-1]
        slack = 8 * np.finfo(float).eps * f0
        while True:
            # |Y|^2 - min is O(|c|^2), so once s|c|^2 drops below roundoff in |Y|^2
            # candidates are ranked by |c| instead of by |Y|^2
            fine = s * cn ** 2 < slack
            best = None
            for t in (0.5 * s, s, 2.0 * s):
                u_t = scipy.linalg.expm(t * c)
                Y_t = u_t @ Y @ np.linalg.inv(u_t)
                f_t = frob(Y_t) ** 2
                key = frob(bracket(Y_t, sigma(Y_t))) if fine else f_t
                if best is None or key < best[0]:
                    best = (key, f_t, t, u_t, Y_t)
            key, fn, s, u, Yn = best
            if fine:
                if fn <= f0 + slack and key < cn:
                    break
            elif fn <= f0 - ARMIJO_C * s * 2 * cn ** 2:
                break
            s *= 0.25
            if s < MIN_STEP:
                raise NonConvergenceError("norm-minimizing flow stalled", history=norms)
        Y, k, step = Yn, u @ k, s
        norms.append(fn)
        steps.append(s)
    else:
        raise NonConvergenceError("norm-minimizing flow hit the iteration cap", history=norms)
    kK, kB = alg.iwasawa_factor(k)
    A = kB @ X @ np.linalg.inv(kB)
    return VacuumSeed(A, "normalized", kB), kB, NormalizationTrace(tuple(norms), tuple(steps))


# -- untangling ---------------------------------------------------------------------

def _orthonormal_complement(alg, kernel):
    basis = alg.sl_basis.reshape(len(alg.sl_basis), -1)
    if kernel:
        K = np.array([k.reshape(-1) for k in kernel])
        proj = basis - (basis @ K.conj().T) @ K
    else:
        proj = basis
    u, s, vh = np.linalg.svd(proj)
    r = int(np.sum(s > 1e-8))
    return [vh[i].reshape(alg.n, alg.n) for i in range(r)]


def _dexp(y, w):
    n = y.shape[0]
    big = np.zeros((2 * n, 2 * n), dtype=complex)
    big[:n, :n] = y
    big[n:, n:] = y
    big[:n, n:] = w
    return scipy.linalg.expm(big)[:n, n:]


def _solve_split(A, target, ker, img, tol=1e-14, max_iter=30):
    """Newton for Ad exp(y) x = target with x in ker ad A and y in im ad A."""
    a = np.array([np.vdot(kb, A) for kb in ker])
    c = np.zeros(len(img), dtype=complex)
    cond = 1.0
    for _ in range(max_iter):
        x = sum(ai * kb for ai, kb in zip(a, ker))
        y = sum(ci * ib for ci, ib in zip(c, img)) if img else np.zeros_like(A)
        e = scipy.linalg.expm(y)
        einv = np.linalg.inv(e)
        val = e @ x @ einv
        res = target - val
        if frob(res) < tol * max(1.0, frob(target)):
            return x, y, cond
        cols = [(e @ kb @ einv).reshape(-1) for kb in ker]
        for ib in img:
            de = _dexp(y, ib)
            cols.append((de @ x @ einv - e @ x @ einv @ de @ einv).reshape(-1))
        J = np.array(cols).T
        cond = float(np.linalg.cond(J))
        if cond > NEWTON_COND_MAX:
            raise ConditioningError(f"linearization condition {cond:.2e}")
        delta = np.linalg.lstsq(J, res.reshape(-1), rcond=None)[0]
        a = a + delta[: len(ker)]
        c = c + delta[len(ker):]
    raise NonConvergenceError("split Newton did not converge")


@dataclass(frozen=True, eq=False)
class UntangleResult:
    g: DressingElement
    radius: float
    commutator_residual: float
    twist_residual: float


def untangle_to_vacuum(eta, max_halvings=6, verify_tol=1e-8):
    """Dressing element g with [A, Ad g eta] = 0, where A is the lambda^-1 coefficient."""
    ctx = eta.ctx
    alg = ctx.algebra
    check_pole_order(eta, 1)
    A = np.array(eta.coeff(-1))
    if frob(bracket(A, sigma(A))) > ctx.tol * max(1.0, frob(A) ** 2):
        raise NotVacuumError("lambda^-1 coefficient does not commute with its sigma-image")
    ker = centralizer(A)
    img = _orthonormal_complement(alg, ker)
    m = ctx.n_samples
    radius = ctx.eps
    lam_eta = eta.shift(1)
    for _ in range(max_halvings + 1):
        pts = circle_points(m, radius)
        targets = lam_eta.evaluate_many(pts)
        try:
            ys = np.array([_solve_split(A, T, ker, img)[1] for T in targets])
        except (ConditioningError, NonConvergenceError):
            radius *= 0.5
            continue
        break
    else:
        raise NonConvergenceError("untangling failed at every working radius")
    rho = LoopElement.from_samples(ctx, -ys, radius, "algebra")
    rho = rho.power_part()
    g = DressingElement.from_generator(rho)
    tw = check_symmetries(g.loop).twist_residual
    if tw > ctx.tol:
        raise TwistError(f"untangled element breaks the twist (residual {tw:.2e})")
    comm = _commutator_residual(g.loop, eta, A)
    if comm > verify_tol:
        raise NonConvergenceError(f"untangled element leaves [A, Ad g eta] = {comm:.2e}")
    return UntangleResult(g, radius, comm, tw)


def _commutator_residual(g, eta, A, m=64):
    ctx = g.ctx
    conj = (g @ eta @ invert(g)).with_flavor("algebra")
    comm = LoopElement(ctx, conj.coeffs @ A - A @ conj.coeffs, "algebra")
    return max(float(np.max(np.linalg.norm(comm.sample(r, m), axis=(1, 2)))) for r in (ctx.eps, ctx.outer))


# -- fibres and stabilizers -----------------------------------------------------------

@dataclass(frozen=True)
class FibreResult:
    equivalent: bool
    criterion: str
    residual: float

    def __bool__(self):
        return self.equivalent


def fibre_equivalent(zeta, eta, n_max=6, tol=1e-8):
    """Whether zeta and eta give gauge-equivalent Symes framings."""
    check_pole_order(zeta, 1)
    check_pole_order(eta, 1)
    N = eta.ctx.trunc
    lead = frob(zeta.coeff(-1) - eta.coeff(-1))
    if lead > tol:
        return FibreResult(False, "leading", lead)
    A = np.array(eta.coeff(-1))
    rest = float(np.sum(eta.mode_norms())) - frob(A)
    semisimple = frob(A) > 0 and classify_element(A).kind == "semisimple"
    if semisimple and rest <= tol:
        comm = zeta.coeffs @ A - A @ zeta.coeffs
        res = float(np.sum(np.linalg.norm(comm, axis=(1, 2))))
        return FibreResult(res < tol, "vacuum-commutant", res)
    if semisimple and len(centralizer(A)) == alg_rank(eta.ctx.algebra):
        res = float(np.sum((zeta @ eta - eta @ zeta).mode_norms()))
        return FibreResult(res < tol, "regular-commutator", res)
    term = zeta
    worst = 0.0
    for _ in range(n_max):
        term = (eta @ term - term @ eta).with_flavor("algebra")
        worst = max(worst, float(np.sum(term.mode_norms()[:N])))
    return FibreResult(worst < tol, "nilpotent-tail", worst)


def alg_rank(alg):
    return alg.n - 1


@dataclass(frozen=True)
class StabilizerResult:
    member: bool
    residual: float
    variation: float
    gauge: object = None

    def __bool__(self):
        return self.member


def stabilizer_membership(g, A, tol=1e-8, m=32, cross_check=False, z_grid=None):
    """Whether Ad g(lambda) A = A on the inner disk (sampled), optionally cross-checked by dressing."""
    ctx = g.ctx
    loop = g.loop if hasattr(g, "loop") else g
    A = np.asarray(A, dtype=complex)
    pts = np.concatenate([[0.0], circle_points(m, ctx.eps / 4), circle_points(m, ctx.eps / 2),
                          circle_points(m, ctx.eps)])
    vals = loop.evaluate_many(pts)
    ads = vals @ A @ np.linalg.inv(vals)
    res = float(np.max(np.linalg.norm(ads - A, axis=(1, 2))))
    variation = float(np.max(np.linalg.norm(ads - ads[0], axis=(1, 2))))
    gauge = None
    if cross_check:
        grid = z_grid or (0, 0.4 + 0.3j, -0.5 + 0.2j)
        vac = vacuum_framing_grid(ctx, A, grid)
        gauge = gauge_equivalent(vac, dress_framing(g, vac))
    return StabilizerResult(res < tol, res, variation, gauge)


def centralizer_loop(ctx, A, coeffs, b0=None):
    """Dressing element exp(p(lambda)) with p valued in the centralizer of A.

    ``coeffs`` maps n >= 1 to complex weights over the grade-(n mod k) part of
    the centralizer; ``b0`` is an optional constant in the B-algebra part of it.
    """
    alg = ctx.algebra
    terms = {}
    for n, weights in coeffs.items():
        basis = graded_centralizer_basis(alg, A, n)
        if not len(basis):
            continue
        terms[n] = sum(w * b for w, b in zip(weights, basis))
    if b0 is not None:
        terms[0] = b0
    rho = LoopElement.from_coeffs(ctx, terms)
    return DressingElement.from_generator(rho)


def graded_centralizer_basis(alg, A, ell, center_only=False):
    """Orthonormal basis of the grade-ell part of the centralizer (or its centre)."""
    base = centralizer(A, center_only=center_only)
    if not base:
        return []
    proj = np.array([alg.grade_project(b, ell).reshape(-1) for b in base])
    u, s, vh = np.linalg.svd(proj)
    r = int(np.sum(s > 1e-8))
    return [vh[i].reshape(alg.n, alg.n) for i in range(r)]
