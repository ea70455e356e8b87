"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from loopdress.factorization import DressingElement, split_algebra
from loopdress.lie import frob, sigma, su2, su3_k2, su3_k3
from loopdress.loops import LoopContext, LoopElement
from loopdress.orbits import normalize_semisimple, untangle_to_vacuum
from loopdress.finite_type import finite_type_witness

A2 = np.array([[0, 1], [-1, 0]], dtype=complex)
E_UP = np.array([[0, 1], [0, 0]], dtype=complex)
E_DOWN = np.array([[0, 0], [1, 0]], dtype=complex)

ALGEBRAS = {"su2": su2, "su3_k2": su3_k2, "su3_k3": su3_k3}


def random_grade(alg, ell, rng):
    B = alg.grade_basis(ell)
    if not len(B):
        return np.zeros((alg.n, alg.n), dtype=complex)
    w = rng.normal(size=len(B)) + 1j * rng.normal(size=len(B))
    return np.tensordot(w, B, axes=1)


def random_loop(ctx, rng, modes, unit=True):
    """Random twisted algebra loop on ``modes``; unit l1 norm when ``unit``."""
    terms = {m: random_grade(ctx.algebra, m, rng) for m in modes}
    x = LoopElement.from_coeffs(ctx, terms, "algebra")
    if unit:
        x = (1.0 / float(np.sum(x.mode_norms()))) * x
    return x


def random_seed(ctx, rng, top=2):
    """Pole-order-one seed with modes -1..top, unit l1 norm."""
    return random_loop(ctx, rng, range(-1, top + 1))


def random_vacuum(alg, rng):
    """Unit-norm A in grade -1 with [A, sigma A] = 0, from a random semisimple seed."""
    X = random_grade(alg, -1, rng)
    A = normalize_semisimple(alg, X)[0].A
    return A / frob(A)


def random_killing_seed(ctx, d, rng, scale=1.0):
    """Real twisted element of the degree-d band with l1 norm ``scale``."""
    alg = ctx.algebra
    half = {}
    for n in range(0, d + 1):
        x = random_grade(alg, n, rng)
        if n == 0:
            x = 0.5 * (x + sigma(x))
        half[n] = x
    total = sum(frob(v) * (2 if n else 1) for n, v in half.items())
    full = {}
    for n, v in half.items():
        full[n] = v * scale / total
        if n:
            full[-n] = sigma(v) * scale / total
    return LoopElement.from_coeffs(ctx, full)


def b_part(alg, x):
    """B-algebra part of a grade-zero matrix."""
    return split_algebra_constant(alg, x)[1]


def split_algebra_constant(alg, x):
    ctx = LoopContext(alg)
    e, i = split_algebra(LoopElement.constant(ctx, x, "algebra"), check_twist=False)
    return e.coeff(0), i.coeff(0)


def random_dressing(ctx, rng, scale=0.3, top=2):
    """exp(rho) with rho on modes 0..top and rho_0 in the B-algebra."""
    alg = ctx.algebra
    terms = {}
    for m in range(0, top + 1):
        x = random_grade(alg, m, rng)
        if m == 0:
            x = b_part(alg, x)
        terms[m] = x
    rho = LoopElement.from_coeffs(ctx, terms, "algebra")
    rho = (scale / float(np.sum(rho.mode_norms()))) * rho
    return DressingElement.from_generator(rho)


def finite_type_seed(alg, rng, c0_scale=0.15):
    """A dressed vacuum h with a degree-one witness.

    eta = A / lambda + c0 + lambda sigma(A) is a constant Killing field; the
    inverse of its untangling element carries the vacuum to it.  Its disk
    factors have branch points inside the unit disk, so the context uses a
    smaller outer radius.
    """
    ctx = LoopContext(alg, eps=0.5, outer=0.5, trunc=40)
    A = random_vacuum(alg, rng)
    c0 = random_grade(alg, 0, rng)
    c0 = c0_scale * (c0 + sigma(c0))
    eta = LoopElement.from_coeffs(ctx, {-1: A, 0: c0, 1: sigma(A)})
    h = untangle_to_vacuum(eta).g.inverse()
    w = finite_type_witness(h, A, 1)
    return ctx, A, h, w


def compact_part_oracle(alg, x):
    """k-part of a block-diagonal x by solving x = k + b over the reals.

    k ranges over traceless skew-hermitian block-diagonal matrices, b over
    traceless block-upper-triangular matrices with real diagonal.  Blocks are
    the runs of equal diagonal entries of Q (all presets are diagonal).
    """
    n = alg.n
    q = np.diag(alg.Q)
    same = np.isclose(q[:, None], q[None, :])
    kb, bb = [], []
    for i in range(n):
        for j in range(n):
            if not same[i, j]:
                continue
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1
            if i < j:
                kb.append(E - E.T)
                kb.append(1j * (E + E.T))
                bb.append(E)
                bb.append(1j * E)
            elif i == j:
                kb.append(1j * E)
                bb.append(E)
    M = np.array([np.concatenate([v.reshape(-1).real, v.reshape(-1).imag]) for v in kb + bb]).T
    rhs = np.concatenate([x.reshape(-1).real, x.reshape(-1).imag])
    coef, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    k = sum(c * v for c, v in zip(coef[: len(kb)], kb))
    return k


def expm_stack(M):
    return np.array([scipy.linalg.expm(m) for m in M])
