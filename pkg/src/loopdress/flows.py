"""Commuting flows on the dressing orbit of a vacuum.

Generators are loops valued in the centre of the centralizer of A.  A flow
acts on the disk factor of a dressing element: exp(t zeta) . [g] = [(g exp(t zeta))_I].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .factorization import DressingElement, FactorPath, factor_group, split_algebra
from .finite_type import finite_type_witness
from .lie import frob
from .loops import LoopElement, exp_loop, invert, tail_norm
from .orbits import graded_centralizer_basis, stabilizer_membership

RANK_REL_TOL = 1e-9
RANK_GRAY = 1e-6
RANK_ABS_FLOOR = 1e-11


@dataclass(frozen=True, eq=False)
class FlowGenerator:
    """zeta = sum_n lambda^n c_n with c_n in the grade-(n mod k) part of the centre z_A.

    ``coeffs`` maps a mode n >= -pole_order to weights over ``basis(n)``.
    """

    A: np.ndarray
    alg: object
    pole_order: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        for n in self.coeffs:
            if n < -self.pole_order:
                raise DomainError(f"mode {n} exceeds pole order {self.pole_order}")
            if len(self.coeffs[n]) != len(self.basis(n)):
                raise DomainError(f"mode {n}: expected {len(self.basis(n))} weights")

    def basis(self, n):
        return graded_centralizer_basis(self.alg, self.A, n % self.alg.k, center_only=True)

    def to_loop(self, ctx):
        terms = {}
        for n, weights in self.coeffs.items():
            if len(weights):
                terms[n] = sum(w * b for w, b in zip(weights, self.basis(n)))
        return LoopElement.from_coeffs(ctx, terms, "algebra")

    @classmethod
    def random(cls, alg, A, pole_order, rng, top=None, scale=0.3):
        """Random complex weights on modes -pole_order..top (default pole_order)."""
        top = pole_order if top is None else top
        A = np.asarray(A, dtype=complex)
        proto = cls(A, alg, pole_order)
        coeffs = {}
        for n in range(-pole_order, top + 1):
            size = len(proto.basis(n))
            if size:
                coeffs[n] = scale * (rng.normal(size=size) + 1j * rng.normal(size=size)) / np.sqrt(2)
        return cls(A, alg, pole_order, coeffs)

    @classmethod
    def vacuum_direction(cls, alg, A):
        """zeta = A / lambda + lambda sigma(A); its real flow translates the vacuum in z."""
        A = np.asarray(A, dtype=complex)
        proto = cls(A, alg, 1)
        coeffs = {}
        for n, target in ((-1, A), (1, -A.conj().T)):
            basis = proto.basis(n)
            w = np.array([np.vdot(b, target) for b in basis])
            if frob(sum(wi * b for wi, b in zip(w, basis)) - target) > 1e-10 * max(1.0, frob(A)):
                raise DomainError("A is not in the centre of its own centralizer")
            coeffs[n] = w
        return cls(A, alg, 1, coeffs)


def _as_loop(zeta, ctx):
    return zeta.to_loop(ctx) if isinstance(zeta, FlowGenerator) else zeta.with_flavor("algebra")


def _conjugate(g, x, g_inv=None):
    g_inv = invert(g) if g_inv is None else g_inv
    return (g @ x @ g_inv).with_flavor("algebra")


def flow_apply(g, zeta, t, use_e_factor=False, polish=True):
    """Disk factor of g exp(t zeta), as a new DressingElement.

    The path is exp(s t Ad g(zeta)) g for s in [0, 1], starting from the split
    E = I, I = g.  ``use_e_factor`` returns the annulus factor instead (used
    only as a negative control; the result is a bare loop).
    """
    ctx = g.ctx
    z = _as_loop(zeta, ctx)
    if t == 0:
        return g
    gen = (t * _conjugate(g.loop, z)).with_flavor("algebra")
    X = g.loop @ exp_loop((t * z).with_flavor("algebra"))
    res = factor_group(X, FactorPath((gen,), start_i=g.loop), polish=polish)
    if use_e_factor:
        return res
    return DressingElement(res.i, (), strict=True)


# -- coset comparisons ---------------------------------------------------------

def coset_residual(g1, g2, A, m=32):
    """How far g1^-1 g2 is from stabilizing A on the inner disk."""
    # both factors are power series; negative modes of the product are roundoff
    gamma = (invert(g1.loop) @ g2.loop).power_part().with_flavor("group")
    return stabilizer_membership(gamma, A, m=m).residual


def flow_commutator_residual(g, zeta1, zeta2, s, t, A):
    """Coset distance between flow(zeta1, s) after flow(zeta2, t) and the reverse order."""
    a = flow_apply(flow_apply(g, zeta2, t), zeta1, s)
    b = flow_apply(flow_apply(g, zeta1, s), zeta2, t)
    return coset_residual(a, b, A)


@dataclass(frozen=True)
class TranslationReport:
    residual: float
    per_z: dict


def vacuum_translation_check(g, A, t, z_grid):
    """Flowing by the vacuum direction for real time t translates the vacuum.

    With zeta = A/lambda + lambda sigma(A), g exp(t zeta) = E' g' gives
    (g' F(z))_E = E'^-1 (g F(z + t))_E for the vacuum F, with no gauge freedom.
    """
    from .factorization import vacuum_framing

    ctx = g.ctx
    t = float(t)
    zeta = FlowGenerator.vacuum_direction(ctx.algebra, A)
    res = flow_apply(g, zeta, t, use_e_factor=True)
    e_flow, g_new = res.e, DressingElement(res.i, (), strict=True)
    gens, gens_new = tuple(g.path_generators()), tuple(g_new.path_generators())
    per_z = {}
    for z in z_grid:
        z = complex(z)
        F_shift = vacuum_framing(ctx, A, z + t)
        F_here = vacuum_framing(ctx, A, z)
        lhs = factor_group(g_new.loop @ F_here, FactorPath(gens_new, start_e=F_here), polish=True).e
        rhs = factor_group(g.loop @ F_shift, FactorPath(gens, start_e=F_shift), polish=True).e
        per_z[z] = (e_flow @ lhs - rhs).norm()
    return TranslationReport(max(per_z.values()), per_z)


# -- orbit dimension probe --------------------------------------------------------

@dataclass(frozen=True)
class RankProbeResult:
    ranks: tuple
    singular_values: tuple
    ambiguous: tuple
    finite_type: bool
    period: int

    def stabilized_at(self):
        """First m with r(m) = r(m + k) = r(m + 2k), or None."""
        k = self.period
        r = self.ranks
        for m in range(len(r) - 2 * k):
            if r[m] == r[m + k] == r[m + 2 * k]:
                return m
        return None


def _zeta_slice(ctx, A, m):
    alg = ctx.algebra
    cols = []
    for n in range(-m, 1):
        for b in graded_centralizer_basis(alg, A, n % alg.k, center_only=True):
            for w in (1.0, 1j):
                cols.append(LoopElement.from_coeffs(ctx, {n: w * b}, "algebra"))
    return cols


def orbit_rank_probe(g, A, m_max):
    """Ranks r(m), m = 0..m_max, of zeta -> [Ad g^-1 (Ad g zeta)_I, A] on pole order <= m.

    Composing with [., A] quotients by the tangent space of the stabilizer.
    Only modes 0..N - 2 m_max - 1 are used: higher ones see the truncation.
    """
    ctx = g.ctx
    N = ctx.trunc
    if m_max > N // 2:
        raise ConfigurationError(f"m_max={m_max} exceeds half the truncation {N}")
    cut = N - 2 * m_max - 1
    A = np.asarray(A, dtype=complex)
    loop = g.loop if hasattr(g, "loop") else g
    g_inv = invert(loop)
    ranks, svals, amb = [], [], []
    for m in range(m_max + 1):
        rows = []
        for z in _zeta_slice(ctx, A, m):
            _, i_part = split_algebra(_conjugate(loop, z, g_inv), check_twist=False)
            y = _conjugate(g_inv, i_part, loop).coeffs
            w = ctx.outer ** np.arange(cut + 1)
            c = ((y @ A - A @ y)[N: N + cut + 1] * w[:, None, None]).reshape(-1)
            rows.append(np.concatenate([c.real, c.imag]))
        if not rows:
            ranks.append(0)
            svals.append(np.zeros(0))
            amb.append(False)
            continue
        s = np.linalg.svd(np.array(rows), compute_uv=False)
        top = float(s[0]) if s.size else 0.0
        thresh = max(RANK_REL_TOL * top, RANK_ABS_FLOOR)
        ranks.append(int(np.sum(s > thresh)))
        svals.append(s)
        amb.append(bool(np.any((s > thresh) & (s < RANK_GRAY * top))))
    k = ctx.algebra.k
    probe = RankProbeResult(tuple(ranks), tuple(svals), tuple(amb), False, k)
    return RankProbeResult(probe.ranks, probe.singular_values, probe.ambiguous,
                           probe.stabilized_at() is not None, k)


# -- finite type under flows -----------------------------------------------------

@dataclass(frozen=True)
class StabilityReport:
    passed: bool
    band_residual: float
    leading_residual: float
    commutator_residual: float
    xi_hat: LoopElement

    def __bool__(self):
        return self.passed


def od_stability_check(g, zeta, A, d, t=1.0, tol=1e-7, use_e_factor=False, witness=None):
    """Transport the degree-d witness of g to the flowed point and verify it.

    xi_hat = Ad g_hat Ad g^-1 xi with g_hat = (g exp(t zeta))_I must lie in the
    degree-d band, have lambda^-d coefficient Ad g_hat(0) A and commute with
    Ad g_hat (A / lambda).
    """
    ctx = g.ctx
    A = np.asarray(A, dtype=complex)
    if witness is None:
        w = finite_type_witness(g, A, d)
        if not w.feasible:
            raise DomainError(f"g has no degree-{d} witness (residual {w.residual:.2e})")
        xi = w.xi
    else:
        xi = witness
    if use_e_factor:
        g_hat = flow_apply(g, zeta, t, use_e_factor=True).e
    else:
        g_hat = flow_apply(g, zeta, t).loop
    g_hat_inv = invert(g_hat)
    moved = _conjugate(invert(g.loop), xi, g.loop)
    xi_hat = _conjugate(g_hat, moved, g_hat_inv)
    band = tail_norm(xi_hat, d, weighted=True)
    h0 = g_hat.coeff(0)
    lead = frob(xi_hat.coeff(-d) - h0 @ A @ np.linalg.inv(h0))
    mu = _conjugate(g_hat, LoopElement.from_coeffs(ctx, {-1: A}), g_hat_inv)
    comm = (xi_hat @ mu - mu @ xi_hat).with_flavor("algebra")
    keep = ctx.trunc - d - 1  # modes beyond this mix with the truncation
    mags = comm.mode_norms() * ctx.weights
    N = ctx.trunc
    comm_res = float(np.sum(mags[N - d - 1: N + keep + 1]))
    passed = band < tol and lead < tol and comm_res < tol
    return StabilityReport(passed, band, lead, comm_res, xi_hat)

