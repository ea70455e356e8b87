"""Polynomial Killing fields, their Lax flow, and finite-type witnesses.

A Killing field of degree d is a map z -> xi(z) into loops with modes in
[-d, d], real (xi_{-n} = sigma(xi_n)) and twisted, solving

    d xi = [xi, (xi_{-d}/lambda + r(xi_{1-d})) dz + (lambda xi_d + sigma(r(xi_{1-d}))) dzbar].

The degree must satisfy d = 1 mod k so that xi_{1-d} has grade zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, DomainError, InvariantDriftError, StructuralError
from .factorization import (
    ExtendedFraming,
    normalize_grid,
    symes_framing,
    zkey,
)
from .lie import frob, sigma
from .loops import LoopElement, invert

LAX_TOL = 1e-12


@dataclass(frozen=True)
class AKSStructure:
    """Degree and r-map for the Lax flow.

    ``variant`` selects the r-map: "derived" (default) is the map that
    reproduces factored framings; "plus" and "minus" are the alternatives
    x_b +/- x_k/2, kept only so tests can show that their Killing fields
    disagree with the factored route.
    """

    algebra: object
    d: int = 1
    variant: str = "derived"

    def __post_init__(self):
        if self.d < 1 or (self.d - 1) % self.algebra.k != 0:
            raise ConfigurationError(f"degree d={self.d} must be positive and = 1 mod k={self.algebra.k}")
        if self.variant not in ("derived", "plus", "minus"):
            raise DomainError(f"unknown r-map variant {self.variant!r}")

    def r(self, x):
        if self.variant == "derived":
            return self.algebra.r_map(x)
        return self.algebra.r_variant(x, 1.0 if self.variant == "plus" else -1.0)


@dataclass(frozen=True, eq=False)
class PolynomialKillingField:
    ctx: object
    d: int
    z_grid: tuple
    values: dict

    def __call__(self, z):
        return self.values[zkey(z)]


# -- band arithmetic -------------------------------------------------------------

def _band(xi, d):
    N = xi.ctx.trunc
    return np.array(xi.coeffs[N - d: N + d + 1])


def _from_band(ctx, band):
    d = (band.shape[0] - 1) // 2
    c = np.zeros((ctx.length, ctx.n, ctx.n), dtype=complex)
    N = ctx.trunc
    c[N - d: N + d + 1] = band
    return LoopElement(ctx, c, "algebra")


def _connection_terms(aks, band):
    """(P, R) for the dz and dzbar parts, as dicts mode -> matrix."""
    low = band[0]            # xi_{-d}
    high = band[-1]          # xi_d
    mid = aks.r(band[1])     # r(xi_{1-d}), index 1 is mode 1-d
    P = {-1: low, 0: mid}
    R = {1: high, 0: sigma(mid)}
    return P, R


def _band_bracket(band, terms):
    """Bracket of a band with a short Laurent polynomial, over the band plus overflow."""
    d = (band.shape[0] - 1) // 2
    out = np.zeros((2 * d + 3,) + band.shape[1:], dtype=complex)  # modes -d-1 .. d+1
    for shift, m in terms.items():
        prod = band @ m - m @ band
        out[1 + shift: 1 + shift + 2 * d + 1] += prod
    return out


def lax_rhs(xi, aks, tol=1e-10):
    """The pair ([xi, P], [xi, R]) of dz and dzbar derivatives, checked for band overflow."""
    d = aks.d
    band = _band(xi, d)
    if float(np.sum(xi.mode_norms())) - float(np.sum(np.linalg.norm(band, axis=(1, 2)))) > tol:
        raise DomainError(f"xi has modes outside the band |n| <= {d}")
    P, R = _connection_terms(aks, band)
    out = []
    for terms in (P, R):
        full = _band_bracket(band, terms)
        overflow = frob(full[0]) + frob(full[-1])
        if overflow > tol * max(1.0, float(np.max(np.linalg.norm(band, axis=(1, 2)))) ** 2):
            raise StructuralError(f"Lax bracket leaves the band (overflow {overflow:.2e})")
        out.append(_from_band(xi.ctx, full[1:-1]))
    return tuple(out)


def _ray_rhs(aks, z, shape, perturb=None):
    def rhs(t, y):
        band = y.reshape(shape)
        P, R = _connection_terms(aks, band)
        dP = _band_bracket(band, P)[1:-1]
        dR = _band_bracket(band, R)[1:-1]
        out = z * dP + np.conj(z) * dR
        if perturb is not None:
            out = out + perturb(band)
        return out.ravel()
    return rhs


def _band_invariant_defects(alg, band):
    d = (band.shape[0] - 1) // 2
    real = max(frob(band[d + n] - sigma(band[d - n])) for n in range(d + 1))
    twist = max(frob(band[i] - alg.grade_project(band[i], i - d)) for i in range(2 * d + 1))
    return real, twist


def integrate_killing_field(xi0, aks, z_grid, perturb=None, drift_tol=1e-6):
    """Integrate the Lax flow along rays from 0 to each grid point."""
    ctx = xi0.ctx
    d = aks.d
    if d > ctx.trunc:
        raise ConfigurationError("degree exceeds truncation")
    band0 = _band(xi0, d)
    real0, twist0 = _band_invariant_defects(ctx.algebra, band0)
    if max(real0, twist0) > ctx.tol * max(1.0, xi0.norm()):
        raise DomainError("initial value is not a real twisted element of the band")
    grid = normalize_grid(z_grid)
    values = {}
    for z in grid:
        if z == 0:
            values[z] = _from_band(ctx, band0)
            continue
        sol = solve_ivp(_ray_rhs(aks, z, band0.shape, perturb), (0.0, 1.0), band0.ravel(),
                        method="RK45", rtol=LAX_TOL, atol=LAX_TOL)
        band = sol.y[:, -1].reshape(band0.shape)
        real, twist = _band_invariant_defects(ctx.algebra, band)
        if perturb is None and max(real, twist) > drift_tol:
            raise InvariantDriftError(f"Lax flow drifted: reality {real:.2e}, twist {twist:.2e}")
        values[z] = _from_band(ctx, band)
    return PolynomialKillingField(ctx, d, grid, values)


def framing_from_killing_field(kf, aks, h=None, check=True):
    """Integrate F^-1 dF = alpha along rays, jointly with the Lax flow.

    F is sampled on C_eps and on the unit circle and refit from both.
    """
    ctx = kf.ctx
    m = ctx.n_samples
    n = ctx.n
    inner = ctx.eps * np.exp(2j * np.pi * np.arange(m) / m)
    outer = np.exp(2j * np.pi * np.arange(m) / m)
    lam = np.concatenate([inner, outer])
    band0 = _band(kf(0), aks.d)
    nb = band0.size
    values = {}
    for z in kf.z_grid:
        if z == 0:
            values[z] = LoopElement.identity(ctx)
            continue
        lax = _ray_rhs(aks, z, band0.shape)

        def rhs(t, y, z=z, lax=lax):
            band = y[:nb].reshape(band0.shape)
            Fs = y[nb:].reshape(2 * m, n, n)
            P, R = _connection_terms(aks, band)
            alpha = (z * (P[-1][None] / lam[:, None, None] + P[0][None])
                     + np.conj(z) * (lam[:, None, None] * R[1][None] + R[0][None]))
            return np.concatenate([lax(t, y[:nb]), (Fs @ alpha).ravel()])

        F0 = np.broadcast_to(np.eye(n, dtype=complex), (2 * m, n, n))
        y0 = np.concatenate([band0.ravel(), F0.ravel()])
        sol = solve_ivp(rhs, (0.0, 1.0), y0, method="RK45", rtol=LAX_TOL, atol=LAX_TOL)
        Fs = sol.y[nb:, -1].reshape(2 * m, n, n)
        values[z] = LoopElement.from_two_circles(ctx, Fs[:m], Fs[m:], "group")
    return ExtendedFraming(ctx, kf.z_grid, values, {"kind": "lax", "h": h})


def killing_field_via_symes(xi0, aks, z_grid, polish=True, band_tol=1e-8):
    """xi(z) = F(z)^-1 xi0 F(z) for F the factored framing of lambda^(d-1) xi0."""
    ctx = xi0.ctx
    d = aks.d
    eta = xi0.shift(d - 1)
    if frob(eta.coeffs[: ctx.trunc - 1].reshape(-1)) > 0:
        raise DomainError("lambda^(d-1) xi0 has a pole of order above 1")
    if float(np.sum(xi0.mode_norms())) - float(np.sum(eta.mode_norms())) > 1e-12 * max(1.0, xi0.norm()):
        raise ConfigurationError("truncation too small to hold lambda^(d-1) xi0")
    F = symes_framing(eta, z_grid, polish=polish)
    values = {}
    for z in F.z_grid:
        Fz = F(z)
        xi = (invert(Fz) @ xi0 @ Fz).with_flavor("algebra")
        mags = xi.mode_norms()
        outside = float(np.sum(mags[np.abs(xi.ctx.indices) > d]))
        if outside > band_tol * max(1.0, xi0.norm()):
            raise StructuralError(f"conjugated field leaves the band (mass {outside:.2e})")
        values[z] = xi.band_limit(-d, d)
    kf = PolynomialKillingField(ctx, d, F.z_grid, values)
    return kf


@dataclass(frozen=True)
class SpectralReport:
    values: dict
    drift: float


def spectral_invariants(kf):
    """Laurent coefficients of tr(xi^j), j = 2..n, at each grid point, with their drift."""
    n = kf.ctx.n
    out = {}
    for z in kf.z_grid:
        xi = kf(z)
        power = xi
        per = {}
        for j in range(2, n + 1):
            power = (power @ xi).with_flavor("algebra")
            per[j] = np.einsum("mii->m", power.coeffs)
        out[z] = per
    drift = 0.0
    for j in range(2, n + 1):
        stack = np.array([out[z][j] for z in kf.z_grid])
        drift = max(drift, float(np.max(np.abs(stack - stack[0]))))
    return SpectralReport(out, drift)


# -- finite-type witness ---------------------------------------------------------

@dataclass(frozen=True)
class WitnessResult:
    feasible: bool
    xi: LoopElement | None
    residual: float
    obstruction: np.ndarray
    near_threshold: bool

    def __bool__(self):
        return self.feasible


WITNESS_THRESHOLD = 1e-8


def finite_type_witness(g, A, d, threshold=WITNESS_THRESHOLD):
    """Least-squares search for xi in the degree-d band commuting with Ad g (A / lambda).

    Reality fixes the negative modes; xi_{-d} is pinned to Ad g(0) A.
    """
    ctx = g.ctx
    alg = ctx.algebra
    N = ctx.trunc
    if d < 1 or (d - 1) % alg.k != 0:
        raise ConfigurationError(f"degree d={d} must be = 1 mod k")
    if N < 2 * d + 2:
        raise ConfigurationError(f"truncation {N} too small for degree {d}")
    A = np.asarray(A, dtype=complex)
    loop = g.loop if hasattr(g, "loop") else g
    ginv = invert(loop)
    mu = (loop @ LoopElement.from_coeffs(ctx, {-1: A}) @ ginv).coeffs  # Ad g (A / lambda)
    top = N - d  # constraint modes -d-1 .. top
    g0 = loop.coeff(0)
    low = g0 @ A @ np.linalg.inv(g0)

    # rows carry the annulus weights, so growth of disk-factor coefficients
    # beyond the working radius does not swamp the fit
    row_w = ctx.weights[N - d - 1: N + top + 1][:, None, None]

    def commutator(band):
        # band: modes -d..d; product with mu restricted to modes -d-1..top
        out = np.zeros((top + d + 2, ctx.n, ctx.n), dtype=complex)
        for i, xn in enumerate(band):
            n = i - d
            if not xn.any():
                continue
            for j in range(ctx.length):
                mm = j - N
                tot = n + mm
                if -d - 1 <= tot <= top and mu[j].any():
                    out[tot + d + 1] += xn @ mu[j] - mu[j] @ xn
        return out * row_w

    def assemble(params_by_mode):
        band = np.zeros((2 * d + 1, ctx.n, ctx.n), dtype=complex)
        for n, x in params_by_mode.items():
            band[d + n] += x
            if n > 0:
                band[d - n] += sigma(x)
        return band

    fixed = assemble({})
    fixed[0] = low
    fixed[-1] = sigma(low)
    const = commutator(fixed).reshape(-1)
    cols, labels = [], []
    for n in range(0, d):
        for b in alg.real_basis(n):
            x = 0.5 * (b + sigma(b)) if n == 0 else b
            if frob(x) < 1e-12:
                continue
            cols.append(commutator(assemble({n: x})).reshape(-1))
            labels.append((n, x))
    if cols:
        M = np.array(cols).T
        Mr = np.vstack([M.real, M.imag])
        cr = np.concatenate([const.real, const.imag])
        p, *_ = np.linalg.lstsq(Mr, -cr, rcond=None)
        resid_vec = Mr @ p + cr
    else:
        p = np.zeros(0)
        resid_vec = np.concatenate([const.real, const.imag])
    residual = float(np.linalg.norm(resid_vec))
    band = fixed.copy()
    for coef, (n, x) in zip(p, labels):
        band = band + coef * assemble({n: x})
    xi = _from_band(ctx, band)
    res_c = resid_vec[: resid_vec.size // 2] + 1j * resid_vec[resid_vec.size // 2:]
    res_c = res_c.reshape(top + d + 2, ctx.n, ctx.n)
    obstruction = res_c[2 * d] / row_w[2 * d]  # mode d - 1
    feasible = residual < threshold
    near = threshold / 10 <= residual < threshold * 10
    return WitnessResult(feasible, xi if feasible else None, residual, obstruction, near)
