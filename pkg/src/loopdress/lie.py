"""Finite-dimensional graded matrix Lie algebras.

An algebra is sl(n, C) with compact real form su(n) and a finite-order inner
automorphism ``tau(X) = Q X Q^-1``.  All structure (grading, the K^C = K B
Iwasawa data, the r-map used by Lax flows) is computed in the eigenbasis of
``Q`` ordered so that equal eigenvalues are contiguous.  In that basis K^C is
block diagonal and B is upper triangular with positive diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import (
    DomainError,
    IndeterminateError,
    InvertibilityError,
    RankAmbiguityError,
)

SEMISIMPLE_RESIDUAL = 1e-8
SEMISIMPLE_GRAY = 1e-6
EIGVEC_COND_MAX = 1e6
RANK_RTOL = 1e-9
RANK_GRAY = 1e-6


def bracket(x, y):
    return x @ y - y @ x


def sigma(x):
    """Real-form involution X -> -X^dagger (broadcasts over leading axes)."""
    return -np.conj(np.swapaxes(x, -1, -2))


def theta(g):
    """Group Cartan involution g -> (g^dagger)^-1."""
    return np.linalg.inv(np.conj(np.swapaxes(g, -1, -2)))


def frob(x):
    return float(np.linalg.norm(x))


@dataclass(frozen=True, eq=False)
class GradedLieAlgebra:
    """sl(n) with an order-k inner automorphism given by the conjugator ``Q``."""

    n: int
    k: int
    Q: np.ndarray
    name: str = ""
    tol: float = 1e-10
    _basis: np.ndarray = field(init=False, repr=False)
    _grades: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=complex)
        if Q.shape != (self.n, self.n):
            raise DomainError(f"Q must be {self.n}x{self.n}, got {Q.shape}")
        if self.k < 1:
            raise DomainError("order k must be positive")
        Qk = np.linalg.matrix_power(Q, self.k)
        scale = Qk[0, 0] if abs(Qk[0, 0]) > 0 else 1.0
        if np.linalg.norm(Qk - scale * np.eye(self.n)) > 1e-10 * max(1.0, abs(scale)):
            raise DomainError("Q^k must be proportional to the identity")
        # Q is normal (unitary up to scale), so its complex Schur form is diagonal.
        T, Z = scipy.linalg.schur(Q, output="complex")
        evals = np.diag(T)
        ref = evals[0]
        steps = np.angle(evals / ref) * self.k / (2 * np.pi)
        grades = np.mod(np.rint(steps).astype(int), self.k)
        if np.max(np.abs(steps - np.rint(steps))) > 1e-8:
            raise DomainError("eigenvalue ratios of Q must be k-th roots of unity")
        order = np.argsort(grades, kind="stable")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "_basis", Z[:, order])
        object.__setattr__(self, "_grades", grades[order])

    # -- basic structure ---------------------------------------------------
    @property
    def omega(self):
        return np.exp(2j * np.pi / self.k)

    @cached_property
    def Q_inv(self):
        return np.linalg.inv(self.Q)

    @cached_property
    def entry_grades(self):
        """Grade of each matrix unit E_ij in the adapted basis."""
        g = self._grades
        return np.mod(g[:, None] - g[None, :], self.k)

    @cached_property
    def block_mask(self):
        return self.entry_grades == 0

    def to_adapted(self, x):
        U = self._basis
        return U.conj().T @ x @ U

    def from_adapted(self, y):
        U = self._basis
        return U @ y @ U.conj().T

    def tau(self, x, power=1):
        Qp = np.linalg.matrix_power(self.Q, power % self.k)
        Qm = np.linalg.matrix_power(self.Q_inv, power % self.k)
        return Qp @ x @ Qm

    def grade_project(self, x, ell):
        """P_ell(x) = (1/k) sum_j omega^(-ell j) tau^j(x)."""
        if isinstance(ell, (float, np.floating)) and not float(ell).is_integer():
            raise DomainError("grade index must be an integer")
        ell = int(ell) % self.k
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for j in range(self.k):
            out = out + self.omega ** (-ell * j) * self.tau(x, j)
        return out / self.k

    def grade_of(self, x, tol=None):
        """Return the unique grade carrying x, or None if x is mixed or zero."""
        tol = self.tol if tol is None else tol
        scale = max(frob(x), 1e-300)
        hits = [ell for ell in range(self.k) if frob(self.grade_project(x, ell)) > tol * scale]
        return hits[0] if len(hits) == 1 else None

    # -- Iwasawa data for K^C = K B -----------------------------------------
    def off_block_mass(self, x):
        y = self.to_adapted(x)
        return frob(np.where(self.block_mask, 0, y))

    def iwasawa_factor(self, x, tol=1e-10):
        """Factor x in K^C as (k_K, k_B), k_K unitary and k_B in B."""
        x = np.asarray(x, dtype=complex)
        if self.off_block_mass(x) > tol * max(1.0, frob(x)):
            raise DomainError("element is not block diagonal, so not in K^C")
        y = np.where(self.block_mask, self.to_adapted(x), 0)
        q, r = np.linalg.qr(y)
        d = np.diag(r)
        if np.min(np.abs(d)) < 1e-14 * max(1.0, np.max(np.abs(d))):
            raise InvertibilityError("singular element cannot be factored")
        phase = d / np.abs(d)
        q = q * phase[None, :]
        r = r / phase[:, None]
        q = np.where(self.block_mask, q, 0)
        r = np.where(self.block_mask, r, 0)
        return self.from_adapted(q), self.from_adapted(r)

    def iwasawa_split(self, x, tol=1e-10):
        """Split x in k^C as x_k + x_b with x_k in su(n) and x_b in the B-algebra."""
        x = np.asarray(x, dtype=complex)
        if self.off_block_mass(x) > tol * max(1.0, frob(x)):
            raise DomainError("element is not block diagonal, so not in k^C")
        xk = self.compact_part(x)
        return xk, x - xk

    def compact_part(self, x):
        """Linear projection onto k along b; broadcasts over leading axes."""
        y = self.to_adapted(x)
        low = np.tril(y, -1) * self.block_mask
        diag = np.einsum("...ii->...i", y)
        out = low - np.conj(np.swapaxes(low, -1, -2))
        out = out + np.einsum("...i,ij->...ij", 1j * diag.imag, np.eye(self.n))
        return self.from_adapted(out)

    def r_map(self, x):
        """Complex-linear part of the compact projection on grade zero.

        r(x) = (x_k - i (i x)_k) / 2, i.e. the strictly lower block part plus
        half the diagonal.  It gives the constant term of F^-1 dF/dz for a
        framing obtained by factoring exp(z eta).
        """
        return 0.5 * (self.compact_part(x) - 1j * self.compact_part(1j * np.asarray(x)))

    def hermitian_to_b(self, h):
        """Element b of the B-algebra with b + b^dagger = h for hermitian grade-zero h."""
        y = self.to_adapted(h)
        up = np.triu(y, 1) * self.block_mask
        diag = np.einsum("...ii->...i", y).real
        return self.from_adapted(up + np.einsum("...i,ij->...ij", 0.5 * diag, np.eye(self.n)))

    def r_variant(self, x, sign):
        """Alternative candidates x_b + sign * x_k / 2 (kept for negative controls)."""
        xk = self.compact_part(x)
        return (np.asarray(x) - xk) + 0.5 * sign * xk

    def b_distance(self, g):
        """Distance of a group element from B."""
        y = self.to_adapted(g)
        d = np.diag(y)
        return (
            frob(np.where(self.block_mask, np.tril(y, -1), 0))
            + frob(np.where(self.block_mask, 0, y))
            + float(np.linalg.norm(d.imag))
            + float(np.sum(np.maximum(0.0, -d.real)))
        )

    def b_algebra_distance(self, x):
        y = self.to_adapted(x)
        return (
            frob(np.where(self.block_mask, np.tril(y, -1), 0))
            + frob(np.where(self.block_mask, 0, y))
            + float(np.linalg.norm(np.diag(y).imag))
        )

    # -- bases -------------------------------------------------------------
    @cached_property
    def sl_basis(self):
        """Orthonormal (Frobenius) complex basis of sl(n), each element graded."""
        n = self.n
        out = []
        for i in range(n):
            for j in range(n):
                if i != j:
                    e = np.zeros((n, n), complex)
                    e[i, j] = 1.0
                    out.append(self.from_adapted(e))
        for m in range(1, n):
            h = np.zeros(n)
            h[:m] = 1.0
            h[m] = -m
            h /= np.linalg.norm(h)
            out.append(self.from_adapted(np.diag(h).astype(complex)))
        return np.array(out)

    def grade_basis(self, ell):
        """Orthonormal basis of the grade-ell piece of sl(n)."""
        ell = ell % self.k
        return np.array(
            [b for b in self.sl_basis if frob(self.grade_project(b, ell)) > 0.5],
            dtype=complex,
        ).reshape(-1, self.n, self.n)

    def real_basis(self, ell):
        """Real basis of the grade-ell piece viewed as a real vector space."""
        B = self.grade_basis(ell)
        return np.concatenate([B, 1j * B]) if len(B) else B


def su2(name="su2"):
    return GradedLieAlgebra(2, 2, np.diag([1.0, -1.0]), name=name)


def su3_k2(name="su3_k2"):
    return GradedLieAlgebra(3, 2, np.diag([1.0, 1.0, -1.0]), name=name)


def su3_k3(name="su3_k3"):
    w = np.exp(2j * np.pi / 3)
    return GradedLieAlgebra(3, 3, np.diag([1.0, w, w * w]), name=name)


def sl2_untwisted(name="sl2_untwisted"):
    return GradedLieAlgebra(2, 1, np.eye(2), name=name)


PRESETS = {"su2": su2, "su3_k2": su3_k2, "su3_k3": su3_k3, "sl2_untwisted": sl2_untwisted}


# -- classification and centralizers ------------------------------------------

@dataclass(frozen=True)
class Classification:
    kind: str  # "semisimple", "nilpotent", "mixed"
    regular: bool
    reconstruction_residual: float
    eigvec_condition: float
    centralizer_dim: int


def _ad_matrix(x):
    n = x.shape[0]
    eye = np.eye(n)
    # vec in column-major order: vec(xy - yx) = (I kron x - x^T kron I) vec(y)
    return np.kron(eye, x) - np.kron(x.T, eye)


def _null_space(M, rtol=RANK_RTOL, gray=RANK_GRAY, scale=None):
    u, s, vh = np.linalg.svd(M)
    smax = scale if scale is not None else (s[0] if s.size else 0.0)
    if smax == 0.0:
        return np.conj(vh).T, s
    cols = M.shape[1]
    full = np.zeros(cols)
    full[: s.size] = s
    ambiguous = (full > rtol * smax) & (full < gray * smax)
    if np.any(ambiguous):
        raise RankAmbiguityError("singular values inside the rank gray band", singular_values=full)
    null = full <= rtol * smax
    return np.conj(vh[null]).T, full


def centralizer(x, center_only=False):
    """Orthonormal basis of ker ad x inside sl(n), or of its centre."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    ad = _ad_matrix(x)
    trace_row = np.eye(n).reshape(1, -1, order="F")
    scale = max(np.linalg.norm(ad, 2), 1.0) if frob(x) > 0 else 1.0
    M = np.vstack([ad, trace_row * scale])
    kernel, _ = _null_space(M, scale=scale)
    basis = [kernel[:, i].reshape(n, n, order="F") for i in range(kernel.shape[1])]
    if not center_only or len(basis) == 0:
        return basis
    cols = []
    for c in basis:
        cols.append(np.concatenate([bracket(c, b).reshape(-1) for b in basis]))
    C = np.array(cols).T
    cscale = max(np.linalg.norm(C, 2), 1.0)
    null, _ = _null_space(C, scale=cscale)
    centre = []
    for i in range(null.shape[1]):
        y = sum(a * b for a, b in zip(null[:, i], basis))
        centre.append(y)
    if not centre:
        return []
    # re-orthonormalize in Frobenius inner product
    V = np.array([c.reshape(-1) for c in centre]).T
    q, _ = np.linalg.qr(V)
    return [q[:, i].reshape(n, n) for i in range(q.shape[1])]


def classify_element(x):
    """Classify x as semisimple, nilpotent or mixed, and decide regularity."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[0]
    scale = max(frob(x), 1e-300)
    w, V = np.linalg.eig(x)
    cond = float(np.linalg.cond(V))
    if np.isfinite(cond) and cond < 1e15:
        recon = frob(V @ np.diag(w) @ np.linalg.inv(V) - x) / scale
    else:
        recon = np.inf
    nilpotent = frob(x) == 0 or (
        np.max(np.abs(w)) < 1e-6 * scale
        and frob(np.linalg.matrix_power(x, n)) < 1e-8 * scale ** n
    )
    if nilpotent:
        kind = "nilpotent"
    elif recon < SEMISIMPLE_RESIDUAL and cond < EIGVEC_COND_MAX:
        kind = "semisimple"
    elif recon < SEMISIMPLE_GRAY and cond < EIGVEC_COND_MAX * 100:
        raise IndeterminateError(
            f"semisimplicity indeterminate: residual {recon:.3e}, eigenvector condition {cond:.3e}"
        )
    else:
        kind = "mixed"
    basis = centralizer(x)
    regular = True
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if frob(bracket(basis[i], basis[j])) > 1e-8:
                regular = False
    return Classification(kind, regular, float(recon), cond, len(basis))
