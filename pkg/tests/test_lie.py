import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from loopdress.errors import DomainError, InvertibilityError
from loopdress.lie import (
    PRESETS,
    bracket,
    centralizer,
    classify_element,
    frob,
    sigma,
    su2,
    su3_k3,
)

from support import A2, E_UP, compact_part_oracle, random_grade

seeds = st.integers(0, 2 ** 32 - 1)
names = st.sampled_from(["su2", "su3_k2", "su3_k3"])


def rand_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def rand_traceless(rng, n):
    x = rand_matrix(rng, n)
    return x - np.trace(x) / n * np.eye(n)


# -- grading ---------------------------------------------------------------------

def test_su2_grading_example():
    alg = su2()
    x = E_UP
    assert frob(alg.grade_project(x, 1) - x) < 1e-15
    assert frob(alg.grade_project(x, 0)) < 1e-15


def test_su3_coxeter_elementary_matrix_has_grade_minus_one():
    alg = su3_k3()
    E12 = np.zeros((3, 3), dtype=complex)
    E12[0, 1] = 1
    # Q E12 Q^-1 = omega^-1 E12
    assert frob(alg.grade_project(E12, alg.k - 1) - E12) < 1e-14
    assert frob(alg.grade_project(E12, -1) - E12) < 1e-14
    assert alg.grade_of(E12) == 2


@given(seeds, names)
def test_projectors_are_orthogonal_idempotents(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    x = rand_traceless(rng, alg.n)
    total = np.zeros_like(x)
    for l in range(alg.k):
        pl = alg.grade_project(x, l)
        total += pl
        for m in range(alg.k):
            pm = alg.grade_project(pl, m)
            assert frob(pm - (pl if l == m else 0)) < 1e-12 * max(1, frob(x))
        # tau acts as omega^l on the image
        assert frob(alg.tau(pl) - alg.omega ** l * pl) < 1e-12 * max(1, frob(x))
    assert frob(total - x) < 1e-12 * max(1, frob(x))


@given(seeds, names)
def test_bracket_respects_grading(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    for j in range(alg.k):
        for l in range(alg.k):
            xj, xl = random_grade(alg, j, rng), random_grade(alg, l, rng)
            b = bracket(xj, xl)
            for m in range(alg.k):
                if m != (j + l) % alg.k:
                    assert frob(alg.grade_project(b, m)) < 1e-10


@given(seeds, names)
def test_sigma_is_an_involution_compatible_with_brackets(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    x, y = rand_traceless(rng, alg.n), rand_traceless(rng, alg.n)
    assert frob(sigma(sigma(x)) - x) == 0
    assert frob(sigma(bracket(x, y)) - bracket(sigma(x), sigma(y))) < 1e-12 * (1 + frob(x) * frob(y))
    for l in range(alg.k):
        xl = alg.grade_project(x, l)
        assert frob(alg.grade_project(sigma(xl), -l) - sigma(xl)) < 1e-12 * max(1, frob(x))


def test_k_and_b_split_grade_zero_dimensionally(alg):
    # k + b = g_0 with trivial intersection: real dims add up to twice the complex dim
    g0 = alg.grade_basis(0)
    vecs_k, vecs_b = [], []
    for b in alg.real_basis(0):
        vecs_k.append(alg.compact_part(b))
        vecs_b.append(b - alg.compact_part(b))
    def rank(vs):
        M = np.array([np.concatenate([v.reshape(-1).real, v.reshape(-1).imag]) for v in vs])
        return np.linalg.matrix_rank(M, tol=1e-10)
    k_dim, b_dim = rank(vecs_k), rank(vecs_b)
    assert k_dim + b_dim == 2 * len(g0)
    assert rank(vecs_k + vecs_b) == 2 * len(g0)


# -- Iwasawa ---------------------------------------------------------------------

def test_iwasawa_of_positive_diagonal():
    alg = su2()
    r = 1.7
    kK, kB = alg.iwasawa_factor(np.diag([r, 1 / r]))
    assert frob(kK - np.eye(2)) < 1e-14
    assert frob(kB - np.diag([r, 1 / r])) < 1e-14


def test_iwasawa_of_unitary():
    alg = su2()
    u = np.diag(np.exp([0.3j, -0.3j]))
    kK, kB = alg.iwasawa_factor(u)
    assert frob(kK - u) < 1e-14 and frob(kB - np.eye(2)) < 1e-14


def test_algebra_split_of_torus():
    alg = su2()
    xk, xb = alg.iwasawa_split(np.diag([2j, -2j]))
    assert frob(xk - np.diag([2j, -2j])) == 0 and frob(xb) == 0
    xk, xb = alg.iwasawa_split(np.diag([2.0, -2.0]))
    assert frob(xk) == 0 and frob(xb - np.diag([2.0, -2.0])) == 0


def test_iwasawa_rejects_off_block_and_singular():
    alg = su2()
    with pytest.raises(DomainError):
        alg.iwasawa_factor(np.array([[1, 1], [0, 1]]))
    with pytest.raises(InvertibilityError):
        alg.iwasawa_factor(np.diag([1.0, 0.0]))


@given(seeds, names)
def test_iwasawa_reconstructs_and_is_unique(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    x = scipy.linalg.expm(0.5 * random_grade(alg, 0, rng))
    kK, kB = alg.iwasawa_factor(x)
    assert frob(kK @ kB - x) < 1e-10 * frob(x)
    assert frob(kK.conj().T @ kK - np.eye(alg.n)) < 1e-10
    assert alg.b_distance(kB) < 1e-10
    kK2, kB2 = alg.iwasawa_factor(kK @ kB)
    assert frob(kK2 - kK) < 1e-10 and frob(kB2 - kB) < 1e-10


@given(seeds, names)
def test_compact_part_matches_independent_solve(seed, name):
    alg = PRESETS[name]()
    x = random_grade(alg, 0, np.random.default_rng(seed))
    assert frob(alg.compact_part(x) - compact_part_oracle(alg, x)) < 1e-12 * max(1, frob(x))


@given(seeds, names)
def test_derived_r_map_is_complex_linear_and_splits_hermitian_parts(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    x, y = random_grade(alg, 0, rng), random_grade(alg, 0, rng)
    a = complex(rng.normal(), rng.normal())
    assert frob(alg.r_map(a * x + y) - a * alg.r_map(x) - alg.r_map(y)) < 1e-12 * (1 + frob(x) + frob(y))
    # x - r(x) is block upper triangular with zero diagonal imaginary part
    assert alg.b_algebra_distance(x - alg.r_map(x) - 0.5 * np.diag(np.diag(x))) < 1e-12 * max(1, frob(x))


# -- classification ----------------------------------------------------------------

def test_classify_examples():
    c = classify_element(A2)
    assert c.kind == "semisimple" and c.regular
    assert classify_element(E_UP).kind == "nilpotent"
    c = classify_element(np.diag([0.7, -0.7]))
    assert c.kind == "semisimple" and c.regular


@given(seeds, names)
def test_classification_is_conjugation_invariant(seed, name):
    alg = PRESETS[name]()
    rng = np.random.default_rng(seed)
    x = random_grade(alg, -1, rng)
    g = scipy.linalg.expm(0.3 * rand_traceless(rng, alg.n))
    c1, c2 = classify_element(x), classify_element(g @ x @ np.linalg.inv(g))
    assert (c1.kind, c1.regular) == (c2.kind, c2.regular)


# -- centralizers ------------------------------------------------------------------

def _span_contains(basis, x):
    B = np.array([b.reshape(-1) for b in basis]).T
    coef, *_ = np.linalg.lstsq(B, x.reshape(-1), rcond=None)
    return frob(B @ coef - x.reshape(-1)) < 1e-10


def test_centralizer_examples():
    H = np.diag([1.0, -1.0]).astype(complex)
    c = centralizer(H)
    assert len(c) == 1 and _span_contains(c, H)
    assert len(centralizer(H, center_only=True)) == 1
    c = centralizer(A2)
    assert len(c) == 1 and _span_contains(c, A2)
    D = np.diag([1.0, 1.0, -2.0]).astype(complex)
    assert len(centralizer(D)) == 4
    z = centralizer(D, center_only=True)
    assert len(z) == 1 and _span_contains(z, D)


@given(seeds, names)
def test_centralizer_basis_is_orthonormal_and_commutes(seed, name):
    alg = PRESETS[name]()
    x = random_grade(alg, -1, np.random.default_rng(seed))
    if classify_element(x).kind != "semisimple":
        return
    basis = centralizer(x)
    G = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    assert np.allclose(G, np.eye(len(basis)), atol=1e-10)
    for b in basis:
        assert frob(bracket(b, x)) < 1e-8 * max(1, frob(x))
