import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from loopdress.errors import DomainError, NotVacuumError, StructuralError, TwistError
from loopdress.factorization import (
    DressingElement,
    ExtendedFraming,
    FactorPath,
    dress_framing,
    factor_group,
    framing_residuals,
    gauge_equivalent,
    patch_grid,
    split_algebra,
    symes_framing,
    vacuum_framing_grid,
)
from loopdress.lie import frob, sigma, su2
from loopdress.loops import LoopContext, LoopElement, check_symmetries, exp_loop

from support import A2, E_UP, ALGEBRAS, random_dressing, random_loop, random_seed

seeds = st.integers(0, 2 ** 32 - 1)
names = st.sampled_from(sorted(ALGEBRAS))
SMALL_GRID = (0j, 0.4 + 0.3j, -0.5 + 0.2j)


@pytest.fixture
def ctx():
    return LoopContext(su2())


# -- algebra split -----------------------------------------------------------------

def test_split_of_constant_torus_elements(ctx):
    x = LoopElement.from_coeffs(ctx, {0: np.diag([2j, -2j]) + np.diag([2.0, -2.0])})
    e, i = split_algebra(x)
    assert frob(e.coeff(0) - np.diag([2j, -2j])) < 1e-15
    assert frob(i.coeff(0) - np.diag([2.0, -2.0])) < 1e-15


def test_split_reflects_negative_modes(ctx):
    x = LoopElement.from_coeffs(ctx, {-1: A2, 1: E_UP})
    e, i = split_algebra(x)
    assert frob(e.coeff(1) - sigma(A2)) == 0
    assert i.is_power_series()
    assert (e.sigma_reflect() - e).norm() < 1e-15


def test_split_rejects_untwisted_loop(ctx):
    with pytest.raises(TwistError):
        split_algebra(LoopElement.from_coeffs(ctx, {-1: np.diag([1.0, -1.0])}))


@given(seeds, names)
def test_split_parts_lie_in_their_subalgebras(seed, name):
    ctx = LoopContext(ALGEBRAS[name]())
    xi = random_loop(ctx, np.random.default_rng(seed), range(-3, 4), unit=False)
    e, i = split_algebra(xi)
    assert (e + i - xi).norm() < 1e-13 * xi.norm()
    assert (e.sigma_reflect() - e).norm() < 1e-13 * xi.norm()
    assert i.is_power_series()
    assert ctx.algebra.b_algebra_distance(i.coeff(0)) < 1e-13 * xi.norm()


# -- group factorization -------------------------------------------------------------

def test_factor_of_real_loop_is_itself(ctx):
    X = exp_loop(LoopElement.from_coeffs(ctx, {-1: 0.4 * A2, 1: 0.4 * sigma(A2)}))
    e, i = factor_group(X)
    assert (e - X).norm() < 1e-12
    assert (i - LoopElement.identity(ctx)).norm() < 1e-12


def test_factor_of_constant_b_is_trivial_times_b(ctx):
    b = np.array([[1.5, 0.3 + 0.2j], [0, 1 / 1.5]])
    X = LoopElement.constant(ctx, b)
    e, i = factor_group(X)
    assert (e - LoopElement.identity(ctx)).norm() < 1e-13
    assert frob(i.coeff(0) - b) < 1e-13


def test_factor_rejects_algebra_loop(ctx):
    with pytest.raises(DomainError):
        factor_group(LoopElement.from_coeffs(ctx, {0: A2}))


@settings(max_examples=10)
@given(seeds, names)
def test_factor_is_unique_and_k_stable(seed, name):
    ctx = LoopContext(ALGEBRAS[name]())
    rng = np.random.default_rng(seed)
    gamma = 0.8 * random_seed(ctx, rng, top=1)
    X = exp_loop(gamma)
    res = factor_group(X, FactorPath((gamma,)))
    e, i = res
    assert res.product_residual < 1e-10 and res.reality_residual < 1e-10
    assert i.is_power_series()
    assert ctx.algebra.b_distance(i.coeff(0)) < 1e-10
    # a second route (Newton from scratch on X k for constant k in K) agrees up to that k
    kalg = ctx.algebra.compact_part(random_loop(ctx, rng, [0], unit=True).coeff(0))
    k = LoopElement.constant(ctx, scipy.linalg.expm(kalg))
    e2, i2 = factor_group(k @ X, FactorPath((gamma, LoopElement.constant(ctx, kalg, "algebra"))))
    assert (e2 - k @ e).norm() < 1e-9
    assert (i2 - i).norm() < 1e-9


# -- framings -------------------------------------------------------------------------

def test_symes_of_zero_is_trivial(ctx):
    F = symes_framing(LoopElement.zeros(ctx), SMALL_GRID)
    for z in F.z_grid:
        assert (F(z) - LoopElement.identity(ctx)).norm() < 1e-15


def test_symes_of_vacuum_matches_closed_form(ctx):
    F = symes_framing(LoopElement.from_coeffs(ctx, {-1: A2}), SMALL_GRID)
    V = vacuum_framing_grid(ctx, A2, SMALL_GRID)
    for z in F.z_grid:
        assert (F(z) - V(z)).norm() < 1e-10


def test_symes_rejects_higher_pole(ctx):
    with pytest.raises(DomainError):
        symes_framing(LoopElement.from_coeffs(ctx, {-3: E_UP}), SMALL_GRID)


def test_vacuum_requires_commuting_seed(ctx):
    with pytest.raises(NotVacuumError):
        vacuum_framing_grid(ctx, E_UP.T, SMALL_GRID)


def test_framing_must_be_based(ctx):
    bad = {0j: LoopElement.constant(ctx, np.diag([1j, -1j]))}
    with pytest.raises(StructuralError):
        ExtendedFraming(ctx, (0j,), bad)


def test_dressing_by_identity_is_identity(ctx):
    V = vacuum_framing_grid(ctx, A2, SMALL_GRID)
    D = dress_framing(DressingElement.identity(ctx), V)
    for z in V.z_grid:
        assert (D(z) - V(z)).norm() < 1e-12


def test_constant_dressing_conjugates_the_leading_term(ctx):
    r = 1.3
    b = np.diag([r, 1 / r])
    h = 1e-3
    # the based framing has trivial gauge at z = 0, where the identity holds exactly
    V = vacuum_framing_grid(ctx, A2, patch_grid([0j, 0.3 + 0.2j], h), h=h)
    D = dress_framing(DressingElement.constant(ctx, b), V)
    rep = framing_residuals(D, h)
    am1 = rep.alpha_parts[0j]["alpha_m1"]
    assert frob(am1 - b @ A2 @ np.linalg.inv(b)) < 1e-5
    # the remaining curvature is central-difference error: it falls by 4x when h halves
    half = framing_residuals(dress_framing(DressingElement.constant(ctx, b),
                                           vacuum_framing_grid(ctx, A2, patch_grid([0j], h / 2))), h / 2)
    ratio = rep.per_center[0]["flatness"] / half.flatness_residual
    assert 3.5 < ratio < 4.5


def test_corrupted_framing_fails_flatness(ctx):
    h = 1e-3
    V = vacuum_framing_grid(ctx, A2, patch_grid([0.3 + 0.2j], h), h=h)
    values = dict(V.values)
    z = V.z_grid[-1]
    values[z] = exp_loop(LoopElement.from_coeffs(ctx, {-1: 0.01 * A2, 1: 0.01 * sigma(A2)})) @ values[z]
    bad = ExtendedFraming(ctx, V.z_grid, values, {"h": h})
    assert framing_residuals(bad, h).flatness_residual >= 1e-4
    assert framing_residuals(V, h).flatness_residual < 1e-6


def test_dressed_framings_are_real_twisted_and_based(ctx):
    rng = np.random.default_rng(5)
    g = random_dressing(ctx, rng)
    D = dress_framing(g, vacuum_framing_grid(ctx, A2, SMALL_GRID))
    assert (D(0) - LoopElement.identity(ctx)).norm() < 1e-12
    for z in D.z_grid:
        rep = check_symmetries(D(z))
        assert rep.twist_residual < 1e-10 and rep.reality_residual < 1e-10


# -- gauge equivalence ----------------------------------------------------------------------

def test_gauge_examples(ctx):
    V = vacuum_framing_grid(ctx, A2, SMALL_GRID)
    k = LoopElement.constant(ctx, np.diag(np.exp([0.4j, -0.4j])))
    Vk = ExtendedFraming(ctx, V.z_grid, {z: V(z) @ k if z != 0 else V(z) for z in V.z_grid})
    assert gauge_equivalent(V, Vk)
    b = LoopElement.constant(ctx, np.diag([1.4, 1 / 1.4]))
    Vb = ExtendedFraming(ctx, V.z_grid, {z: V(z) @ b if z != 0 else V(z) for z in V.z_grid})
    assert not gauge_equivalent(V, Vb)
    A3 = np.array([[0, 2], [-2, 0]], dtype=complex)
    assert not gauge_equivalent(V, vacuum_framing_grid(ctx, A3, SMALL_GRID))


# -- dressing action ---------------------------------------------------------------------------

def test_dressing_element_validation(ctx):
    with pytest.raises(DomainError):
        DressingElement(LoopElement.from_coeffs(ctx, {-1: E_UP, 0: np.eye(2)}, "group"))
    with pytest.raises(DomainError):
        DressingElement.constant(ctx, np.diag([1j, -1j]))
    DressingElement.constant(ctx, np.diag([1j, -1j]), strict=False)


def test_dressing_is_an_action():
    ctx = LoopContext(su2())
    rng = np.random.default_rng(11)
    g1, g2 = random_dressing(ctx, rng, 0.2), random_dressing(ctx, rng, 0.2)
    V = vacuum_framing_grid(ctx, A2, SMALL_GRID)
    lhs = dress_framing(g1.compose(g2), V)
    rhs = dress_framing(g1, dress_framing(g2, V))
    assert gauge_equivalent(lhs, rhs)
    back = dress_framing(g1.inverse(), dress_framing(g1, V))
    assert gauge_equivalent(back, V)
