import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from loopdress.errors import DomainError
from loopdress.factorization import dress_framing, gauge_equivalent, vacuum_framing_grid
from loopdress.lie import frob, su2, su3_k3
from loopdress.loops import LoopContext, LoopElement, exp_loop, invert
from loopdress.orbits import centralizer_loop
from loopdress.unitons import (
    E_MINUS,
    E_PLUS,
    GroupCaseContext,
    gamma_conjugate,
    group_map_from_framing,
    loop_det,
    nilpotent_normal_form,
    sl2_exp,
    uniton_classify,
    unitarity_defect,
)

from support import A2, E_UP

seeds = st.integers(0, 2 ** 32 - 1)


@pytest.fixture
def ctx():
    return LoopContext(su2())


# -- closed-form exponential ------------------------------------------------------------

def test_sl2_exp_examples():
    assert frob(sl2_exp(np.zeros((2, 2))) - np.eye(2)) == 0
    assert frob(sl2_exp(E_UP) - (np.eye(2) + E_UP)) < 1e-15
    t = 0.7
    assert frob(sl2_exp(A2, t) - np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])) < 1e-15
    with pytest.raises(DomainError):
        sl2_exp(np.eye(2))
    with pytest.raises(DomainError):
        sl2_exp(np.zeros((3, 3)))


@given(seeds, st.floats(1e-9, 6.0))
def test_sl2_exp_matches_expm(seed, scale):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    M[1, 1] = -M[0, 0]
    M *= scale / frob(M)
    assert frob(sl2_exp(M) - scipy.linalg.expm(M)) < 1e-12 * max(1.0, np.exp(scale))


# -- determinant test -------------------------------------------------------------------

def test_det_examples(ctx):
    N2 = 2 * ctx.trunc
    det = loop_det(LoopElement.from_coeffs(ctx, {-1: A2}))
    assert abs(det[N2 - 2] - 1) < 1e-15 and np.sum(np.abs(np.delete(det, N2 - 2))) == 0
    assert np.all(loop_det(LoopElement.from_coeffs(ctx, {-1: E_UP})) == 0)
    with pytest.raises(DomainError):
        loop_det(LoopElement.zeros(LoopContext(su3_k3())))


def test_classify_examples(ctx):
    assert uniton_classify(LoopElement.from_coeffs(ctx, {-1: A2})).verdict == "infinite"
    v = uniton_classify(LoopElement.from_coeffs(ctx, {-1: E_UP}))
    assert v.finite and v.d_estimate == 1
    with pytest.raises(DomainError):
        uniton_classify(LoopElement.zeros(LoopContext(su3_k3())))
    with pytest.raises(DomainError):
        uniton_classify(LoopElement.from_coeffs(ctx, {-3: E_UP}))


def test_dressing_preserves_the_verdict(ctx):
    g = exp_loop(LoopElement.from_coeffs(ctx, {0: np.diag([0.3, -0.3]), 1: 0.2 * E_UP.T}))
    for eta in (LoopElement.from_coeffs(ctx, {-1: A2}), LoopElement.from_coeffs(ctx, {-1: E_UP})):
        moved = (g @ eta @ invert(g)).with_flavor("algebra").band_limit(-1, ctx.trunc)
        assert uniton_classify(moved).verdict == uniton_classify(eta).verdict


def test_gamma_conjugation_removes_the_pole():
    gc = GroupCaseContext()
    eta = LoopElement.from_coeffs(gc.ctx, {-1: E_UP, 0: np.diag([0.5, -0.5]), 1: E_MINUS})
    out = gamma_conjugate(eta)
    assert out.is_power_series()
    lam = 0.3 + 0.2j
    gam = np.diag([1, 1 / lam])
    assert frob(out.evaluate(lam) - gam @ eta.evaluate(lam) @ np.linalg.inv(gam)) < 1e-13


# -- nilpotent normal form ---------------------------------------------------------------

@pytest.mark.parametrize("X, target", [(E_UP, E_PLUS), (E_MINUS, E_MINUS), (3 * E_UP, E_PLUS),
                                       (np.array([[0, 0], [2j, 0]]), E_MINUS)])
def test_nilpotent_normal_form_examples(X, target):
    t, c = nilpotent_normal_form(X)
    assert frob(t - target) == 0
    assert abs(np.linalg.det(c) - 1) < 1e-13
    assert frob(c @ X @ np.linalg.inv(c) - t) < 1e-13
    assert abs(c[0, 1]) + abs(c[1, 0]) < 1e-15


@given(seeds)
def test_nilpotent_normal_form_generic(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    w = np.array([-v[1], v[0]])  # w^T v = 0 makes v w^T nilpotent
    X = np.outer(v, w)
    t, c = nilpotent_normal_form(X)
    assert frob(c @ X @ np.linalg.inv(c) - t) < 1e-10 * max(1.0, frob(X))


def test_nilpotent_normal_form_rejects():
    with pytest.raises(DomainError):
        nilpotent_normal_form(np.zeros((2, 2)))
    with pytest.raises(DomainError):
        nilpotent_normal_form(A2)


# -- group case --------------------------------------------------------------------------

def test_group_map_of_trivial_framing_is_identity():
    gc = GroupCaseContext()
    F = vacuum_framing_grid(gc.ctx, np.zeros((2, 2)), (0j, 0.5))
    phi = group_map_from_framing(F)
    assert all(frob(m - np.eye(2)) < 1e-14 for m in phi.values())


def test_vacuum_group_map_is_unitary_and_closed_form():
    gc = GroupCaseContext()
    A = 0.5 * A2
    F = vacuum_framing_grid(gc.ctx, A, (0j, 0.3 + 0.4j, -0.6j))
    phi = group_map_from_framing(F)
    assert unitarity_defect(phi) < 1e-12
    for z, m in phi.items():
        # F(lambda) = exp(z A / lambda + conj(z) lambda sigma(A)), sigma(A) = A for real A
        ref = scipy.linalg.expm(-z * A - np.conj(z) * A) @ np.linalg.inv(scipy.linalg.expm(z * A + np.conj(z) * A))
        assert frob(m - ref) < 1e-12


def test_pair_round_trip():
    gc = GroupCaseContext()
    k = exp_loop(LoopElement.from_coeffs(gc.ctx, {-1: 0.3 * E_UP, 0: np.diag([0.2j, -0.2j]), 2: 0.1 * E_MINUS}))
    pair = gc.to_pair(k)
    assert (gc.from_pair(pair) - k).norm() == 0
    assert (pair.twisted() - pair).norm() < 1e-14
    broken = LoopElement(pair.ctx, pair.coeffs + np.eye(4)[None, :, ::-1] * 1e-3, pair.flavor)
    with pytest.raises(DomainError):
        gc.from_pair(broken)


def test_centralizer_dressing_keeps_the_vacuum_verdict(ctx):
    g = centralizer_loop(ctx, A2, {1: [0.3]})
    V = vacuum_framing_grid(ctx, A2, (0j, 0.3))
    assert gauge_equivalent(V, dress_framing(g, V))
    eta = (g.loop @ LoopElement.from_coeffs(ctx, {-1: A2}) @ invert(g.loop))
    assert uniton_classify(eta.with_flavor("algebra").band_limit(-1, ctx.trunc)).verdict == "infinite"
