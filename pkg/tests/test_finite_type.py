import numpy as np
import pytest

from loopdress.errors import ConfigurationError, DomainError
from loopdress.factorization import DressingElement, patch_grid, vacuum_framing_grid
from loopdress.finite_type import (
    AKSStructure,
    finite_type_witness,
    framing_from_killing_field,
    integrate_killing_field,
    killing_field_via_symes,
    lax_rhs,
    spectral_invariants,
)
from loopdress.lie import frob, sigma, su2, su3_k3
from loopdress.loops import LoopContext, LoopElement

from support import A2, finite_type_seed, random_killing_seed

GRID = (0j, 0.5, 0.4 + 0.6j, -0.7j)


@pytest.fixture
def ctx():
    return LoopContext(su2())


def vacuum_field(ctx):
    return LoopElement.from_coeffs(ctx, {-1: A2, 1: sigma(A2)})


def test_degree_must_match_the_twist():
    with pytest.raises(ConfigurationError):
        AKSStructure(su2(), 2)
    with pytest.raises(ConfigurationError):
        AKSStructure(su3_k3(), 2)
    AKSStructure(su3_k3(), 4)
    with pytest.raises(DomainError):
        AKSStructure(su2(), 1, variant="other")


def test_lax_rhs_vanishes_on_the_vacuum(ctx):
    dz, dzbar = lax_rhs(vacuum_field(ctx), AKSStructure(ctx.algebra, 1))
    assert dz.norm() < 1e-15 and dzbar.norm() < 1e-15


def test_lax_rhs_rejects_out_of_band_input(ctx):
    xi = LoopElement.from_coeffs(ctx, {-3: A2, 3: sigma(A2)})
    with pytest.raises(DomainError):
        lax_rhs(xi, AKSStructure(ctx.algebra, 1))


def test_vacuum_killing_field_is_constant_and_gives_the_vacuum(ctx):
    aks = AKSStructure(ctx.algebra, 1)
    h = 1e-3
    grid = patch_grid([0.3 + 0.2j], h)
    kf = integrate_killing_field(vacuum_field(ctx), aks, grid)
    for z in kf.z_grid:
        assert (kf(z) - vacuum_field(ctx)).norm() < 1e-12
    F = framing_from_killing_field(kf, aks, h=h)
    V = vacuum_framing_grid(ctx, A2, grid)
    for z in F.z_grid:
        assert (F(z) - V(z)).norm() < 1e-8


@pytest.mark.parametrize("alg_factory, d", [(su2, 1), (su2, 3), (su3_k3, 4)])
def test_lax_and_symes_routes_agree(alg_factory, d):
    alg = alg_factory()
    ctx = LoopContext(alg)
    rng = np.random.default_rng(40 + d)
    xi0 = random_killing_seed(ctx, d, rng, scale=1.5)
    aks = AKSStructure(alg, d)
    kf = integrate_killing_field(xi0, aks, GRID)
    ks = killing_field_via_symes(xi0, aks, GRID)
    assert max((kf(z) - ks(z)).norm() for z in kf.z_grid) < 1e-6
    assert spectral_invariants(kf).drift < 1e-8


@pytest.mark.parametrize("variant", ["plus", "minus"])
@pytest.mark.parametrize("alg_factory, d", [(su2, 3), (su3_k3, 4)])
def test_alternative_r_maps_disagree_with_symes(alg_factory, d, variant):
    # at d = 1 in su(2) the grade-zero coefficient is compact and "plus" coincides with the derived map
    ctx = LoopContext(alg_factory())
    xi0 = random_killing_seed(ctx, d, np.random.default_rng(12), scale=1.5)
    ks = killing_field_via_symes(xi0, AKSStructure(ctx.algebra, d), GRID)
    kf = integrate_killing_field(xi0, AKSStructure(ctx.algebra, d, variant), GRID, drift_tol=np.inf)
    assert max((kf(z) - ks(z)).norm() for z in kf.z_grid) > 1e-2


def test_witness_examples(ctx):
    w = finite_type_witness(DressingElement.identity(ctx), A2, 1)
    assert w.feasible and (w.xi - vacuum_field(ctx)).norm() < 1e-10
    b = DressingElement.constant(ctx, np.diag([1.3, 1 / 1.3]))
    w = finite_type_witness(b, A2, 1)
    assert not w.feasible and w.residual > 1e-3 and frob(w.obstruction) > 0


def test_witness_validates_degree(ctx):
    with pytest.raises(ConfigurationError):
        finite_type_witness(DressingElement.identity(ctx), A2, 2)
    small = LoopContext(su2(), trunc=4)
    with pytest.raises(ConfigurationError):
        finite_type_witness(DressingElement.identity(small), A2, 3)


def test_dressed_constant_killing_field_has_a_witness():
    fctx, A, h, w = finite_type_seed(su2(), np.random.default_rng(3))
    assert w.feasible
    assert frob(w.xi.coeff(-1) - h.loop.coeff(0) @ A @ np.linalg.inv(h.loop.coeff(0))) < 1e-8
