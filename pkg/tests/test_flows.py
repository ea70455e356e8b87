import numpy as np
import pytest

from loopdress.errors import ConfigurationError, DomainError
from loopdress.factorization import DressingElement
from loopdress.flows import (
    FlowGenerator,
    coset_residual,
    flow_apply,
    flow_commutator_residual,
    od_stability_check,
    orbit_rank_probe,
    vacuum_translation_check,
)
from loopdress.lie import su2
from loopdress.loops import LoopContext
from loopdress.orbits import centralizer_loop

from support import A2, finite_type_seed, random_dressing


@pytest.fixture
def ctx():
    return LoopContext(su2())


def test_generator_validation():
    alg = su2()
    with pytest.raises(DomainError):
        FlowGenerator(A2, alg, 1, {-2: [1.0]})
    with pytest.raises(DomainError):
        FlowGenerator(A2, alg, 1, {-1: [1.0, 2.0]})
    z = FlowGenerator.vacuum_direction(alg, A2)
    loop = z.to_loop(LoopContext(alg))
    assert (loop.sigma_reflect() - loop).norm() < 1e-14


def test_vacuum_direction_translates_the_vacuum(ctx):
    g = random_dressing(ctx, np.random.default_rng(21), scale=0.2)
    rep = vacuum_translation_check(g, A2, 0.3, (0.2 + 0.1j, -0.3j))
    assert rep.residual < 1e-8


def test_flows_commute(ctx):
    rng = np.random.default_rng(22)
    g = random_dressing(ctx, rng, scale=0.3)
    z1 = FlowGenerator.random(ctx.algebra, A2, 1, rng)
    z2 = FlowGenerator.random(ctx.algebra, A2, 2, rng)
    assert flow_commutator_residual(g, z1, z2, 0.4, 0.3, A2) < 1e-6


def test_zero_time_and_stabilizer_points_act_trivially(ctx):
    rng = np.random.default_rng(23)
    g = random_dressing(ctx, rng)
    z = FlowGenerator.random(ctx.algebra, A2, 1, rng)
    assert flow_apply(g, z, 0.0) is g
    # at the base point, flows by z_A-valued loops stay in the stabilizer coset
    one = DressingElement.identity(ctx)
    assert coset_residual(one, flow_apply(one, z, 0.5), A2) < 1e-8


def test_flow_is_well_defined_on_cosets(ctx):
    rng = np.random.default_rng(24)
    g = random_dressing(ctx, rng)
    s = centralizer_loop(ctx, A2, {1: [0.2]})
    z = FlowGenerator.random(ctx.algebra, A2, 1, rng)
    a = flow_apply(g, z, 0.4)
    b = flow_apply(g.compose(s), z, 0.4)
    assert coset_residual(a, b, A2) < 1e-8


def test_rank_probe_examples(ctx):
    vac = orbit_rank_probe(DressingElement.identity(ctx), A2, 6)
    assert set(vac.ranks) == {0} and vac.finite_type
    b = DressingElement.constant(ctx, np.diag([1.2, 1 / 1.2]))
    grow = orbit_rank_probe(b, A2, 6)
    assert all(x <= y for x, y in zip(grow.ranks, grow.ranks[1:]))
    assert grow.ranks[-1] > grow.ranks[0] and not grow.finite_type


def test_rank_probe_checks_truncation(ctx):
    with pytest.raises(ConfigurationError):
        orbit_rank_probe(DressingElement.identity(ctx), A2, ctx.trunc // 2 + 1)


def test_od_stability_negative_control():
    fctx, A, h, w = finite_type_seed(su2(), np.random.default_rng(25))
    zeta = FlowGenerator.random(fctx.algebra, A, 1, np.random.default_rng(26))
    good = od_stability_check(h, zeta, A, 1, witness=w.xi)
    assert good.passed
    bad = od_stability_check(h, zeta, A, 1, witness=w.xi, use_e_factor=True)
    assert not bad.passed
