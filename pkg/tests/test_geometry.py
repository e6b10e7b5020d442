import math

import pytest

import oracles
from hyperdrift.errors import DegenerateInputError, ModelMismatchError
from hyperdrift.geometry import (
    GeometryContext,
    check_four_point,
    conformal_ratio_residual,
    default_net,
    gromov_product,
    group_distance_lower,
    horofunction_eval,
    horofunction_translate,
    rho_metric,
    visual_metric,
)
from hyperdrift.models import INFINITY, FreeWord, H2Boundary, H2Model, H2Point, SL2Isometry, TreeBoundary, TreeModel


def W(text):
    return FreeWord.parse(text)


def E(text):
    return TreeBoundary.parse(text)


@pytest.fixture
def tctx():
    return GeometryContext(TreeModel(2, 2.0))


@pytest.fixture
def hctx():
    return GeometryContext(H2Model())


def test_context_rejects_large_b():
    with pytest.raises(ValueError):
        GeometryContext(H2Model(), b=3.0)
    GeometryContext(TreeModel(2, 50.0))


def test_gromov_examples(tctx, hctx):
    assert gromov_product(tctx, W("a b"), W("a b⁻"), W("ε")) == 1
    p, q = H2Point(0.5, 2.0), H2Point(-1.0, 0.3)
    assert gromov_product(hctx, p, p, q) == pytest.approx(hctx.model.distance(p, q))
    assert gromov_product(hctx, p, q, p) == 0
    two_i = H2Point(0, 2)
    assert gromov_product(hctx, two_i, two_i, H2Point(0, 1)) == pytest.approx(math.log(2), abs=1e-15)


def test_gromov_infinite_for_equal_ends(tctx, hctx):
    assert gromov_product(tctx, E("( a )"), E("( a )")) == math.inf
    assert gromov_product(hctx, INFINITY, INFINITY) == math.inf


def test_gromov_mixed_models_rejected(tctx):
    with pytest.raises(ModelMismatchError):
        gromov_product(tctx, W("a"), H2Point(0, 1))


def test_gromov_brute_force_tree(tctx, rng):
    m = tctx.model
    for _ in range(500):
        x, z, w = (m.random_point(rng) for _ in range(3))
        s = [oracles.letters_to_str(p.letters) for p in (x, z, w)]
        ref = 0.5 * (oracles.word_distance(s[0], s[2]) + oracles.word_distance(s[2], s[1]) - oracles.word_distance(s[0], s[1]))
        assert gromov_product(tctx, x, z, w) == ref


def test_h2_boundary_gromov_is_limit_of_interior(hctx, rng):
    m = hctx.model
    for _ in range(100):
        xi, eta = m.random_boundary(rng), m.random_boundary(rng)
        if xi == eta:
            continue
        exact = gromov_product(hctx, xi, eta)
        from hyperdrift.geometry import geodesic_point

        approx = gromov_product(hctx, geodesic_point(hctx, xi, 25.0), geodesic_point(hctx, eta, 25.0))
        assert exact == pytest.approx(approx, abs=1e-6)


def test_four_point_examples(tctx, hctx):
    assert check_four_point(hctx, H2Point(0, 1), H2Point(1, 1), H2Point(2, 1), H2Point(0, 3)) >= 0
    z = H2Point(0.2, 0.9)
    assert check_four_point(hctx, z, z, z, z) == hctx.delta
    w = W("a b")
    assert check_four_point(tctx, w, w, w, w) == 0


def test_rho_examples(tctx):
    assert rho_metric(tctx, E("( a )"), E("( b )")) == 1.0
    assert rho_metric(tctx, E("( a )"), E("( a )")) == 0.0
    assert rho_metric(tctx, E("( a )"), E("a ( b )")) == 0.5


def test_visual_metric_examples(hctx, tctx):
    z = H2Point(0.0, 1.0)
    w = H2Point(0.0, math.exp(1e-6))
    assert visual_metric(hctx, z, w) == pytest.approx(1e-6, rel=1e-6)
    assert visual_metric(hctx, INFINITY, INFINITY) == 0
    xi, eta = H2Boundary(0.0), INFINITY
    assert visual_metric(hctx, xi, eta) == rho_metric(hctx, xi, eta)
    assert visual_metric(tctx, E("( a )"), E("a ( b )")) == 0.5


def test_visual_metric_bounded(hctx, rng):
    m = hctx.model
    for _ in range(300):
        x = m.random_point(rng) if rng.random() < 0.5 else m.random_boundary(rng)
        y = m.random_point(rng) if rng.random() < 0.5 else m.random_boundary(rng)
        v = visual_metric(hctx, x, y)
        assert 0 <= v <= 1


def test_horofunction_examples(tctx, hctx):
    a_inf = E("( a )")
    assert horofunction_eval(tctx, a_inf, W("a a a")) == -3
    assert horofunction_eval(tctx, a_inf, W("b b b")) == 3
    assert horofunction_eval(tctx, a_inf, W("ε")) == 0
    assert horofunction_eval(hctx, H2Boundary(2.0), H2Point(0, 1)) == pytest.approx(0, abs=1e-15)


def test_horofunction_h2_against_limit(hctx, rng):
    m = hctx.model
    for _ in range(50):
        xi = m.random_boundary(rng)
        z = m.random_point(rng, 0.5)
        ref = oracles.busemann_limit(xi.xi, z.z, r=30.0)
        assert horofunction_eval(hctx, xi, z) == pytest.approx(ref, abs=1e-6)


def test_horofunction_translate_examples(tctx, hctx):
    a_inf = E("( a )")
    z = W("a a a")
    assert horofunction_translate(tctx, W("ε"), a_inf, z) == horofunction_eval(tctx, a_inf, z)
    assert horofunction_translate(tctx, W("a"), a_inf, z) == -3
    g = SL2Isometry.diag(math.sqrt(2))
    lhs = horofunction_translate(hctx, g, INFINITY, H2Point(0, 1))
    rhs = horofunction_eval(hctx, hctx.model.act(g, INFINITY), H2Point(0, 1))
    assert abs(lhs - rhs) < 1e-9
    # Busemann at infinity is -ln Im z, normalized at i
    z3 = H2Point(0, 3)
    assert horofunction_translate(hctx, g, INFINITY, z3) == pytest.approx(-math.log(3), abs=1e-12)


def test_horofunction_equivariance(tctx, hctx, rng):
    for ctx, tol in ((tctx, 0), (hctx, 1e-9)):
        m = ctx.model
        for _ in range(300):
            g = m.random_isometry(rng)
            xi = m.random_boundary(rng)
            z = m.random_point(rng) if m.name == "tree" else m.random_point(rng, 1.0)
            a = horofunction_translate(ctx, g, xi, z)
            b = horofunction_eval(ctx, m.act(g, xi), z)
            assert abs(a - b) <= tol * max(1.0, abs(a))


def test_conformal_examples(tctx, hctx, rng):
    xi, eta = E("( b )"), E("( b⁻ )")
    assert conformal_ratio_residual(tctx, W("ε"), xi, eta) == 0
    assert conformal_ratio_residual(tctx, W("a"), xi, eta) == 0
    with pytest.raises(DegenerateInputError):
        conformal_ratio_residual(tctx, W("a"), xi, xi)
    m = hctx.model
    for _ in range(200):
        g = m.random_isometry(rng)
        xi, eta = m.random_boundary(rng), m.random_boundary(rng)
        assert conformal_ratio_residual(hctx, g, xi, eta) < 1e-9


def test_group_distance_examples(tctx):
    net = tctx.model.boundary_net(3)
    assert group_distance_lower(tctx, W("a b"), W("a b"), net) == 0
    coarse = group_distance_lower(tctx, W("a"), W("b"), tctx.model.boundary_net(1))
    fine = group_distance_lower(tctx, W("a"), W("b"), tctx.model.boundary_net(1) + net)
    assert coarse <= fine
    with pytest.raises(ValueError):
        group_distance_lower(tctx, W("a"), W("b"), [])


def test_group_distance_depth3_bruteforce(tctx):
    # every reduced word of length 3 continued by its last letter, done with strings
    best = 0.0
    for s in oracles.all_reduced(2, 3):
        ray = s + s[-1] * 60
        for g1, g2 in (("a", "b"), ("A", "B")):
            u, v = oracles.reduce_word(g1 + ray), oracles.reduce_word(g2 + ray)
            cp = next(i for i in range(min(len(u), len(v))) if u[i] != v[i])
            best = max(best, 2.0 ** (-cp))
    assert group_distance_lower(tctx, W("a"), W("b"), tctx.model.boundary_net(3)) == best


def test_default_net_contains_interior_and_boundary(tctx, hctx):
    for ctx in (tctx, hctx):
        net = default_net(ctx, 4)
        assert any(ctx.model.is_point(p) for p in net)
        assert any(ctx.model.is_boundary(p) for p in net)
