import math

import numpy as np
import pytest

import oracles
from hyperdrift.errors import ModelMismatchError
from hyperdrift.models import (
    INFINITY,
    FreeWord,
    H2Boundary,
    H2Model,
    H2Point,
    ScaledSL2,
    SL2Isometry,
    TreeBoundary,
    TreeModel,
    boundary_net,
    h2_distance,
    make_model,
    sl2_act,
    sl2_displacement,
    tree_act,
    tree_distance,
)
from hyperdrift.models.h2 import busemann, disk_angle, from_disk_angle

SQ2 = math.sqrt(2.0)


def W(text, k=2):
    return FreeWord.parse(text, k)


# ---------------------------------------------------------------- H²


def test_h2_distance_examples():
    assert h2_distance(H2Point(0, 1), H2Point(0, 2)) == pytest.approx(math.log(2), abs=1e-15)
    z = H2Point(0.3, 0.7)
    assert h2_distance(z, z) == 0.0
    assert h2_distance(H2Point(0, 1), H2Point(1, 1)) == pytest.approx(math.acosh(1.5), rel=1e-14)


def test_h2_distance_matches_two_formulas(h2, rng):
    for _ in range(500):
        p, q = h2.random_point(rng, 1.0), h2.random_point(rng, 1.0)
        d = h2_distance(p, q)
        assert d == pytest.approx(oracles.h2_dist_arccosh(p.z, q.z), rel=1e-9, abs=1e-9)
        assert d == pytest.approx(oracles.h2_dist_disk(p.z, q.z), rel=1e-8, abs=1e-8)
        assert d == h2_distance(q, p)


def test_h2_point_requires_upper_half_plane():
    with pytest.raises(ValueError):
        H2Point(0.0, 0.0)
    with pytest.raises(ValueError):
        H2Point(1.0, -2.0)


def test_sl2_determinant_checked():
    with pytest.raises(ValueError):
        SL2Isometry(2.0, 0.0, 0.0, 1.0)
    g = SL2Isometry(2.0, 0.0, 0.0, 0.5)
    assert g.a * g.d - g.b * g.c == 1.0


def test_sl2_act_examples():
    g = SL2Isometry.diag(SQ2)
    w = sl2_act(g, H2Point(0, 1))
    assert w.re == 0 and w.im == pytest.approx(2.0, rel=1e-15)
    assert sl2_act(g, INFINITY) == INFINITY
    assert sl2_act(g, H2Boundary(0.0)) == H2Boundary(0.0)
    z = H2Point(0.4, 2.5)
    assert sl2_act(SL2Isometry.identity(), z) == z


def test_sl2_act_matches_mobius_and_is_isometric(h2, rng):
    for _ in range(300):
        g = h2.random_isometry(rng)
        p, q = h2.random_point(rng, 1.0), h2.random_point(rng, 1.0)
        gp = sl2_act(g, p)
        ref = oracles.mobius((g.a, g.b, g.c, g.d), p.z)
        assert gp.re == pytest.approx(ref.real, rel=1e-9, abs=1e-9)
        assert gp.im == pytest.approx(ref.imag, rel=1e-9)
        assert h2_distance(gp, sl2_act(g, q)) == pytest.approx(h2_distance(p, q), rel=1e-9, abs=1e-9)


def test_sl2_boundary_pole_and_large_points():
    g = SL2Isometry(1.0, 0.0, 1.0, 1.0)  # z / (z + 1)
    assert sl2_act(g, H2Boundary(-1.0)) == INFINITY
    assert sl2_act(g, INFINITY) == H2Boundary(1.0)
    big = sl2_act(g, H2Boundary(1e300))
    assert big.xi == pytest.approx(1.0)


def test_sl2_group_laws(h2, rng):
    for _ in range(200):
        g, h = h2.random_isometry(rng), h2.random_isometry(rng)
        p = h2.random_point(rng, 1.0)
        a = sl2_act(g @ h, p)
        b = sl2_act(g, sl2_act(h, p))
        assert h2_distance(a, b) < 1e-8
        back = sl2_act(g.inverse(), sl2_act(g, p))
        assert h2_distance(back, p) < 1e-8


def test_displacement_examples_and_norm(h2, rng):
    assert sl2_displacement(SL2Isometry.identity()) == 0.0
    assert sl2_displacement(SL2Isometry.diag(SQ2)) == pytest.approx(math.log(2), abs=1e-15)
    for _ in range(500):
        g = h2.random_isometry(rng)
        d = sl2_displacement(g)
        assert abs(d - h2_distance(sl2_act(g, H2Point(0, 1)), H2Point(0, 1))) < 1e-9
        assert d == pytest.approx(2 * math.log(oracles.sl2_norm_svd([g.a, g.b, g.c, g.d])), abs=1e-9)


def test_scaled_product_matches_plain_product(h2, rng):
    gs = [h2.random_isometry(rng) for _ in range(12)]
    plain = SL2Isometry.identity()
    scaled = ScaledSL2()
    for g in gs:
        plain = plain @ g
        scaled.mul(g)
    assert scaled.displacement() == pytest.approx(sl2_displacement(plain), rel=1e-10)
    back = scaled.to_isometry()
    for x, y in zip((back.a, back.b, back.c, back.d), (plain.a, plain.b, plain.c, plain.d)):
        assert x == pytest.approx(y, rel=1e-9, abs=1e-9 * abs(plain.a))


def test_scaled_product_survives_overflow_horizon():
    g = SL2Isometry.diag(SQ2)
    p = ScaledSL2()
    for _ in range(5000):
        p.mul(g)
    assert p.displacement() == pytest.approx(5000 * math.log(2), rel=1e-12)


def test_busemann_against_ray_limit(h2, rng):
    # normalized busemann h_xi(z) = B(xi, z) - B(xi, i)
    for _ in range(50):
        xi = h2.random_boundary(rng)
        z = h2.random_point(rng, 0.5)
        ref = oracles.busemann_limit(xi.xi, z.z, r=30.0)
        val = busemann(xi, z) - busemann(xi, H2Point(0, 1))
        assert val == pytest.approx(ref, abs=1e-6)


def test_disk_angle_round_trip(rng):
    for _ in range(100):
        t = float(rng.uniform(0.01, 2 * math.pi - 0.01))
        assert disk_angle(from_disk_angle(t)) == pytest.approx(t, abs=1e-12)
    assert from_disk_angle(0.0) == INFINITY


def test_h2_parse_and_str_round_trip(h2, rng):
    for _ in range(20):
        g = h2.random_isometry(rng)
        assert SL2Isometry.parse(str(g)) == g
        xi = h2.random_boundary(rng)
        assert H2Boundary.parse(str(xi)) == xi
    assert H2Boundary.parse("∞") == INFINITY


def test_h2_boundary_net():
    net = boundary_net(H2Model(), 4)
    assert set(net) == {INFINITY, H2Boundary(-1.0), H2Boundary(0.0), H2Boundary(1.0)}
    assert len(boundary_net(H2Model(), 7)) == 7


# ---------------------------------------------------------------- tree


def test_tree_distance_examples():
    assert tree_distance(W("a b"), W("a b⁻")) == 2
    assert tree_distance(W("ε"), W("a a a a a")) == 5
    u = W("a b⁻ a")
    assert tree_distance(u, u) == 0


def test_tree_distance_against_reduction(tree, rng):
    for _ in range(2000):
        u, w = tree.random_point(rng), tree.random_point(rng)
        ref = oracles.word_distance(oracles.letters_to_str(u.letters), oracles.letters_to_str(w.letters))
        assert tree_distance(u, w) == ref


def test_tree_rank_mismatch():
    with pytest.raises(ModelMismatchError):
        tree_distance(W("a"), FreeWord.parse("a", 3))
    with pytest.raises(ModelMismatchError):
        tree_act(W("a"), FreeWord.parse("c", 3))


def test_free_word_validation():
    with pytest.raises(ValueError):
        FreeWord((1, -1))
    with pytest.raises(ValueError):
        FreeWord((3,), 2)
    assert FreeWord.reduce([1, 2, -2, -1, 1]) == W("a")
    assert str(W("ε")) == "ε"


def test_tree_act_examples(tree):
    w = W("b a⁻ b")
    assert tree_act(W("ε"), w) == w
    assert tree_act(W("a"), W("a⁻ b")) == W("b")
    a_inf = TreeBoundary((), (1,))
    assert tree_act(W("a"), a_inf) == a_inf


def test_tree_action_is_isometric_and_associative(tree, rng):
    for _ in range(1000):
        g, h = tree.random_isometry(rng), tree.random_isometry(rng)
        p, q = tree.random_point(rng), tree.random_point(rng)
        assert tree.distance(tree_act(g, p), tree_act(g, q)) == tree.distance(p, q)
        assert tree_act(g * h, p) == tree_act(g, tree_act(h, p))
        assert tree_act(g.inverse(), tree_act(g, p)) == p


def test_boundary_action_matches_truncations(tree, rng):
    for _ in range(300):
        g = tree.random_isometry(rng)
        xi = tree.random_boundary(rng)
        gxi = tree_act(g, xi)
        L = 40
        trunc = FreeWord._raw(xi.head(L), 2)
        img = tree_act(g, trunc).letters
        # the image of a long truncation agrees with g·xi far out
        assert img[: L - len(g)] == gxi.head(L - len(g))


def test_tree_boundary_canonical_form():
    a = TreeBoundary((1, 2), (1, 2))
    b = TreeBoundary((), (1, 2, 1, 2))
    assert a == b
    assert TreeBoundary((1, 1, 1), (1,)) == TreeBoundary((), (1,))
    with pytest.raises(ValueError):
        TreeBoundary((1,), (-1,))
    with pytest.raises(ValueError):
        TreeBoundary((), (1, -1))


def test_tree_boundary_parse_round_trip(tree, rng):
    for _ in range(100):
        xi = tree.random_boundary(rng)
        assert TreeBoundary.parse(str(xi)) == xi
    assert TreeBoundary.parse("a b ( a )").head(5) == (1, 2, 1, 1, 1)


def test_tree_end_gromov_is_common_prefix(tree, rng):
    for _ in range(500):
        xi, eta = tree.random_boundary(rng), tree.random_boundary(rng)
        g = tree.gromov(xi, eta, tree.basepoint)
        hx, he = xi.head(200), eta.head(200)
        cp = next((i for i in range(200) if hx[i] != he[i]), math.inf)
        assert g == cp


def test_tree_boundary_net_sizes(tree):
    assert len(boundary_net(tree, 1)) == 4
    assert len(boundary_net(tree, 2)) == 12
    assert len(boundary_net(TreeModel(3), 3)) == 6 * 5 * 5
    heads = {xi.head(3) for xi in boundary_net(tree, 3)}
    assert len(heads) == 36


def test_random_word_is_uniform(tree):
    rng = np.random.default_rng(1)
    counts = {}
    for _ in range(24000):
        w = str(tree.random_word(rng, 2))
        counts[w] = counts.get(w, 0) + 1
    assert len(counts) == 12
    # 12 cells, 2000 expected each; 5 sigma is about 220
    assert all(abs(c - 2000) < 220 for c in counts.values())


def test_make_model():
    assert make_model("h2") == H2Model()
    assert make_model("tree", k=3, b=3.0) == TreeModel(3, 3.0)
    with pytest.raises(ValueError):
        make_model("sphere")
    with pytest.raises(ValueError):
        TreeModel(2, 1.0)
