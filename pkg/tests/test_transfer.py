import math

import numpy as np
import pytest

import oracles
from hyperdrift.dynamics import dinf_cocycle
from hyperdrift.errors import DegenerateInputError, ModelMismatchError
from hyperdrift.markov import MarkovKernel, markov_operator_apply
from hyperdrift.models import INFINITY, FreeWord, H2Boundary, H2Model, SL2Isometry, TreeModel
from hyperdrift.transfer import (
    BoundaryGrid,
    GridFunction,
    ObservedSystem,
    SkewTransfer,
    avg_holder_const,
    holder_norm,
    holder_seminorm,
    interpolation_slack,
    irreducibility_heuristic,
    laplace_markov_apply,
    log_holder_seminorm,
    snap_slack,
)

A, B = FreeWord.parse("a"), FreeWord.parse("b")


def ab_system(p=0.5, q=0.5):
    """Two states; entering state 0 applies a, entering state 1 applies b."""
    K = MarkovKernel.two_state(p, q)
    return ObservedSystem(K, {(0, 0): A, (1, 0): A, (0, 1): B, (1, 1): B}, TreeModel())


def test_grid_basics():
    g = BoundaryGrid(TreeModel(), 2)
    assert len(g) == 12
    assert g.mesh == 0.25
    assert g.min_separation == 0.5
    for i, c in enumerate(g.cells):
        assert g.snap(c) == i
    h = BoundaryGrid(H2Model(), 8)
    assert h.snap(INFINITY) == h.cells.index(INFINITY)
    assert 0 < h.mesh < h.min_separation


def test_grid_function_validation():
    g = BoundaryGrid(TreeModel(), 1)
    with pytest.raises(ValueError):
        GridFunction(np.zeros((2, 3)), g)
    with pytest.raises(ValueError):
        GridFunction(np.full((1, 4), np.nan), g)
    f = GridFunction.constant(g, 2, 3.0)
    assert f.sup() == 3.0
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_skew_transfer_preserves_constants():
    sys = ab_system(0.3, 0.6)
    for model_grid in (BoundaryGrid(TreeModel(), 3),):
        f = GridFunction.constant(model_grid, 2, 1.0)
        assert np.allclose(laplace_markov_apply(sys, 0.0, f).values, 1.0)


def test_skew_transfer_hand_computed():
    # cells at depth 1 are the rays a^∞, b^∞, a⁻^∞, b⁻^∞
    sys = ab_system(0.3, 0.6)
    g = BoundaryGrid(TreeModel(), 1)
    heads = [c.head(1)[0] for c in g.cells]
    idx = {x: heads.index(x) for x in (1, 2, -1, -2)}
    vals = np.zeros((2, 4))
    for x, v in zip((1, 2, -1, -2), (1.0, 2.0, 3.0, 4.0)):
        vals[0, idx[x]] = v
        vals[1, idx[x]] = 10 * v
    f = GridFunction(vals, g)
    out = laplace_markov_apply(sys, 0.0, f).values
    # a⁻ sends a^∞ to itself and every other cell into a⁻; same for b
    a_inv = {1: 1, 2: -1, -1: -1, -2: -1}
    b_inv = {1: -2, 2: 2, -1: -2, -2: -2}
    K = sys.kernel.rows
    for s in (0, 1):
        for x in (1, 2, -1, -2):
            want = K[s, 0] * vals[0, idx[a_inv[x]]] + K[s, 1] * vals[1, idx[b_inv[x]]]
            assert out[s, idx[x]] == pytest.approx(want, abs=1e-15)


def test_single_state_weight():
    g0 = SL2Isometry.diag(math.sqrt(2))
    sys = ObservedSystem(MarkovKernel([[1.0]]), {(0, 0): g0}, H2Model())
    grid = BoundaryGrid(H2Model(), 4)
    f = GridFunction(np.array([[1.0, 2.0, 3.0, 4.0]]), grid)
    z = 0.5
    out = laplace_markov_apply(sys, z, f).values[0]
    m = sys.model
    for j, xi in enumerate(grid.cells):
        src = grid.snap(m.act(g0.inverse(), xi))
        from hyperdrift.geometry import horofunction_eval

        w = math.e ** (z * horofunction_eval(grid.ctx, xi, m.act(g0, m.basepoint)))
        assert out[j] == pytest.approx(f.values[0, src] * w, rel=1e-12)


def test_complex_z_and_domain():
    sys = ab_system()
    g = BoundaryGrid(TreeModel(), 2)
    f = GridFunction.constant(g, 2)
    Q = SkewTransfer(sys, g, c=1.0)
    out = Q.apply(f, 0.5j)
    assert np.iscomplexobj(out.values)
    with pytest.raises(DegenerateInputError):
        Q.apply(f, 1.5)
    with pytest.raises(ModelMismatchError):
        SkewTransfer(sys, BoundaryGrid(H2Model(), 4))


def test_reduces_to_markov_operator_on_state_functions():
    sys = ab_system(0.2, 0.7)
    g = BoundaryGrid(TreeModel(), 2)
    v = np.array([1.5, -0.5])
    f = GridFunction.from_states(g, v)
    Q = SkewTransfer(sys, g)
    h = f
    w = v
    for _ in range(4):
        h = Q.apply(h)
        w = markov_operator_apply(sys.kernel, w)
        assert np.allclose(h.values, w[:, None], atol=1e-14)


def test_holder_seminorm_against_loops():
    rng = np.random.default_rng(2)
    g = BoundaryGrid(TreeModel(), 2)
    for _ in range(20):
        vals = rng.normal(size=(2, len(g)))
        f = GridFunction(vals, g)
        for alpha in (0.0, 0.3, 1.0):
            ref = oracles.holder_seminorm_loops(vals, g.D, alpha)
            assert holder_seminorm(f, alpha) == pytest.approx(ref, rel=1e-12)
            assert log_holder_seminorm(f, alpha) == pytest.approx(math.log(ref), abs=1e-12)
    assert holder_seminorm(GridFunction.constant(g, 2), 0.5) == 0
    assert holder_norm(GridFunction.constant(g, 2, -2.0), 0.5) == 2.0
    with pytest.raises(ValueError):
        holder_seminorm(GridFunction.constant(g, 1), 1.5)


def test_distance_function_is_lipschitz():
    for grid in (BoundaryGrid(TreeModel(), 2), BoundaryGrid(H2Model(), 12)):
        for k in range(len(grid)):
            f = GridFunction(grid.D[k][None, :].copy(), grid)
            assert holder_seminorm(f, 1.0) <= 1 + 1e-12


def test_interpolation_slack_nonnegative():
    rng = np.random.default_rng(3)
    g = BoundaryGrid(TreeModel(), 2)
    for _ in range(100):
        f = GridFunction(rng.normal(size=(1, len(g))), g)
        a0, a1, a2 = sorted(rng.uniform(0, 1, 3))
        assert interpolation_slack(f, a0, a1, a2) >= -1e-12
    with pytest.raises(ValueError):
        interpolation_slack(f, 0.5, 0.2, 0.9)


def test_identity_cocycle_holder_constant_is_one():
    e = FreeWord((), 2)
    sys = ObservedSystem(MarkovKernel([[1.0]]), {(0, 0): e}, TreeModel())
    g = BoundaryGrid(TreeModel(), 2)
    for n in (1, 3):
        assert avg_holder_const(sys, n, 0.7, 10, 1, g).value == pytest.approx(1.0, abs=1e-15)
        assert avg_holder_const(sys, n, 0.7, 0, 1, g, exact=True).value == 1.0


def test_holder_constant_exact_vs_monte_carlo():
    sys = ab_system()
    g = BoundaryGrid(TreeModel(), 4)
    ex = avg_holder_const(sys, 3, 0.5, 0, 1, g, exact=True)
    assert ex.exact_net
    assert ex.std_error == 0
    mc = avg_holder_const(sys, 3, 0.5, 20000, 1, g)
    assert abs(mc.value - ex.value) < 4 * mc.std_error + 1e-12
    with pytest.raises(ValueError):
        avg_holder_const(sys, 0, 0.5, 10, 1, g)
    with pytest.raises(ValueError):
        avg_holder_const(sys, 1, 0.0, 10, 1, g)


def test_holder_constant_below_dinf_for_small_alpha():
    sys = ab_system(0.3, 0.4)
    g = BoundaryGrid(TreeModel(), 4)
    d = dinf_cocycle(sys.cocycle())
    for n in (1, 2, 3):
        alpha = 0.9 / n
        assert avg_holder_const(sys, n, alpha, 0, 1, g, exact=True).value <= d


def test_holder_constant_decays():
    sys = ab_system()
    g = BoundaryGrid(TreeModel(), 6)
    ns = list(range(2, 11))
    ks = [avg_holder_const(sys, n, 0.5, 4000, 1, g).value for n in ns]
    assert np.polyfit(ns, np.log(ks), 1)[0] < 0


def test_contraction_transfer():
    sys = ab_system(0.3, 0.4)
    g = BoundaryGrid(TreeModel(), 5)
    Q = SkewTransfer(sys, g)
    rng = np.random.default_rng(0)
    slack = snap_slack(g, 0.5)
    for n in (1, 2, 3):
        k = avg_holder_const(sys, n, 0.5, 0, 1, g, exact=True).value
        for _ in range(20):
            f = GridFunction(rng.normal(size=(2, len(g))), g)
            h = f
            for _ in range(n):
                h = Q.apply(h)
            assert holder_seminorm(h, 0.5) <= k * holder_seminorm(f, 0.5) * (1 + slack)


def test_irreducibility_verdicts():
    g0 = SL2Isometry.diag(math.sqrt(2))
    h2 = ObservedSystem(MarkovKernel([[1.0]]), {(0, 0): g0}, H2Model())
    v = irreducibility_heuristic(h2, BoundaryGrid(H2Model(), 8))
    assert v.kind == "reducible"
    assert v.witness[0] in (INFINITY, H2Boundary(0.0))

    tree = ObservedSystem(MarkovKernel([[1.0]]), {(0, 0): A}, TreeModel())
    v = irreducibility_heuristic(tree, BoundaryGrid(TreeModel(), 4))
    assert v.kind == "reducible"
    assert v.witness[0].head(4) == (1, 1, 1, 1)

    v = irreducibility_heuristic(ab_system(), BoundaryGrid(TreeModel(), 6))
    assert v.kind == "irreducible-evidence"
    assert v.resolution == 6


def test_observed_system_checks_map():
    with pytest.raises(ValueError):
        ObservedSystem(MarkovKernel.two_state(0.5, 0.5), {(0, 0): A}, TreeModel())
    sys = ab_system(0.2, 0.3)
    assert sys.mu.weights == pytest.approx([0.6, 0.4])
    assert sys.cocycle().m == 2
