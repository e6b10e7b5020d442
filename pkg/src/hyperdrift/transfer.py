"""Operators on functions over (state, boundary cell) grids.

The boundary is discretized by a model net; a boundary point is sent to a
cell by ``snap`` (first L letters on the tree, nearest disk angle on H²).
Every inequality evaluated on a grid is reported together with the snap
error it may carry.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dynamics import Cocycle, MarkovDriver, _orbit_point, path_states, simulate
from .errors import DegenerateInputError, ModelMismatchError
from .geometry import GeometryContext, horofunction_eval, visual_metric
from .markov import stationary_measure
from .models import ScaledSL2, TreeModel
from .models.h2 import disk_angle


class BoundaryGrid:
    """Boundary net with its visual-distance matrix and a snap map."""

    def __init__(self, model, resolution):
        self.model = model
        self.resolution = int(resolution)
        self.ctx = GeometryContext(model)
        self.cells = list(model.boundary_net(self.resolution))
        N = len(self.cells)
        D = np.zeros((N, N))
        for i in range(N):
            for j in range(i + 1, N):
                D[i, j] = D[j, i] = visual_metric(self.ctx, self.cells[i], self.cells[j])
        D.setflags(write=False)
        self.D = D
        if isinstance(model, TreeModel):
            self._lookup = {c.head(self.resolution): i for i, c in enumerate(self.cells)}
            self.letters = np.array([c.head(self.resolution) for c in self.cells], dtype=np.int8)

    def __len__(self):
        return len(self.cells)

    def snap(self, xi):
        if isinstance(self.model, TreeModel):
            return self._lookup[xi.head(self.resolution)]
        N = len(self.cells)
        return int(round(disk_angle(xi) * N / (2 * math.pi))) % N

    @property
    def mesh(self):
        """Largest visual distance from a boundary point to its cell."""
        if isinstance(self.model, TreeModel):
            return self.model.b ** (-self.resolution)
        # the worst point sits halfway (in angle) between neighbouring cells
        from .models.h2 import from_disk_angle

        N = len(self.cells)
        return max(
            visual_metric(self.ctx, self.cells[j], from_disk_angle(2 * math.pi * (j + 0.5) / N)) for j in range(N)
        )

    @property
    def min_separation(self):
        D = self.D
        return float(D[~np.eye(len(self.cells), dtype=bool)].min()) if len(self.cells) > 1 else math.inf


@dataclass(frozen=True)
class GridFunction:
    """Values ``f(state, cell)`` as an ``m x N`` array."""

    values: np.ndarray
    grid: BoundaryGrid

    def __post_init__(self):
        v = np.array(self.values)
        if v.ndim != 2 or v.shape[1] != len(self.grid):
            raise ValueError(f"values must have shape (m, {len(self.grid)}), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid, m, c=1.0):
        return cls(np.full((m, len(grid)), c), grid)

    @classmethod
    def from_states(cls, grid, f):
        """Function constant in the boundary coordinate."""
        f = np.asarray(f, dtype=float)
        return cls(np.repeat(f[:, None], len(grid), axis=1), grid)

    def sup(self):
        return float(np.max(np.abs(self.values)))


class ObservedSystem:
    """Markov kernel, its stationary measure and a cocycle map over it."""

    def __init__(self, kernel, cocycle_map, model, mu=None):
        self.kernel = kernel
        self.mu = mu or stationary_measure(kernel)
        self.model = model
        self.b = model.b
        for s, t in kernel.positive():
            if (s, t) not in cocycle_map:
                raise ValueError(f"cocycle map undefined on positive transition ({s}, {t})")
        self.cocycle_map = dict(cocycle_map)

    @classmethod
    def from_cocycle(cls, c):
        return cls(c.driver.kernel, c.table, c.model)

    @property
    def m(self):
        return self.kernel.m

    def cocycle(self, mu0=None):
        return Cocycle(self.model, MarkovDriver(self.kernel, self.mu.weights if mu0 is None else mu0), self.cocycle_map)


class SkewTransfer:
    """Precomputed snap indices and horofunction weights for ``Q_{g,z}``.

    ``(Q f)(s, xi) = sum_t K(s,t) f(t, snap(g(s,t)^-1 xi)) b^(z h_xi(g(s,t) x0))``.
    """

    def __init__(self, sys, grid, c=1.0):
        if sys.model != grid.model:
            raise ModelMismatchError("system and grid use different models")
        self.sys, self.grid, self.c = sys, grid, float(c)
        model = sys.model
        x0 = model.basepoint
        self.trans = sys.kernel.positive()
        self.snap_idx, self.horo = {}, {}
        for s, t in self.trans:
            g = sys.cocycle_map[(s, t)]
            gi = model.inverse(g)
            gx0 = model.act(g, x0)
            self.snap_idx[(s, t)] = np.array([grid.snap(model.act(gi, xi)) for xi in grid.cells])
            self.horo[(s, t)] = np.array([horofunction_eval(grid.ctx, xi, gx0) for xi in grid.cells], dtype=float)

    def apply(self, f, z=0.0):
        if not isinstance(f, GridFunction) or f.grid is not self.grid:
            raise ValueError("grid function must live on the operator's grid")
        if f.values.shape[0] != self.sys.m:
            raise ValueError("grid function has the wrong number of states")
        if abs(complex(z).real) > self.c:
            raise DegenerateInputError(f"|Re z| = {abs(complex(z).real)} exceeds the configured bound {self.c}")
        K = self.sys.kernel.rows
        zc = complex(z)
        real = zc.imag == 0
        out = np.zeros(f.values.shape, dtype=float if real else complex)
        logb = math.log(self.sys.b)
        for s, t in self.trans:
            term = f.values[t, self.snap_idx[(s, t)]]
            if zc != 0:
                w = np.exp((zc.real if real else zc) * self.horo[(s, t)] * logb)
                term = term * w
            out[s] += K[s, t] * term
        return GridFunction(out, self.grid)


def laplace_markov_apply(sys, z, f, c=1.0):
    """One application of the Laplace-Markov operator (skew Markov operator at z = 0)."""
    return SkewTransfer(sys, f.grid, c).apply(f, z)


def _log_ratio_table(f, alpha):
    D = f.grid.D
    N = D.shape[0]
    off = ~np.eye(N, dtype=bool)
    diff = np.abs(f.values[:, :, None] - f.values[:, None, :])[:, off]
    return diff, np.broadcast_to(D[off], diff.shape)


def holder_seminorm(f, alpha):
    """``max_s max_{i != j} |f(s,i) - f(s,j)| / D(i,j)^alpha`` over the grid."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if len(f.grid) < 2:
        return 0.0
    diff, D = _log_ratio_table(f, alpha)
    return float(np.max(diff / D**alpha))


def log_holder_seminorm(f, alpha):
    """``log`` of :func:`holder_seminorm` computed in the log domain (``-inf`` for constants)."""
    diff, D = _log_ratio_table(f, alpha)
    pos = diff > 0
    if not pos.any():
        return -math.inf
    return float(np.max(np.log(diff[pos]) - alpha * np.log(D[pos])))


def holder_norm(f, alpha):
    return holder_seminorm(f, alpha) + f.sup()


def interpolation_slack(f, a0, a1, a2):
    """``theta log v_{a0} + (1-theta) log v_{a2} - log v_{a1}`` (nonnegative when the inequality holds)."""
    if not a0 < a1 < a2:
        raise ValueError("need a0 < a1 < a2")
    theta = (a2 - a1) / (a2 - a0)
    l0, l1, l2 = (log_holder_seminorm(f, a) for a in (a0, a1, a2))
    if l1 == -math.inf:
        return math.inf
    return theta * l0 + (1 - theta) * l2 - l1


@dataclass
class HolderConstant:
    value: float
    std_error: float
    n: int
    alpha: float
    state: int
    cells: tuple
    exact_net: bool


def _orbit_horofunctions(sys, grid, n, start, samples, seed, exact):
    """Rows ``h_xi(g^(n) x0)`` over grid cells, one per path from ``start``, with path weights."""
    model = sys.model
    K = sys.kernel.rows
    if exact:
        rows, weights = [], []
        for path in itertools.product(range(sys.m), repeat=n):
            p, prev = 1.0, start
            for t in path:
                p *= K[prev, t]
                prev = t
            if p == 0:
                continue
            states = (start,) + path
            rows.append(_horo_row(sys, grid, states))
            weights.append(p)
        return np.array(rows), np.array(weights)
    if isinstance(model, TreeModel):
        mu0 = np.zeros(sys.m)
        mu0[start] = 1.0
        c = Cocycle(model, MarkovDriver(sys.kernel, mu0), sys.cocycle_map)
        disp, words, wlen = simulate(c, n, samples, seed, [n], [n], threads=1)
        cp = kernels.tree_cp_matrix(words[:, 0, :], wlen[:, 0], grid.letters)
        rows = wlen[:, 0][:, None] - 2 * cp
        return rows.astype(float), np.full(samples, 1.0 / samples)
    mu0 = np.zeros(sys.m)
    mu0[start] = 1.0
    c = Cocycle(model, MarkovDriver(sys.kernel, mu0), sys.cocycle_map)
    rows = [_horo_row(sys, grid, path_states(c, n, seed, i)) for i in range(samples)]
    return np.array(rows), np.full(samples, 1.0 / samples)


def _horo_row(sys, grid, states):
    model = sys.model
    if isinstance(model, TreeModel):
        prod = model.identity()
        for s, t in zip(states, states[1:]):
            prod = prod * sys.cocycle_map[(s, t)]
        return [horofunction_eval(grid.ctx, xi, prod) for xi in grid.cells]
    prod = ScaledSL2()
    for s, t in zip(states, states[1:]):
        prod.mul(sys.cocycle_map[(s, t)])
    p = _orbit_point(model, prod)
    return [horofunction_eval(grid.ctx, xi, p) for xi in grid.cells]


def avg_holder_const(sys, n, alpha, samples, seed, grid, exact=False):
    """Average Hölder constant ``k_alpha^n`` estimated over a boundary grid.

    For a pair of distinct cells the contraction ratio of ``(g^(n))^-1`` is
    ``b^(-(h_xi(p) + h_eta(p))/2)`` with ``p = g^(n) x0``, so its alpha-th
    power factors as ``f(xi) f(eta)`` with ``f = b^(-alpha h(p)/2)``. The
    value is the largest expectation over start states and cell pairs. On the
    tree with net depth above ``n`` times the longest step, the grid sup equals
    the true sup (``exact_net``); otherwise it is a lower bound.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if n < 1:
        raise ValueError("n must be at least 1")
    N = len(grid)
    if N < 2:
        raise DegenerateInputError("grid needs at least two cells")
    logb = math.log(sys.b)
    off = ~np.eye(N, dtype=bool)
    best = None
    for s in range(sys.m):
        H, w = _orbit_horofunctions(sys, grid, n, s, samples, seed, exact)
        F = np.exp(-0.5 * alpha * logb * H)
        M = (F * w[:, None]).T @ F
        M[~off] = -np.inf
        i, j = np.unravel_index(int(np.argmax(M)), M.shape)
        val = float(M[i, j])
        if exact:
            se = 0.0
        else:
            prod = F[:, i] * F[:, j]
            se = float(np.std(prod, ddof=1) / math.sqrt(len(prod))) if len(prod) > 1 else 0.0
        if best is None or val > best.value:
            best = HolderConstant(val, se, n, alpha, s, (int(i), int(j)), False)
    exact_net = False
    if isinstance(sys.model, TreeModel):
        longest = max(len(g.letters) for g in sys.cocycle_map.values())
        exact_net = grid.resolution >= n * longest + 1
    best.exact_net = exact_net
    return best


@dataclass
class Verdict:
    kind: str
    witness: dict | None = None
    resolution: int = 0
    note: str = ""


def _close(model, ctx, x, y):
    if isinstance(model, TreeModel):
        return x == y
    return visual_metric(ctx, x, y) <= 1e-12


def irreducibility_heuristic(sys, grid):
    """Search for an equivariant boundary assignment ``g(s,t) H(s) = H(t)``.

    Every root cell is tried (after filtering by cells fixed, up to snap, by
    the return words of length at most 2 through the root); the assignment is
    propagated along a spanning tree and checked on every positive transition.
    A snap-consistent assignment that also holds exactly is a reducibility
    witness; one that only holds after snapping makes the verdict
    inconclusive; none at all is evidence of irreducibility at this resolution.
    """
    model = sys.model
    ctx = grid.ctx
    trans = sys.kernel.positive()
    root = 0
    order, parent = [root], {root: None}
    for s in order:
        for a, t in trans:
            if a == s and t not in parent:
                parent[t] = (s, sys.cocycle_map[(s, t)])
                order.append(t)
    if len(order) < sys.m:
        return Verdict("inconclusive", None, grid.resolution, "not every state is reachable from state 0")
    loops = [sys.cocycle_map[(root, root)]] if (root, root) in sys.cocycle_map else []
    for a, t in trans:
        if a == root and (t, root) in sys.cocycle_map and t != root:
            loops.append(model.compose(sys.cocycle_map[(root, t)], sys.cocycle_map[(t, root)]))
    snap_only = None
    for c0 in range(len(grid)):
        cell = grid.cells[c0]
        if any(grid.snap(model.act(w, cell)) != c0 for w in loops):
            continue
        H = {root: c0}
        for s in order[1:]:
            p, g = parent[s]
            H[s] = grid.snap(model.act(g, grid.cells[H[p]]))
        if all(grid.snap(model.act(sys.cocycle_map[(s, t)], grid.cells[H[s]])) == H[t] for s, t in trans):
            wit = {s: grid.cells[H[s]] for s in H}
            if all(_close(model, ctx, model.act(sys.cocycle_map[(s, t)], wit[s]), wit[t]) for s, t in trans):
                return Verdict("reducible", wit, grid.resolution)
            snap_only = snap_only or wit
    if snap_only is not None:
        return Verdict("inconclusive", snap_only, grid.resolution, "assignment holds only up to snapping")
    return Verdict("irreducible-evidence", None, grid.resolution)


def snap_slack(grid, alpha):
    """Relative snap error ``(2 mesh / min cell separation)^alpha`` for Hölder ratios."""
    return (2 * grid.mesh / grid.min_separation) ** alpha

