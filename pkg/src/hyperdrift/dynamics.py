"""Cocycles over finite Markov (or i.i.d.) drivers and their Monte-Carlo statistics.

A cocycle assigns an isometry ``g(s, t)`` to every kernel-positive transition;
along a path ``w_0, w_1, ...`` the product is ``g^(n) = g(w_0,w_1) ... g(w_{n-1},w_n)``
and the orbit point is ``p^(n) = g^(n) x0``. An i.i.d. cocycle is the special
case where every kernel row equals the step distribution.

Sample ``i`` under ``seed`` always uses the Philox substream ``(seed, i)``, so
estimates are independent of chunking and thread count, and two cocycles on
the same driver are automatically coupled.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateInputError, ModelMismatchError, NoConvergenceError
from .geometry import GeometryContext, group_distance_lower, horofunction_eval, visual_metric
from .markov import MarkovKernel, cumulative, draw_states, stationary_measure
from .models import FreeWord, H2Model, H2Point, ScaledSL2, SL2Isometry, TreeBoundary, TreeModel
from .rng import substream, uniforms

CHUNK = 1024
GATE_N = 200
GATE_SAMPLES = 256
# substream index reserved for bootstrap resampling
BOOTSTRAP_STREAM = (1 << 63) + 1


class IIDDriver:
    """Product measure: every step draws independently from ``probs``."""

    def __init__(self, probs):
        self.kernel = MarkovKernel.iid(probs)
        self.mu0 = np.asarray(self.kernel.rows[0])

    def __repr__(self):
        return f"IIDDriver({self.mu0.tolist()})"


class MarkovDriver:
    def __init__(self, kernel, mu0=None):
        if not isinstance(kernel, MarkovKernel):
            kernel = MarkovKernel(kernel)
        self.kernel = kernel
        if mu0 is None:
            mu0 = stationary_measure(kernel).weights
        mu0 = np.asarray(mu0, dtype=np.float64)
        if mu0.shape != (kernel.m,) or np.any(mu0 < 0) or abs(mu0.sum() - 1) > 1e-12:
            raise ValueError("mu0 must be a probability vector over the kernel states")
        self.mu0 = mu0

    def __repr__(self):
        return f"MarkovDriver({self.kernel.rows.tolist()}, mu0={self.mu0.tolist()})"


def _same_driver(d1, d2):
    return d1.kernel == d2.kernel and np.array_equal(d1.mu0, d2.mu0)


class Cocycle:
    """Isometry-valued cocycle over a finite driver.

    ``table`` maps each kernel-positive transition ``(s, t)`` to an isometry of
    ``model``.
    """

    def __init__(self, model, driver, table, name=None):
        self.model = model
        self.driver = driver
        self.name = name
        table = {(int(s), int(t)): g for (s, t), g in table.items()}
        for s, t in driver.kernel.positive():
            if (s, t) not in table:
                raise ValueError(f"cocycle map undefined on positive transition ({s}, {t})")
        for g in table.values():
            model.check_isometry(g)
        self.table = table
        self._enc = None
        self._gate = {}

    def __repr__(self):
        return f"Cocycle({self.name or '?'}, {self.model!r}, m={self.m})"

    @property
    def m(self):
        return self.driver.kernel.m

    @property
    def b(self):
        return self.model.b

    @property
    def ctx(self):
        return GeometryContext(self.model)

    @classmethod
    def iid(cls, model, isometries, probs=None, name=None):
        isometries = list(isometries)
        if probs is None:
            probs = np.full(len(isometries), 1.0 / len(isometries))
        driver = IIDDriver(probs)
        table = {(s, t): isometries[t] for s in range(len(isometries)) for t in range(len(isometries))}
        return cls(model, driver, table, name)

    @classmethod
    def markov(cls, model, kernel, table, mu0=None, name=None):
        return cls(model, MarkovDriver(kernel, mu0), table, name)

    @classmethod
    def constant(cls, model, g, name=None):
        return cls.iid(model, [g], [1.0], name)

    def positive_transitions(self):
        return self.driver.kernel.positive()

    def isometry(self, s, t):
        return self.table[(s, t)]

    def with_table(self, table, name=None):
        """Same driver, new isometries (coupled with ``self``)."""
        return Cocycle(self.model, self.driver, table, name)

    # array encoding consumed by the kernels

    def encoding(self):
        if self._enc is None:
            self._enc = _encode(self)
        return self._enc


@dataclass
class _Encoding:
    index: np.ndarray
    cum0: np.ndarray
    cumrows: np.ndarray
    elements: list
    letters: np.ndarray = None
    lengths: np.ndarray = None
    mats: np.ndarray = None
    max_step: int = 0


def _encode(c):
    elements, where = [], {}
    m = c.m
    index = np.zeros((m, m), dtype=np.int64)
    for (s, t), g in sorted(c.table.items()):
        if g not in where:
            where[g] = len(elements)
            elements.append(g)
        index[s, t] = where[g]
    enc = _Encoding(index, cumulative(c.driver.mu0), cumulative(c.driver.kernel.rows), elements)
    if isinstance(c.model, TreeModel):
        width = max(1, max(len(g.letters) for g in elements))
        letters = np.zeros((len(elements), width), dtype=np.int8)
        for i, g in enumerate(elements):
            letters[i, : len(g.letters)] = g.letters
        enc.letters = letters
        enc.lengths = np.array([len(g.letters) for g in elements], dtype=np.int64)
        enc.max_step = width
    else:
        enc.mats = np.array([[g.a, g.b, g.c, g.d] for g in elements], dtype=np.float64)
    return enc


# ---------------------------------------------------------------------------
# simulation


def default_threads():
    return os.cpu_count() or 1


def _chunks(samples):
    return [(lo, min(lo + CHUNK, samples)) for lo in range(0, samples, CHUNK)]


def simulate(cocycle, n, samples, seed, checkpoints, word_checkpoints=(), threads=None):
    """Displacements ``d(p^(t), x0)`` for ``t`` in ``checkpoints`` (one row per sample).

    Tree runs can also return the reduced words at ``word_checkpoints``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    checkpoints = np.array(sorted(set(int(t) for t in checkpoints)), dtype=np.int64)
    word_checkpoints = np.array(sorted(set(int(t) for t in word_checkpoints)), dtype=np.int64)
    if checkpoints.size and (checkpoints[0] < 0 or checkpoints[-1] > n):
        raise ValueError("checkpoints must lie in [0, n]")
    enc = cocycle.encoding()
    tree = isinstance(cocycle.model, TreeModel)
    if word_checkpoints.size and not tree:
        raise ModelMismatchError("word checkpoints only exist on the tree model")
    cap = n * enc.max_step + 1

    def work(span):
        lo, hi = span
        u = uniforms(seed, range(lo, hi), n + 1)
        states = kernels.sample_states(u, enc.cum0, enc.cumrows)
        if tree:
            return kernels.tree_walk(states, enc.index, enc.letters, enc.lengths, checkpoints, word_checkpoints, cap)
        return (kernels.sl2_walk(states, enc.index, enc.mats, checkpoints),)

    spans = _chunks(samples)
    threads = threads or default_threads()
    if threads == 1 or len(spans) == 1:
        parts = [work(s) for s in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, spans))
    disp = np.concatenate([p[0] for p in parts]).astype(np.float64)
    if tree and word_checkpoints.size:
        words = np.concatenate([p[1] for p in parts])
        wlen = np.concatenate([p[2] for p in parts])
        return disp, words, wlen
    return disp


@dataclass
class PathSample:
    seed: int
    states: list
    displacement_log: list
    product: object
    index: int = 0


def path_states(cocycle, n, seed, index=0):
    u = substream(seed, index).random(n + 1)
    enc = cocycle.encoding()
    return draw_states(u, enc.cum0, enc.cumrows)


def _running_product(model):
    if isinstance(model, TreeModel):
        return model.identity()
    return ScaledSL2()


def _step(model, prod, g):
    if isinstance(model, TreeModel):
        return prod * g
    return prod.mul(g)


def _disp(model, prod):
    if isinstance(model, TreeModel):
        return len(prod.letters)
    return prod.displacement()


def sample_path(cocycle, n, seed, index=0):
    """One trajectory computed step by step with the model's own arithmetic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    states = path_states(cocycle, n, seed, index)
    model = cocycle.model
    prod = _running_product(model)
    log = [0 if isinstance(model, TreeModel) else 0.0]
    for s, t in zip(states, states[1:]):
        prod = _step(model, prod, cocycle.table[(s, t)])
        log.append(_disp(model, prod))
    return PathSample(seed, states, log, prod, index)


# ---------------------------------------------------------------------------
# drift


@dataclass
class DriftEstimate:
    n: int
    samples: int
    mean: float
    std_error: float
    per_sample: np.ndarray | None = field(default=None, repr=False)


def _mean_se(x):
    """Mean and standard error; a constant sample gives its value and SE 0 exactly."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no samples")
    if np.all(x == x[0]):
        return float(x[0]), 0.0
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(x.size))
    return mean, se


def finite_scale_drift(cocycle, n, samples, seed, exhaustive=False, threads=None, keep=False):
    """Estimate ``l_n = E[d(p^(n), x0)] / n``.

    With ``exhaustive=True`` every driver path of length n is enumerated and
    weighted by its probability; ``samples`` is then ignored and the
    result is exact up to rounding.
    """
    if n < 1 or samples < 1:
        raise ValueError("n and samples must be at least 1")
    if exhaustive:
        return _exhaustive_drift(cocycle, n)
    disp = simulate(cocycle, n, samples, seed, [n], threads=threads)[:, 0] / n
    mean, se = _mean_se(disp)
    return DriftEstimate(n, samples, mean, se, disp if keep else None)


MAX_ENUMERATION = 2_000_000


def _exhaustive_drift(cocycle, n):
    K = cocycle.driver.kernel.rows
    mu0 = cocycle.driver.mu0
    model = cocycle.model
    count = 0
    total = 0.0

    def walk(s, prob, prod, depth):
        nonlocal count, total
        if depth == n:
            count += 1
            if count > MAX_ENUMERATION:
                raise ValueError("too many paths for exhaustive enumeration")
            total += prob * model.displacement(prod)
            return
        for t in np.flatnonzero(K[s] > 0):
            t = int(t)
            g = cocycle.table[(s, t)]
            nxt = prod * g if isinstance(model, TreeModel) else prod @ g
            walk(t, prob * K[s, t], nxt, depth + 1)

    start = model.identity()
    m = cocycle.m
    if isinstance(cocycle.driver, IIDDriver) and all(
        cocycle.table.get((s, t)) == cocycle.table.get((0, t)) for s in range(m) for t in range(m)
    ):
        # steps do not depend on the previous state: enumerate step sequences only
        walk(0, 1.0, start, 0)
    else:
        for s in np.flatnonzero(mu0 > 0):
            walk(int(s), mu0[s], start, 0)
    return DriftEstimate(n, count, float(total) / n, 0.0)


@dataclass
class DriftFit:
    ell: float
    ell_se: float
    K: float
    residual: float
    grid: list
    fallback: bool = False


def drift_extrapolate(cocycle, n_grid, samples, seed, threads=None):
    """Fit ``l_n = l + K log_b(n) / n`` over a grid of horizons (one coupled run)."""
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3 or any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise ValueError("n_grid must be increasing, positive and have at least 3 entries")
    nmax = n_grid[-1]
    disp = simulate(cocycle, nmax, samples, seed, n_grid, threads=threads)
    grid = []
    for j, n in enumerate(n_grid):
        mean, se = _mean_se(disp[:, j] / n)
        grid.append(DriftEstimate(n, samples, mean, se))
    y = np.array([g.mean for g in grid])
    se = np.array([g.std_error for g in grid])
    x = np.array([math.log(n) / math.log(cocycle.b) / n for n in n_grid])
    X = np.column_stack([np.ones_like(x), x])
    w = 1.0 / se if np.all(se > 0) else np.ones_like(x)
    try:
        coef, _, rank, _ = np.linalg.lstsq(X * w[:, None], y * w, rcond=None)
        if rank < 2 or not np.all(np.isfinite(coef)):
            raise np.linalg.LinAlgError("rank deficient")
        cov = np.linalg.inv((X * w[:, None]).T @ (X * w[:, None]))
    except np.linalg.LinAlgError:
        last = grid[-1]
        return DriftFit(last.mean, last.std_error, 0.0, float("nan"), grid, True)
    resid = float(np.max(np.abs(X @ coef - y)))
    ell_se = float(math.sqrt(cov[0, 0])) if np.all(se > 0) else 0.0
    if np.all(y == y[0]):
        # constant grid: the fit is exact
        return DriftFit(float(y[0]), 0.0, 0.0, 0.0, grid)
    return DriftFit(float(coef[0]), ell_se, float(coef[1]), resid, grid)


# ---------------------------------------------------------------------------
# large deviations


@dataclass
class TailReport:
    n: int
    epsilon: float
    samples: int
    center: float
    tail_count: int
    tail_prob: float
    rate: float
    std_error: float = 0.0
    limit_center: float | None = None
    limit_tail_count: int | None = None
    limit_tail_prob: float | None = None


def _rate(p, n, b):
    return math.inf if p == 0 else -math.log(p) / (n * math.log(b))


def _tail(x, center, eps, n, b, samples, limit):
    count = int(np.count_nonzero(np.abs(x - center) > eps))
    p = count / samples
    rep = TailReport(n, eps, samples, center, count, p, _rate(p, n, b), math.sqrt(p * (1 - p) / samples))
    if limit is not None:
        lc = int(np.count_nonzero(np.abs(x - limit) > eps))
        rep.limit_center, rep.limit_tail_count, rep.limit_tail_prob = float(limit), lc, lc / samples
    return rep


def ld_tail(cocycle, n, epsilon, samples, seed, limit=None, threads=None):
    """Empirical ``P(|d(p^(n), x0)/n - l_n| > eps)`` centered at the same run's mean."""
    return ld_tail_grid(cocycle, [n], [epsilon], samples, seed, limit, threads)[0]


def ld_tail_grid(cocycle, n_grid, eps_list, samples, seed, limit=None, threads=None):
    """Tail reports for every ``(n, eps)`` from one coupled simulation (n-major order)."""
    if any(e <= 0 for e in eps_list):
        raise ValueError("epsilon must be positive")
    n_grid = sorted(set(int(n) for n in n_grid))
    disp = simulate(cocycle, n_grid[-1], samples, seed, n_grid, threads=threads)
    out = []
    for j, n in enumerate(n_grid):
        x = disp[:, j] / n
        center, _ = _mean_se(x)
        for eps in eps_list:
            out.append(_tail(x, center, float(eps), n, cocycle.b, samples, limit))
    return out


def fit_ld_rate(reports, b):
    """Slope ``c`` of ``-log_b P_n ~ c n + a`` over reports with a nonzero tail count."""
    pts = [(r.n, -math.log(r.tail_prob) / math.log(b)) for r in reports if r.tail_count > 0]
    if len(pts) < 2:
        raise DegenerateInputError("need at least two horizons with nonzero tail counts")
    x, y = np.array(pts).T
    slope, icpt = np.polyfit(x, y, 1)
    return float(slope), float(icpt)


# ---------------------------------------------------------------------------
# hitting points


@dataclass
class HittingEstimate:
    n: int
    boundary_point: object
    gromov_growth: list
    cauchy_gap: float
    index: int = 0


def check_positive_drift(cocycle, seed, threads=None):
    """Gate used before hitting-point work: ``l_200 > 3 SE`` and ``l_200 > 0``."""
    if seed not in cocycle._gate:
        est = finite_scale_drift(cocycle, GATE_N, GATE_SAMPLES, seed, threads=threads)
        cocycle._gate[seed] = est.mean > 0 and est.mean > 3 * est.std_error
    if not cocycle._gate[seed]:
        raise NoConvergenceError(f"{cocycle!r} shows no positive drift at n = {GATE_N}")


def _tree_end(letters, k, depth):
    """End agreeing with ``letters``: periodic continuation if the tail is visibly periodic, else a ray."""
    L = len(letters)
    half = L // 2
    for p in range(1, L // 3 + 1):
        if L - half >= 2 * p and all(letters[i] == letters[i - p] for i in range(max(half, p), L)):
            return TreeBoundary(letters[: L - p], letters[L - p :], k, depth)
    return TreeBoundary.ray(letters, k, depth)


def hitting_point(cocycle, n, seed, index=0, gate=True):
    """Boundary point approached by the orbit of sample ``index``, estimated at horizon n."""
    if n < 2:
        raise ValueError("hitting point needs n >= 2")
    if gate:
        check_positive_drift(cocycle, seed)
    model = cocycle.model
    half = n // 2
    states = path_states(cocycle, 2 * n, seed, index)
    steps = [cocycle.table[(s, t)] for s, t in zip(states, states[1:])]
    if isinstance(model, TreeModel):
        prod = model.identity()
        snaps = {}
        for i, g in enumerate(steps, 1):
            prod = prod * g
            if i in (half, n, 2 * n):
                snaps[i] = prod
        x0 = model.basepoint
        g_half = model.gromov(snaps[half], snaps[n], x0)
        g_n = model.gromov(snaps[n], snaps[2 * n], x0)
        if g_n == 0:
            raise NoConvergenceError("orbit prefixes have not separated from x0")
        end = _tree_end(snaps[n].letters[:g_n], model.k, g_n)
    else:
        prod = ScaledSL2()
        seg = None
        d, segd = {}, {}
        pn = None
        for i, g in enumerate(steps, 1):
            prod.mul(g)
            if seg is not None:
                seg.mul(g)
            if i in (half, n, 2 * n):
                d[i] = prod.displacement()
                if seg is not None:
                    segd[i] = seg.displacement()
                seg = ScaledSL2()
                if i == n:
                    pn = prod.copy()
        g_half = max(0.0, 0.5 * (d[half] + d[n] - segd[n]))
        g_n = max(0.0, 0.5 * (d[n] + d[2 * n] - segd[2 * n]))
        end = pn.attracting_point()
    gap = math.exp(-g_n * math.log(model.b)) if g_n * math.log(model.b) < 700 else 0.0
    return HittingEstimate(n, end, [g_half, g_n], gap, index)


def d1_distance(c1, c2, n, samples, seed):
    """Mean visual distance between the hitting points of two coupled cocycles."""
    _check_coupled(c1, c2)
    check_positive_drift(c1, seed)
    check_positive_drift(c2, seed)
    ctx = c1.ctx
    vals = []
    for i in range(samples):
        e1 = hitting_point(c1, n, seed, i, gate=False).boundary_point
        e2 = hitting_point(c2, n, seed, i, gate=False).boundary_point
        vals.append(visual_metric(ctx, e1, e2))
    return float(np.mean(vals))


def _check_coupled(c1, c2):
    if c1.model != c2.model:
        raise ModelMismatchError("cocycles live on different models")
    if not _same_driver(c1.driver, c2.driver):
        raise ModelMismatchError("cocycles must share a driver for coupled sampling")


# ---------------------------------------------------------------------------
# d_infinity


def log_dinf_cocycle(cocycle):
    """``max_{(s,t)} d(g(s,t) x0, x0)``, i.e. ``log_b d_inf(g)``."""
    return max(float(cocycle.model.displacement(g)) for g in cocycle.encoding().elements)


def dinf_cocycle(cocycle):
    """``sup b^(d(g x0, x0))`` over the finite table."""
    return math.exp(log_dinf_cocycle(cocycle) * math.log(cocycle.b))


def dinf_distance(c1, c2, net):
    """Net lower bound of ``d_inf(g1, g2)``: max of ``d_G`` proxies over shared transitions."""
    if c1.model != c2.model:
        raise ModelMismatchError("cocycles live on different models")
    if set(c1.table) != set(c2.table):
        raise ModelMismatchError("cocycle tables have different supports")
    ctx = c1.ctx
    best = 0.0
    seen = set()
    for key in sorted(c1.table):
        pair = (c1.table[key], c2.table[key])
        if pair in seen:
            continue
        seen.add(pair)
        if pair[0] == pair[1]:
            continue
        best = max(best, group_distance_lower(ctx, pair[0], pair[1], net))
    return best


# ---------------------------------------------------------------------------
# continuity experiments


def perturb_cocycle(cocycle, scale):
    """Deterministic perturbation at size ``scale``.

    H²: every isometry is multiplied on the right by the rotation of angle
    ``scale`` about i. Tree: the first ``round(scale * N)`` of the N table
    entries (row-major) are multiplied on the right by the first generator.
    """
    if scale < 0:
        raise ValueError("perturbation scale must be nonnegative")
    model = cocycle.model
    keys = sorted(cocycle.table)
    if isinstance(model, H2Model):
        rot = SL2Isometry.rotation(scale)
        table = {k: cocycle.table[k] @ rot for k in keys} if scale else dict(cocycle.table)
    else:
        nmod = int(round(scale * len(keys)))
        gen = FreeWord._raw((1,), model.k)
        table = {k: (cocycle.table[k] * gen if j < nmod else cocycle.table[k]) for j, k in enumerate(keys)}
    return cocycle.with_table(table, f"{cocycle.name or 'cocycle'}~{scale!r}")


@dataclass
class ContinuityRow:
    scale: float
    dinf_proxy: float
    drift_diff: float
    log_bound: float
    bound: float
    max_gap: float
    violations: int
    C: float


@dataclass
class ContinuityTable:
    n: int
    samples: int
    rows: list
    slope: float | None
    slope_ci: tuple | None


def finite_scale_log_bound(n, C, b, dinf):
    """Log of ``n C^(2n-1) d_inf / log b``, the per-sample bound on ``|d(p1,x0) - d(p2,x0)|``.

    ``C`` bounds ``b^(d(g x0, x0))`` for every step of both cocycles.
    """
    if dinf <= 0:
        return -math.inf
    return math.log(n) + (2 * n - 1) * math.log(C) - math.log(math.log(b)) + math.log(dinf)


def _slope(x, y):
    return float(np.polyfit(x, y, 1)[0])


def continuity_experiment(base, scales, n, samples, seed, net, threads=None, bootstrap=1000):
    """Perturbation table for finite-scale and drift continuity.

    For each scale the perturbed cocycle shares the driver (coupled paths).
    Rows hold the ``d_inf`` proxy, ``|l_n(g) - l_n(g_s)|``, the finite-scale
    bound and the number of samples violating it. ``slope`` is the log-log
    fit of drift difference against the ``d_inf`` proxy, with a percentile
    bootstrap interval over samples.
    """
    check_positive_drift(base, seed, threads)
    d0 = simulate(base, n, samples, seed, [n], threads=threads)[:, 0]
    rows, diffs = [], []
    logC0 = log_dinf_cocycle(base)
    for s in scales:
        pert = perturb_cocycle(base, s)
        d1 = simulate(pert, n, samples, seed, [n], threads=threads)[:, 0]
        delta = d0 - d1
        dinf = dinf_distance(base, pert, net)
        C = math.exp(max(logC0, log_dinf_cocycle(pert)) * math.log(base.b))
        lb = finite_scale_log_bound(n, C, base.b, dinf)
        bound = math.exp(lb) if lb < 700 else math.inf
        gaps = np.abs(delta)
        viol = int(np.count_nonzero(gaps > bound))
        rows.append(ContinuityRow(float(s), dinf, abs(float(np.mean(delta))) / n, lb, bound, float(gaps.max()), viol, C))
        diffs.append(delta / n)
    usable = [j for j, r in enumerate(rows) if r.dinf_proxy > 0 and r.drift_diff > 0]
    slope = ci = None
    if len({rows[j].dinf_proxy for j in usable}) >= 2:
        lx = np.log([rows[j].dinf_proxy for j in usable])
        slope = _slope(lx, np.log([rows[j].drift_diff for j in usable]))
        rng = substream(seed, BOOTSTRAP_STREAM)
        D = np.array([diffs[j] for j in usable])
        boots = []
        for _ in range(bootstrap):
            idx = rng.integers(0, samples, samples)
            dd = np.abs(D[:, idx].mean(axis=1))
            if np.all(dd > 0):
                boots.append(_slope(lx, np.log(dd)))
        if boots:
            ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5)))
    return ContinuityTable(n, samples, rows, slope, ci)


# ---------------------------------------------------------------------------
# telescoping


def _orbit_point(model, prod):
    if isinstance(model, TreeModel):
        return prod
    a, b, c, d = prod.m
    den = c * c + d * d
    im = math.exp(-2.0 * prod.log_scale) / den
    return H2Point((a * c + b * d) / den, im)


def telescoping_check(cocycle, xi0, n, seed, index=0):
    """``|sum_i h_{xi_i}(g_i x0) - h_{xi_0}(g^(n) x0)|`` with ``xi_{i+1} = g_i^{-1} xi_i``."""
    model = cocycle.model
    if not model.is_boundary(xi0):
        raise ModelMismatchError(f"{xi0!r} is not a boundary point of {model!r}")
    ctx = cocycle.ctx
    states = path_states(cocycle, n, seed, index)
    x0 = model.basepoint
    xi = xi0
    total = 0
    prod = _running_product(model)
    for s, t in zip(states, states[1:]):
        g = cocycle.table[(s, t)]
        total += horofunction_eval(ctx, xi, model.act(g, x0))
        xi = model.act(model.inverse(g), xi)
        prod = _step(model, prod, g)
    end = horofunction_eval(ctx, xi0, _orbit_point(model, prod))
    return abs(total - end)


# ---------------------------------------------------------------------------
# presets


def f2_srw(k=2, b=2.0):
    """Simple random walk on F_k: uniform over the generators and their inverses."""
    model = TreeModel(k, b)
    return Cocycle.iid(model, model.generators(), name=f"F{k}-srw")


def constant_cocycle(model, g, name="constant"):
    return Cocycle.constant(model, g, name)


def constant_diag(t=math.sqrt(2.0)):
    """Constant ``diag(t, 1/t)`` on H²."""
    return Cocycle.constant(H2Model(), SL2Isometry.diag(t), f"diag({t!r})")


def schottky_generators(t=3.0):
    """Hyperbolic A (axis 0..inf) and B (axis -1..1), both of translation length t."""
    A = SL2Isometry.diag(math.exp(t / 2))
    r = SL2Isometry.rotation(math.pi / 4)
    return A, r @ A @ r.inverse()


def h2_schottky_srw(t=3.0):
    """Uniform walk on ``{A, A^-1, B, B^-1}`` in H² (a free, F2-like cocycle)."""
    A, B = schottky_generators(t)
    return Cocycle.iid(H2Model(), [A, A.inverse(), B, B.inverse()], name=f"h2-schottky({t!r})")
