"""Finite-state Markov kernels: iteration, stationary measures, sampling, mixing."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import NoConvergenceError, PeriodicChainError, ReducibleChainError
from .rng import substream

ROW_TOL = 1e-12


class MarkovKernel:
    """Row-stochastic ``m x m`` transition matrix."""

    def __init__(self, rows):
        rows = np.array(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] == 0:
            raise ValueError(f"kernel must be a nonempty square matrix, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)) or np.any(rows < 0):
            raise ValueError("kernel entries must be finite and nonnegative")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise ValueError(f"row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        rows.setflags(write=False)
        self.rows = rows

    @property
    def m(self):
        return self.rows.shape[0]

    def __repr__(self):
        return f"MarkovKernel({self.rows.tolist()})"

    def __eq__(self, other):
        return isinstance(other, MarkovKernel) and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.rows.tobytes())

    @classmethod
    def two_state(cls, p, q):
        return cls([[1 - p, p], [q, 1 - q]])

    @classmethod
    def iid(cls, probs):
        probs = np.asarray(probs, dtype=np.float64)
        return cls(np.tile(probs, (probs.size, 1)))

    def positive(self):
        """Kernel-positive transitions ``(s, t)`` in row-major order."""
        return [(int(s), int(t)) for s, t in zip(*np.nonzero(self.rows > 0))]


def iterate_kernel(K, n):
    if n < 1:
        raise ValueError("n must be at least 1")
    return MarkovKernel(_renorm(np.linalg.matrix_power(K.rows, n)))


def _renorm(P):
    # keep rows stochastic against roundoff creep in long powers
    return P / P.sum(axis=1, keepdims=True)


def _classes(K):
    ncomp, labels = connected_components(K.rows > 0, directed=True, connection="strong")
    comps = [np.flatnonzero(labels == c).tolist() for c in range(ncomp)]
    adj = K.rows > 0
    closed = []
    for c in comps:
        inside = np.zeros(K.m, dtype=bool)
        inside[c] = True
        if not adj[np.ix_(c, ~inside)].any():
            closed.append(c)
    return closed


@dataclass(frozen=True)
class StationaryMeasure:
    weights: np.ndarray
    residual: float


def stationary_measure(K, tol=1e-12, max_iter=1_000_000):
    """Unique stationary law of a chain with one recurrent class.

    Transient states get weight 0 exactly. On the recurrent class, power
    iteration of ``pi -> pi K`` on the lazy kernel ``(I + K)/2`` (same
    stationary law, no periodicity) from the uniform vector, then one direct
    solve as a polish.
    """
    closed = _classes(K)
    if len(closed) > 1:
        raise ReducibleChainError(closed)
    cls = closed[0]
    R = K.rows[np.ix_(cls, cls)]
    k = len(cls)
    P = 0.5 * (np.eye(k) + R)
    pi = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        nxt = pi @ P
        nxt /= nxt.sum()
        done = np.abs(nxt - pi).sum() < tol
        pi = nxt
        if done:
            break
    else:
        raise NoConvergenceError("power iteration did not converge")
    residual = float(np.abs(pi @ R - pi).sum())
    # polish with one direct solve of pi (R - I) = 0, sum(pi) = 1
    A = np.vstack([(R - np.eye(k)).T, np.ones(k)])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    cand = np.linalg.lstsq(A, rhs, rcond=None)[0]
    if np.all(cand >= 0):
        cand /= cand.sum()
        r = float(np.abs(cand @ R - cand).sum())
        if r < residual:
            pi, residual = cand, r
    full = np.zeros(K.m)
    full[cls] = pi
    full.setflags(write=False)
    return StationaryMeasure(full, residual)


def _check_dist(mu0, m):
    mu0 = np.asarray(mu0, dtype=np.float64)
    if mu0.shape != (m,) or np.any(mu0 < 0) or abs(mu0.sum() - 1.0) > ROW_TOL:
        raise ValueError("initial distribution must be a probability vector over the states")
    return mu0


def cumulative(p):
    """Cumulative sums for inverse-CDF sampling.

    Entries from the last positive probability on are forced to 1, so
    rounding can never select a trailing zero-probability state.
    """
    p = np.asarray(p, dtype=np.float64)
    c = np.cumsum(p, axis=-1)
    for row, prow in zip(c.reshape(-1, c.shape[-1]), p.reshape(-1, p.shape[-1])):
        row[np.flatnonzero(prow > 0)[-1] :] = 1.0
    return c


def draw_states(u, cum0, cumrows):
    """Inverse-CDF chain from pre-drawn uniforms; plain Python reference for the kernels."""
    m = len(cum0)
    out = []
    row = cum0
    for x in u:
        j = 0
        while j < m - 1 and row[j] <= x:
            j += 1
        out.append(j)
        row = cumrows[j]
    return out


def kolmogorov_sample(K, mu0, n, seed, index=0):
    """Path ``w_0 .. w_n`` with ``w_0 ~ mu0`` and ``w_{i+1} ~ K(w_i, .)``."""
    mu0 = _check_dist(mu0, K.m)
    if n < 0:
        raise ValueError("n must be nonnegative")
    u = substream(seed, index).random(n + 1)
    return draw_states(u, cumulative(mu0), cumulative(K.rows))


def cylinder_probability(K, mu0, states):
    """``P(w_0 = s_0, ..., w_j = s_j)`` for the chain started from ``mu0``."""
    mu0 = _check_dist(mu0, K.m)
    if not states:
        return 1.0
    p = mu0[states[0]]
    for s, t in zip(states, states[1:]):
        p *= K.rows[s, t]
    return float(p)


def markov_operator_apply(K, f):
    """``(Q_K f)(s) = sum_t K(s, t) f(t)``."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (K.m,):
        raise ValueError(f"function has length {f.shape}, kernel has {K.m} states")
    return K.rows @ f


def period(K):
    """Period of the (single) recurrent class, via BFS levels."""
    closed = _classes(K)
    if len(closed) > 1:
        raise ReducibleChainError(closed)
    cls = closed[0]
    adj = K.rows > 0
    level = {cls[0]: 0}
    frontier = [cls[0]]
    g = 0
    while frontier:
        nxt = []
        for s in frontier:
            for t in np.flatnonzero(adj[s]):
                t = int(t)
                if t in level:
                    g = math.gcd(g, level[s] + 1 - level[t])
                else:
                    level[t] = level[s] + 1
                    nxt.append(t)
        frontier = nxt
    return g


@dataclass(frozen=True)
class MixingFit:
    C: float
    sigma: float
    errors: list
    period: int = 1


def strong_mixing_diagnostic(K, f, n_max=30, floor=1e-9):
    """Fit ``e_n = max_s |Q^n f(s) - <f, mu>| <= C sigma^n`` by log-linear regression.

    Only ``e_n`` above ``floor`` (relative to the scale of f) enter the fit; a
    function already at its mean gives ``C = sigma = 0``.
    """
    per = period(K)
    if per > 1:
        raise PeriodicChainError(per)
    f = np.asarray(f, dtype=np.float64)
    mu = stationary_measure(K).weights
    mean = float(f @ mu)
    errs = []
    g = f.copy()
    for _ in range(n_max + 1):
        errs.append(float(np.max(np.abs(g - mean))))
        g = K.rows @ g
    scale = max(1.0, float(np.max(np.abs(f))))
    ns = [n for n, e in enumerate(errs) if e > floor * scale]
    if not ns:
        return MixingFit(0.0, 0.0, errs)
    if len(ns) == 1:
        return MixingFit(errs[ns[0]], 0.0, errs)
    x = np.array(ns, dtype=float)
    y = np.log([errs[n] for n in ns])
    slope, _ = np.polyfit(x, y, 1)
    sigma = math.exp(slope)
    # smallest C with e_n <= C sigma^n on the fitted range
    C = max(errs[n] / sigma**n for n in ns)
    return MixingFit(C, sigma, errs)

