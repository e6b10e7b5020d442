"""Avalanche Principle checker for chains of points in a strongly hyperbolic space.

For a chain ``x_0, ..., x_n`` with gaps ``d(x_{i-1}, x_i) >= rho`` (G), angles
``<x_{i-1}, x_{i+1}>_{x_i} <= sigma`` (A) and ``2 sigma < rho - 2 delta`` (P),
the endpoint displacement is pinned down by the pairwise terms:

1. ``<x_0, x_n>_{x_{n-1}} <= sigma + eps``
2. ``d(x_0, x_n) >= rho + (n-1)(rho - 2 sigma - 2 delta)``
3. ``|d(x_0, x_n) + sum_{i=2}^{n-1} d(x_{i-1}, x_i) - sum_{i=1}^{n-1} d(x_{i-1}, x_{i+1})| <= 2(n-1) eps``

with ``eps = b^(2 sigma - rho + 2 delta) / log b``. Conclusions are checked
non-strictly: conclusion 2 is attained with equality by geodesic chains in a
tree.
"""
import math
from dataclasses import dataclass

import numpy as np

from .geometry import GeometryContext
from .models import FreeWord, H2Model, H2Point, SL2Isometry, h2_distance
from .models.h2 import DET_TOL


@dataclass(frozen=True)
class APReport:
    n: int
    rho: float
    sigma: float
    hypothesis_G_slacks: list
    hypothesis_A_slacks: list
    hypothesis_P_slack: float
    conclusion1_residual: float | None = None
    conclusion2_slack: float | None = None
    conclusion3_residual: float | None = None
    satisfied: bool = False
    tolerance: float = 0.0
    lognorm_residual: float | None = None

    @property
    def conclusions_hold(self):
        """True when every conclusion holds within ``tolerance`` (None if hypotheses fail)."""
        if not self.satisfied:
            return None
        t = -self.tolerance
        return self.conclusion1_residual >= t and self.conclusion2_slack >= t and self.conclusion3_residual >= t

    @property
    def equality_case(self):
        """Conclusion 2 attained exactly (a strict version of the inequality would fail)."""
        return self.satisfied and self.conclusion2_slack == 0

    def fields(self):
        return {
            "n": self.n,
            "rho": self.rho,
            "sigma": self.sigma,
            "min_G_slack": min(self.hypothesis_G_slacks),
            "min_A_slack": min(self.hypothesis_A_slacks),
            "P_slack": self.hypothesis_P_slack,
            "satisfied": self.satisfied,
            "conclusion1_residual": self.conclusion1_residual,
            "conclusion2_slack": self.conclusion2_slack,
            "conclusion3_residual": self.conclusion3_residual,
        }


def ap_epsilon(rho, sigma, delta, b):
    return math.exp((2 * sigma - rho + 2 * delta) * math.log(b)) / math.log(b)


def _report(n, rho, sigma, delta, b, tol, d_steps, d_skips, d_end, last_angle, angles):
    g_slacks = [d - rho for d in d_steps]
    a_slacks = [sigma - a for a in angles]
    p_slack = rho - 2 * delta - 2 * sigma
    satisfied = min(g_slacks) >= 0 and min(a_slacks) >= 0 and p_slack > 0
    if not satisfied:
        return APReport(n, rho, sigma, g_slacks, a_slacks, p_slack, satisfied=False, tolerance=tol)
    eps = ap_epsilon(rho, sigma, delta, b)
    c1 = sigma + eps - last_angle
    c2 = d_end - rho - (n - 1) * (rho - 2 * sigma - 2 * delta)
    lhs = abs(d_end + sum(d_steps[1 : n - 1]) - sum(d_skips))
    c3 = 2 * (n - 1) * eps - lhs
    return APReport(n, rho, sigma, g_slacks, a_slacks, p_slack, c1, c2, c3, True, tol)


def check_avalanche(ctx, points, rho, sigma):
    """Evaluate hypotheses G, A, P and, when they hold, the three conclusions."""
    if len(points) < 3:
        raise ValueError(f"avalanche check needs at least 3 points, got {len(points)}")
    m = ctx.model
    for p in points:
        m.check_interior(p)
    n = len(points) - 1
    d = m.distance
    d_steps = [d(points[i - 1], points[i]) for i in range(1, n + 1)]
    d_skips = [d(points[i - 1], points[i + 1]) for i in range(1, n)]
    angles = [0.5 * (d_steps[i - 1] + d_steps[i] - d_skips[i - 1]) for i in range(1, n)]
    d_end = d(points[0], points[n])
    d_mid = d(points[0], points[n - 1])
    last_angle = 0.5 * (d_mid + d_steps[n - 1] - d_end)
    return _report(n, rho, sigma, ctx.delta, ctx.b, ctx.tolerance, d_steps, d_skips, d_end, last_angle, angles)


def _check_unimodular(m):
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("expected 2x2 matrices")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det - 1.0) > DET_TOL * max(1.0, float(np.sum(m * m))):
        raise ValueError(f"matrix is not unimodular (det = {det!r})")
    return SL2Isometry._raw(*(float(v) for v in m.ravel()))


def ap_matrix_form(matrices, mu, nu):
    """Avalanche check for ``SL(2,R)`` products, phrased through matrix norms.

    Uses the dictionary ``d(g·i, i) = 2 log ||g||``: ``rho = log mu``,
    ``sigma = -log nu`` and the orbit ``x_j = g_0 ... g_{j-1}·i``. Every
    distance is read off a norm of a product of consecutive matrices, so the
    result can be compared against :func:`check_avalanche` on the orbit.
    ``lognorm_residual`` is the conclusion 3 margin stated for
    ``log||g^(n)|| + sum log||g_{j-1}|| - sum log||g_{j-1} g_j||`` (half of
    the distance form).
    """
    if not mu > 1:
        raise ValueError("mu must exceed 1")
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    gs = [_check_unimodular(m) for m in matrices]
    n = len(gs)
    if n + 1 < 3:
        raise ValueError(f"avalanche check needs at least 3 orbit points, got {n + 1}")
    model = H2Model()
    ctx = GeometryContext(model)
    rho, sigma = math.log(mu), 0.0 - math.log(nu)

    def dn(g):  # 2 log ||g||
        return model.displacement(g)

    prefix = [SL2Isometry.identity()]
    for g in gs:
        prefix.append(prefix[-1] @ g)
    d_steps = [dn(g) for g in gs]
    pair = [dn(gs[j - 1] @ gs[j]) for j in range(1, n)]
    angles = [0.5 * (d_steps[j - 1] + d_steps[j] - pair[j - 1]) for j in range(1, n)]
    d_end = dn(prefix[n])
    last_angle = 0.5 * (dn(prefix[n - 1]) + d_steps[n - 1] - d_end)
    rep = _report(n, rho, sigma, ctx.delta, ctx.b, ctx.tolerance, d_steps, pair, d_end, last_angle, angles)
    if not rep.satisfied:
        return rep
    eps = ap_epsilon(rho, sigma, ctx.delta, ctx.b)
    lhs = abs(0.5 * d_end + sum(0.5 * d for d in d_steps[1 : n - 1]) - sum(0.5 * p for p in pair))
    object.__setattr__(rep, "lognorm_residual", (n - 1) * eps - lhs)
    return rep


def orbit_points(matrices):
    """``x_j = g_0 ... g_{j-1}·i`` for j = 0..n."""
    model = H2Model()
    pts = [H2Point(0.0, 1.0)]
    prod = SL2Isometry.identity()
    for m in matrices:
        prod = prod @ _check_unimodular(m)
        pts.append(model.act(prod, pts[0]))
    return pts


# random admissible chains -------------------------------------------------


def _tree_step(model, rng, back, lo, hi, angle):
    """Reduced word of length in [lo, hi] sharing exactly ``angle`` leading letters with ``back``."""
    gens = [x for i in range(1, model.k + 1) for x in (i, -i)]
    length = int(rng.integers(lo, hi + 1))
    out = list(back[:angle])
    while len(out) < length:
        bad = {-out[-1]} if out else set()
        if len(out) == angle and angle < len(back):
            bad.add(back[angle])
        choices = [x for x in gens if x not in bad]
        out.append(choices[int(rng.integers(len(choices)))])
    return tuple(out)


def random_tree_chain(model, rng, length):
    """Chain of ``length`` points with integer ``rho``, ``sigma`` and ``2 sigma < rho``.

    Gaps and angles are built to hit their bounds often, so equality cases
    of the conclusions get exercised.
    """
    sigma = int(rng.integers(0, 3))
    rho = int(rng.integers(2 * sigma + 1, 2 * sigma + 4))
    x = model.random_point(rng, 6)
    pts = [x]
    back = ()
    for _ in range(length - 1):
        angle = min(int(rng.integers(0, sigma + 1)), len(back))
        w = _tree_step(model, rng, back, rho, rho + 3, angle)
        x = x * FreeWord._raw(w, model.k)
        pts.append(x)
        back = tuple(-a for a in reversed(w))
    return pts, rho, sigma


def random_h2_chain(rng, length):
    """Zigzag chain around the imaginary axis, in Fermi coordinates.

    Point j is ``e^(s_j) (tanh r_j + i sech r_j)``: height parameter ``s_j``
    along the axis and signed distance ``r_j`` from it. Every point stays in
    the cone ``|x| <= sinh(1.5) y`` so coordinates and distances keep full relative
    precision however long the chain. ``rho`` and ``sigma`` are the measured
    minimum gap and maximum angle, so hypotheses G and A hold with equality
    somewhere; the caller keeps chains where P holds.
    """
    R = float(rng.uniform(0.0, 1.5))
    lo = 2 * R + float(rng.uniform(1.5, 3.0))
    scale = math.exp(float(rng.uniform(-3.0, 3.0)))
    s = 0.0
    pts = []
    for j in range(length):
        r = float(rng.uniform(-R, R))
        pts.append(H2Point(scale * math.exp(s) * math.tanh(r), scale * math.exp(s) / math.cosh(r)))
        s += lo + float(rng.uniform(0.0, 2.0))
    if rng.random() < 0.5:
        pts.reverse()
    d = h2_distance
    rho = min(d(p, q) for p, q in zip(pts, pts[1:]))
    sigma = max(0.5 * (d(pts[i - 1], pts[i]) + d(pts[i], pts[i + 1]) - d(pts[i - 1], pts[i + 1])) for i in range(1, len(pts) - 1))
    return pts, rho, max(sigma, 0.0)


def random_admissible_chain(model, rng, length, attempts=1000):
    """``(points, rho, sigma)`` satisfying hypotheses G, A and P."""
    for _ in range(attempts):
        if model.name == "tree":
            return random_tree_chain(model, rng, length)
        pts, rho, sigma = random_h2_chain(rng, length)
        if 2 * sigma < rho - 2 * model.delta:
            return pts, rho, sigma
    raise RuntimeError("could not draw an admissible chain")


def random_sl2_instance(rng, n_lo=2, n_hi=4, t_lo=1.5, t_hi=3.5):
    """Random unimodular factors ``R(a) diag(e^(t/2)) R(b)`` with moderate total size."""
    n = int(rng.integers(n_lo, n_hi + 1))
    mats = []
    for _ in range(n):
        t = float(rng.uniform(t_lo, t_hi))
        g = SL2Isometry.rotation(float(rng.uniform(0, math.pi))) @ SL2Isometry.diag(math.exp(t / 2))
        g = g @ SL2Isometry.rotation(float(rng.uniform(0, math.pi)))
        mats.append(g.as_array())
    return mats
