"""Randomized property suites for the geometry layer (also run by ``geom-selftest``)."""
import math
from dataclasses import dataclass

import numpy as np

from .avalanche import check_avalanche, random_admissible_chain
from .geometry import GeometryContext, check_four_point, conformal_ratio_residual, rho_metric

# rounding allowance for the float model when comparing sums of boundary distances
RHO_TOL = 1e-12


@dataclass
class SuiteResult:
    suite: str
    model: str
    trials: int
    violations: int
    worst_slack: float

    @property
    def ok(self):
        return self.violations == 0


def four_point_suite(model, trials, seed):
    """``<x,z>_w >= min(<x,y>_w, <y,z>_w) - delta`` on random quadruples."""
    ctx = GeometryContext(model)
    rng = np.random.default_rng(seed)
    tol = ctx.tolerance
    bad, worst = 0, math.inf
    for _ in range(trials):
        x, y, z, w = (model.random_point(rng) for _ in range(4))
        s = check_four_point(ctx, x, y, z, w)
        worst = min(worst, s)
        bad += s < -tol
    return SuiteResult("four-point", model.name, trials, bad, worst)


def strong_hyperbolicity_suite(model, trials, seed):
    """Triangle inequality for ``rho = b^(-<.,.>_x0)`` on random boundary triples."""
    ctx = GeometryContext(model)
    rng = np.random.default_rng(seed)
    tol = 0.0 if model.exact else RHO_TOL
    bad, worst = 0, math.inf
    for _ in range(trials):
        a, b, c = (model.random_boundary(rng) for _ in range(3))
        s = rho_metric(ctx, a, b) + rho_metric(ctx, b, c) - rho_metric(ctx, a, c)
        worst = min(worst, s)
        bad += s < -tol
    return SuiteResult("strong-hyperbolicity", model.name, trials, bad, worst)


def avalanche_suite(model, trials, seed, min_len=3, max_len=30):
    """Conclusions 1-3 on random admissible chains of ``min_len..max_len`` points."""
    ctx = GeometryContext(model)
    rng = np.random.default_rng(seed)
    tol = ctx.tolerance
    bad, worst = 0, math.inf
    for _ in range(trials):
        pts, rho, sigma = random_admissible_chain(model, rng, int(rng.integers(min_len, max_len + 1)))
        rep = check_avalanche(ctx, pts, rho, sigma)
        if not rep.satisfied:
            bad += 1
            continue
        s = min(rep.conclusion1_residual, rep.conclusion2_slack, rep.conclusion3_residual)
        worst = min(worst, s)
        bad += s < -tol
    return SuiteResult("avalanche", model.name, trials, bad, worst)


def conformal_suite(model, trials, seed):
    """Mean-value identity for ``rho(g xi, g eta) / rho(xi, eta)`` on random data."""
    ctx = GeometryContext(model)
    rng = np.random.default_rng(seed)
    tol = 0.0 if model.exact else 1e-9
    bad, worst, done = 0, math.inf, 0
    while done < trials:
        xi, eta = model.random_boundary(rng), model.random_boundary(rng)
        if xi == eta:
            continue
        g = model.random_isometry(rng)
        r = conformal_ratio_residual(ctx, g, xi, eta)
        worst = min(worst, -r)
        bad += r > tol
        done += 1
    return SuiteResult("conformal-ratio", model.name, trials, bad, worst)


SUITES = {
    "four-point": four_point_suite,
    "strong-hyperbolicity": strong_hyperbolicity_suite,
    "avalanche": avalanche_suite,
    "conformal-ratio": conformal_suite,
}


def run_all(model, trials, seed):
    return [fn(model, trials, seed + j) for j, fn in enumerate(SUITES.values())]
