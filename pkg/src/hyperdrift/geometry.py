"""Model-agnostic hyperbolic geometry on top of a :class:`SpaceModel`.

Boundary Gromov products come from the model's closed forms (exact prefix
arithmetic on the tree, Busemann-function limits on H²). All powers of the
metric base ``b`` go through the log domain.
"""
import math
from dataclasses import dataclass

from .errors import DegenerateInputError, ModelMismatchError
from .models import SpaceModel

# exp(-x) underflows below this exponent; such values clamp to 0
_EXP_FLOOR = 700.0


@dataclass(frozen=True)
class GeometryContext:
    model: SpaceModel
    basepoint: object = None
    b: float = None
    delta: float = None

    def __post_init__(self):
        if self.basepoint is None:
            object.__setattr__(self, "basepoint", self.model.basepoint)
        if self.b is None:
            object.__setattr__(self, "b", self.model.b)
        if self.delta is None:
            object.__setattr__(self, "delta", self.model.delta)
        if not self.b > 1:
            raise ValueError(f"metric base must exceed 1, got {self.b}")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.delta > 0 and math.log(self.b) > math.log(2.0) / self.delta * (1 + 1e-12):
            raise ValueError(f"b = {self.b} exceeds 2^(1/delta) for delta = {self.delta}")
        self.model.check_interior(self.basepoint)

    @classmethod
    def of(cls, model):
        return cls(model)

    @property
    def log_b(self):
        return math.log(self.b)

    @property
    def tolerance(self):
        """Slack allowed in inequality checks: 0 on exact models."""
        return 0.0 if self.model.exact else 1e-9


def _member(ctx, p):
    model = ctx.model
    if not (model.is_point(p) or model.is_boundary(p)):
        raise ModelMismatchError(f"{p!r} does not belong to {model!r}")
    return p


def gromov_product(ctx, x, z, base=None):
    """``⟨x, z⟩_base`` for points of Bord X; ``+inf`` for equal boundary points."""
    base = ctx.basepoint if base is None else base
    _member(ctx, x)
    _member(ctx, z)
    ctx.model.check_interior(base)
    return ctx.model.gromov(x, z, base)


def check_four_point(ctx, x, y, z, w):
    """Slack ``⟨x,z⟩_w - min(⟨x,y⟩_w, ⟨y,z⟩_w) + δ``; nonnegative when the condition holds."""
    m = ctx.model
    for p in (x, y, z, w):
        m.check_interior(p)
    return m.gromov(x, z, w) - min(m.gromov(x, y, w), m.gromov(y, z, w)) + ctx.delta


def b_power_neg(ctx, product):
    """``b^(-product)`` with clamping to 0 far in the tail."""
    e = product * ctx.log_b
    if e > _EXP_FLOOR:
        return 0.0
    return math.exp(-e)


def rho_metric(ctx, xi, eta, base=None):
    return b_power_neg(ctx, gromov_product(ctx, xi, eta, base))


def _same(ctx, xi, eta):
    return xi == eta


def visual_metric(ctx, xi, eta):
    """``D_b = min((log b)·d, b^(-⟨ξ,η⟩_x0))`` on Bord X."""
    _member(ctx, xi)
    _member(ctx, eta)
    if _same(ctx, xi, eta):
        return 0.0
    rho = rho_metric(ctx, xi, eta)
    m = ctx.model
    if m.is_point(xi) and m.is_point(eta):
        return min(ctx.log_b * m.distance(xi, eta), rho)
    return rho


def horofunction_eval(ctx, xi, z):
    """Horofunction ``h_ξ(z) = d(z, x0) - 2⟨ξ, z⟩_x0`` (vanishes at x0)."""
    m = ctx.model
    if not m.is_boundary(xi):
        raise ModelMismatchError(f"{xi!r} is not a boundary point of {m!r}")
    m.check_interior(z)
    x0 = ctx.basepoint
    return m.distance(z, x0) - 2 * m.gromov(xi, z, x0)


def horofunction_translate(ctx, g, xi, z):
    """``(g·h_ξ)(z) = h_ξ(g⁻¹z) - h_ξ(g⁻¹x0)``."""
    m = ctx.model
    m.check_isometry(g)
    gi = m.inverse(g)
    return horofunction_eval(ctx, xi, m.act(gi, z)) - horofunction_eval(ctx, xi, m.act(gi, ctx.basepoint))


def conformal_ratio_residual(ctx, g, xi, eta):
    """Defect of the mean-value formula for ``ρ(gξ, gη) / ρ(ξ, η)``, in log_b units."""
    m = ctx.model
    if _same(ctx, xi, eta):
        raise DegenerateInputError("conformal ratio needs distinct boundary points")
    for p in (xi, eta):
        if not m.is_boundary(p):
            raise ModelMismatchError(f"{p!r} is not a boundary point")
    x0 = ctx.basepoint
    log_ratio = m.gromov(xi, eta, x0) - m.gromov(m.act(g, xi), m.act(g, eta), x0)
    pull = m.act(m.inverse(g), x0)
    return abs(log_ratio + 0.5 * (horofunction_eval(ctx, xi, pull) + horofunction_eval(ctx, eta, pull)))


def group_distance_witness(ctx, g1, g2, net):
    """Value of the net lower bound for ``d_G(g1, g2)`` and the net point attaining it."""
    if not net:
        raise ValueError("group distance needs a nonempty net")
    m = ctx.model
    h1, h2 = m.inverse(g1), m.inverse(g2)
    best, arg = -1.0, None
    for p in net:
        v = max(visual_metric(ctx, m.act(g1, p), m.act(g2, p)), visual_metric(ctx, m.act(h1, p), m.act(h2, p)))
        if v > best:
            best, arg = v, p
    return best, arg


def group_distance_lower(ctx, g1, g2, net):
    """Lower bound for ``d_G(g1, g2)``: the supremum restricted to a finite net of Bord X."""
    return group_distance_witness(ctx, g1, g2, net)[0]


def default_net(ctx, resolution):
    """Boundary net plus a few interior samples (x0 and points at distance 1 and 4 from it)."""
    m = ctx.model
    net = list(m.boundary_net(resolution))
    net.append(ctx.basepoint)
    if m.name == "tree":
        net.extend(m.generators())
        net.extend(w for w in m.words_of_length(min(resolution, 4))[:: max(1, 2 * m.k)])
    else:
        for xi in m.boundary_net(min(resolution, 8)):
            for r in (1.0, 4.0):
                net.append(geodesic_point(ctx, xi, r))
    return net


def geodesic_point(ctx, xi, r):
    """Point at distance ``r`` from x0 on the ray toward a boundary point."""
    m = ctx.model
    if m.name == "tree":
        return type(ctx.basepoint)._raw(xi.head(int(r)), xi.k)
    from .models.h2 import H2Point, SL2Isometry, disk_angle

    # rotate the vertical ray i -> i e^r about i so that it ends at xi
    rot = SL2Isometry.rotation(-0.5 * disk_angle(xi))
    return m.act(rot, H2Point(0.0, math.exp(r)))
