"""Upper half-plane model of H² with SL(2,R) acting by Möbius maps.

The metric base is fixed at b = e and the hyperbolicity constant at
δ = ln 2 (the largest δ compatible with b ≤ 2^(1/δ)). The basepoint is i.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ModelMismatchError
from .base import SpaceModel

DET_TOL = 1e-12


@dataclass(frozen=True)
class H2Point:
    re: float
    im: float

    def __post_init__(self):
        if not self.im > 0:
            raise ValueError(f"H2Point needs im > 0, got {self.im}")

    @classmethod
    def from_complex(cls, z):
        return cls(float(z.real), float(z.imag))

    @property
    def z(self):
        return complex(self.re, self.im)

    def __str__(self):
        return f"{self.re!r} {self.im!r}"


@dataclass(frozen=True)
class H2Boundary:
    """Point of R ∪ {∞}; ``xi=None`` is the point at infinity."""

    xi: float | None = None

    def __post_init__(self):
        if self.xi is not None:
            x = float(self.xi)
            if not math.isfinite(x):
                raise ValueError("use H2Boundary(None) for the point at infinity")
            object.__setattr__(self, "xi", x + 0.0)  # folds -0.0 into 0.0

    @property
    def is_infinity(self):
        return self.xi is None

    def __str__(self):
        return "inf" if self.xi is None else repr(self.xi)

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text in ("inf", "∞", "oo"):
            return cls(None)
        return cls(float(text))


INFINITY = H2Boundary(None)


@dataclass(frozen=True)
class SL2Isometry:
    """Unimodular 2x2 matrix ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = [float(v) for v in (self.a, self.b, self.c, self.d)]
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)
        a, b, c, d = vals
        scale = max(1.0, a * a + b * b + c * c + d * d)
        if abs(a * d - b * c - 1.0) > DET_TOL * scale:
            raise ValueError(f"determinant {a * d - b * c!r} is not 1")

    @classmethod
    def _raw(cls, a, b, c, d):
        g = object.__new__(cls)
        object.__setattr__(g, "a", a)
        object.__setattr__(g, "b", b)
        object.__setattr__(g, "c", c)
        object.__setattr__(g, "d", d)
        return g

    @classmethod
    def from_matrix(cls, m, renormalize=False):
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("expected a 2x2 matrix")
        a, b, c, d = m.ravel()
        if renormalize:
            det = a * d - b * c
            if det <= 0:
                raise ValueError("matrix must have positive determinant")
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        return cls(a, b, c, d)

    @classmethod
    def parse(cls, text):
        vals = [float(t) for t in text.split()]
        if len(vals) != 4:
            raise ValueError(f"SL2 matrix needs 4 entries, got {text!r}")
        return cls(*vals)

    @classmethod
    def diag(cls, t):
        return cls._raw(t, 0.0, 0.0, 1.0 / t)

    @classmethod
    def rotation(cls, theta):
        c, s = math.cos(theta), math.sin(theta)
        return cls._raw(c, -s, s, c)

    @classmethod
    def identity(cls):
        return cls._raw(1.0, 0.0, 0.0, 1.0)

    def __str__(self):
        return f"{self.a!r} {self.b!r} {self.c!r} {self.d!r}"

    def as_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, h):
        return SL2Isometry._raw(
            self.a * h.a + self.b * h.c,
            self.a * h.b + self.b * h.d,
            self.c * h.a + self.d * h.c,
            self.c * h.b + self.d * h.d,
        )

    def inverse(self):
        return SL2Isometry._raw(self.d, -self.b, -self.c, self.a)

    def norm(self):
        """Operator norm (largest singular value)."""
        q, p = _qp(self.a, self.b, self.c, self.d)
        return 0.5 * (math.sqrt(q) + math.sqrt(p))

    def log_norm(self):
        return 0.5 * sl2_displacement(self)


def _qp(a, b, c, d):
    # sigma_max = (sqrt(q) + sqrt(p)) / 2, sigma_min = |sqrt(p) - sqrt(q)| / 2
    return (a - d) ** 2 + (b + c) ** 2, (a + d) ** 2 + (b - c) ** 2


def sl2_displacement(g):
    """``2 ln ||g||``, equal to ``d(g·i, i)`` for unimodular g."""
    q, p = _qp(g.a, g.b, g.c, g.d)
    # ||g||^2 = det + (q + sqrt(qp)) / 2 and det = 1
    return math.log1p(0.5 * (q + math.sqrt(q * p)))


def h2_distance(z, w):
    """Hyperbolic distance; same value as ``arccosh(1 + |z-w|²/(2 Im z Im w))``."""
    dz = math.hypot(z.re - w.re, z.im - w.im)
    return 2.0 * math.asinh(dz / (2.0 * math.sqrt(z.im * w.im)))


def sl2_act(g, p):
    if isinstance(p, H2Point):
        den = complex(g.c * p.re + g.d, g.c * p.im)
        num = complex(g.a * p.re + g.b, g.a * p.im)
        w = num / den
        im = p.im / (den.real * den.real + den.imag * den.imag)
        return H2Point(w.real, im)
    if isinstance(p, H2Boundary):
        if p.xi is None:
            return INFINITY if g.c == 0 else H2Boundary(g.a / g.c)
        x = p.xi
        if abs(x) > 1.0:
            # divide through by x so that huge endpoints do not overflow
            t = 1.0 / x
            num, den = g.a + g.b * t, g.c + g.d * t
        else:
            num, den = g.a * x + g.b, g.c * x + g.d
        if den == 0:
            return INFINITY
        return H2Boundary(num / den)
    raise ModelMismatchError(f"cannot act on {p!r}")


def busemann(xi, z):
    """Unnormalized Busemann function of ``xi`` at ``z``."""
    if xi.xi is None:
        return -math.log(z.im)
    return 2.0 * math.log(math.hypot(z.re - xi.xi, z.im)) - math.log(z.im)


def _log_dist_to_base(x, base):
    # ln(y^2 + (x - re)^2) / 2 - ln y : Gromov product of a real point with ∞
    return math.log(math.hypot(base.im, x - base.re)) - math.log(base.im)


def boundary_gromov(xi, eta, base):
    if xi == eta:
        return math.inf
    if xi.xi is None:
        xi, eta = eta, xi
    if eta.xi is None:
        return max(0.0, _log_dist_to_base(xi.xi, base))
    val = (
        _log_dist_to_base(xi.xi, base)
        + _log_dist_to_base(eta.xi, base)
        + math.log(base.im)
        - math.log(abs(xi.xi - eta.xi))
    )
    return max(0.0, val)


def mixed_gromov(xi, z, base):
    val = 0.5 * (h2_distance(base, z) + busemann(xi, base) - busemann(xi, z))
    return max(0.0, val)


def disk_angle(xi):
    """Angle in [0, 2π) of the disk-model image of a boundary point (∞ ↦ 0)."""
    if xi.xi is None:
        return 0.0
    return 2.0 * math.atan2(1.0, -xi.xi)


def from_disk_angle(theta):
    t = math.fmod(theta, 2 * math.pi)
    if t < 0:
        t += 2 * math.pi
    if t == 0.0:
        return INFINITY
    return H2Boundary(-1.0 / math.tan(0.5 * t))


class H2Model(SpaceModel):
    """Hyperbolic plane with b = e, δ = ln 2 and basepoint i."""

    name = "h2"
    exact = False

    def __init__(self):
        self.b = math.e
        self.delta = math.log(2.0)
        self._x0 = H2Point(0.0, 1.0)

    def __repr__(self):
        return "H2Model()"

    def __eq__(self, other):
        return isinstance(other, H2Model)

    def __hash__(self):
        return hash("h2")

    @property
    def basepoint(self):
        return self._x0

    def is_point(self, p):
        return isinstance(p, H2Point)

    def is_boundary(self, p):
        return isinstance(p, H2Boundary)

    def is_isometry(self, g):
        return isinstance(g, SL2Isometry)

    def identity(self):
        return SL2Isometry.identity()

    def distance(self, p, q):
        if not (isinstance(p, H2Point) and isinstance(q, H2Point)):
            raise ModelMismatchError("h2_distance takes two interior points")
        return h2_distance(p, q)

    def act(self, g, p):
        if not isinstance(g, SL2Isometry):
            raise ModelMismatchError(f"{g!r} is not an SL2 isometry")
        return sl2_act(g, p)

    def compose(self, g, h):
        return g @ h

    def inverse(self, g):
        return g.inverse()

    def displacement(self, g):
        return sl2_displacement(g)

    def gromov(self, x, z, base):
        if not isinstance(base, H2Point):
            raise ModelMismatchError("Gromov product base must be an interior point")
        xb, zb = isinstance(x, H2Boundary), isinstance(z, H2Boundary)
        if xb and zb:
            return boundary_gromov(x, z, base)
        if xb:
            return mixed_gromov(x, z, base)
        if zb:
            return mixed_gromov(z, x, base)
        return 0.5 * (h2_distance(x, base) + h2_distance(base, z) - h2_distance(x, z))

    def boundary_net(self, resolution):
        """``resolution`` points equally spaced in disk angle, starting at ∞."""
        if resolution < 1:
            raise ValueError("resolution must be at least 1")
        out = []
        for j in range(resolution):
            if 4 * j == resolution:
                out.append(H2Boundary(-1.0))
            elif 2 * j == resolution:
                out.append(H2Boundary(0.0))
            elif 4 * j == 3 * resolution:
                out.append(H2Boundary(1.0))
            else:
                out.append(from_disk_angle(2 * math.pi * j / resolution))
        return out

    # random sampling used by property suites and chain generators

    def random_point(self, rng, spread=3.0):
        return H2Point(float(rng.normal(0.0, spread)), float(math.exp(rng.normal(0.0, spread / 2))))

    def random_isometry(self, rng, max_shift=4.0):
        t = float(rng.uniform(0.0, max_shift))
        g = SL2Isometry.rotation(float(rng.uniform(0, 2 * math.pi)))
        g = g @ SL2Isometry.diag(math.exp(t / 2))
        return g @ SL2Isometry.rotation(float(rng.uniform(0, 2 * math.pi)))

    def random_boundary(self, rng):
        return from_disk_angle(float(rng.uniform(0.0, 2 * math.pi)))


class ScaledSL2:
    """Running product kept as ``exp(log_scale) * M`` with ``max|M_ij| = 1``.

    Used for long products whose entries would overflow double precision.
    """

    __slots__ = ("m", "log_scale")

    def __init__(self, m=None, log_scale=0.0):
        self.m = (1.0, 0.0, 0.0, 1.0) if m is None else m
        self.log_scale = log_scale

    def copy(self):
        return ScaledSL2(self.m, self.log_scale)

    def mul(self, g):
        a, b, c, d = self.m
        na, nb = a * g.a + b * g.c, a * g.b + b * g.d
        nc, nd = c * g.a + d * g.c, c * g.b + d * g.d
        s = max(abs(na), abs(nb), abs(nc), abs(nd))
        self.m = (na / s, nb / s, nc / s, nd / s)
        self.log_scale += math.log(s)
        return self

    def rmul(self, g):
        """Left-multiply by ``g``."""
        a, b, c, d = self.m
        na, nb = g.a * a + g.b * c, g.a * b + g.b * d
        nc, nd = g.c * a + g.d * c, g.c * b + g.d * d
        s = max(abs(na), abs(nb), abs(nc), abs(nd))
        self.m = (na / s, nb / s, nc / s, nd / s)
        self.log_scale += math.log(s)
        return self

    def displacement(self):
        q, p = _qp(*self.m)
        return 2.0 * (self.log_scale + math.log(0.5 * (math.sqrt(q) + math.sqrt(p))))

    def attracting_point(self):
        """``K·∞`` where ``K`` is the left rotation of the Cartan decomposition.

        The orbit of i under long products converges to this boundary point.
        """
        a, b, c, d = self.m
        s11, s12, s22 = a * a + b * b, a * c + b * d, c * c + d * d
        phi = 0.5 * math.atan2(2.0 * s12, s11 - s22)
        cphi, sphi = math.cos(phi), math.sin(phi)
        if sphi == 0.0:
            return INFINITY
        return H2Boundary(cphi / sphi)

    def to_isometry(self):
        if self.log_scale > 300:
            raise OverflowError("product too large for a plain SL2 matrix")
        f = math.exp(self.log_scale)
        return SL2Isometry._raw(*(f * v for v in self.m))
