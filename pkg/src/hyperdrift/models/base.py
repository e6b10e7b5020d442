"""Common interface of the shipped model spaces."""
import math
from abc import ABC, abstractmethod

from ..errors import ModelMismatchError


class SpaceModel(ABC):
    """A strongly hyperbolic space together with its isometry group.

    Subclasses fix the metric base ``b``, the hyperbolicity constant ``delta``
    and the basepoint ``x0``. ``exact`` is true when distances and Gromov
    products are integers (no rounding anywhere).
    """

    name = "abstract"
    exact = False

    b: float
    delta: float

    @property
    @abstractmethod
    def basepoint(self): ...

    @abstractmethod
    def is_point(self, p) -> bool:
        """True for interior points of this model."""

    @abstractmethod
    def is_boundary(self, p) -> bool:
        """True for boundary points of this model."""

    @abstractmethod
    def is_isometry(self, g) -> bool: ...

    @abstractmethod
    def distance(self, p, q): ...

    @abstractmethod
    def act(self, g, p): ...

    @abstractmethod
    def compose(self, g, h): ...

    @abstractmethod
    def inverse(self, g): ...

    @abstractmethod
    def identity(self): ...

    @abstractmethod
    def gromov(self, x, z, base):
        """Gromov product of two elements of Bord X seen from an interior point."""

    @abstractmethod
    def boundary_net(self, resolution):
        """Finite list of boundary points covering the boundary."""

    def displacement(self, g):
        """``d(g x0, x0)``."""
        return self.distance(self.act(g, self.basepoint), self.basepoint)

    def same(self, p, q):
        return p == q

    def check_member(self, p):
        if not (self.is_point(p) or self.is_boundary(p)):
            raise ModelMismatchError(f"{p!r} is not a point of {self}")
        return p

    def check_interior(self, p):
        if not self.is_point(p):
            raise ModelMismatchError(f"{p!r} is not an interior point of {self}")
        return p

    def check_isometry(self, g):
        if not self.is_isometry(g):
            raise ModelMismatchError(f"{g!r} is not an isometry of {self}")
        return g

    @property
    def log_b(self):
        return math.log(self.b)
