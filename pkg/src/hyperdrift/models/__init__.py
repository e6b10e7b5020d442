"""The two shipped model spaces: H² (b = e) and the Cayley tree of F_k."""
from ..errors import ModelMismatchError
from .base import SpaceModel
from .h2 import (
    INFINITY,
    H2Boundary,
    H2Model,
    H2Point,
    ScaledSL2,
    SL2Isometry,
    h2_distance,
    sl2_act,
    sl2_displacement,
)
from .tree import FreeWord, TreeBoundary, TreeModel


def tree_distance(u, w):
    """Word metric ``|u⁻¹w|``."""
    if not (isinstance(u, FreeWord) and isinstance(w, FreeWord)):
        raise ModelMismatchError("tree_distance takes two FreeWords")
    if u.k != w.k:
        raise ModelMismatchError(f"rank mismatch: {u.k} vs {w.k}")
    return TreeModel(u.k).distance(u, w)


def tree_act(g, p):
    if getattr(p, "k", None) != g.k:
        raise ModelMismatchError(f"rank mismatch: {g.k} vs {getattr(p, 'k', None)}")
    return TreeModel(g.k).act(g, p)


def boundary_net(model, resolution):
    return model.boundary_net(resolution)


def make_model(name, k=2, b=None):
    """Model from its config name (``"h2"`` or ``"tree"``)."""
    if name == "h2":
        return H2Model()
    if name == "tree":
        return TreeModel(k, 2.0 if b is None else b)
    raise ValueError(f"unknown model {name!r}")


__all__ = [
    "INFINITY",
    "FreeWord",
    "H2Boundary",
    "H2Model",
    "H2Point",
    "SL2Isometry",
    "ScaledSL2",
    "SpaceModel",
    "TreeBoundary",
    "TreeModel",
    "boundary_net",
    "h2_distance",
    "make_model",
    "sl2_act",
    "sl2_displacement",
    "tree_act",
    "tree_distance",
]
