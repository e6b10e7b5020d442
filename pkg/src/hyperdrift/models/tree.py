"""Cayley tree of the free group F_k.

Points and isometries are both reduced words; the group acts by left
multiplication. Boundary points are infinite reduced words, stored as an
eventually periodic ``prefix + period^inf``.

Letters are nonzero integers: ``+i`` is the i-th generator, ``-i`` its
inverse. Text form uses ``a b c ...`` and a trailing ``⁻`` for inverses.
"""
import itertools
import math
from dataclasses import dataclass, field

from ..errors import ModelMismatchError
from .base import SpaceModel

_INV_MARKS = ("⁻", "-", "^-1")
IDENTITY_TOKEN = "ε"


def letter_name(x):
    name = chr(ord("a") + abs(x) - 1)
    return name if x > 0 else name + "⁻"


def parse_letter(tok):
    for mark in _INV_MARKS:
        if tok.endswith(mark) and len(tok) == len(mark) + 1:
            return -(ord(tok[0]) - ord("a") + 1)
    if len(tok) == 1 and "a" <= tok <= "z":
        return ord(tok) - ord("a") + 1
    if len(tok) == 1 and "A" <= tok <= "Z":
        return -(ord(tok) - ord("A") + 1)
    raise ValueError(f"bad letter token {tok!r}")


def free_reduce(letters):
    out = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(letters):
    return all(letters[i + 1] != -letters[i] for i in range(len(letters) - 1))


def common_prefix(a, b):
    """Length of the longest common prefix of two tuples."""
    n = min(len(a), len(b))
    if a[:n] == b[:n]:
        return n
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid
    return lo


def _join(u, w):
    """Reduced form of the concatenation of two reduced tuples."""
    c = 0
    nu, nw = len(u), len(w)
    while c < nu and c < nw and u[nu - 1 - c] == -w[c]:
        c += 1
    return u[: nu - c] + w[c:], c


def _check_letters(letters, k):
    for x in letters:
        if x == 0 or abs(x) > k:
            raise ValueError(f"letter {x} out of range for rank {k}")


@dataclass(frozen=True)
class FreeWord:
    """Reduced word in F_k."""

    letters: tuple
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        _check_letters(self.letters, self.k)
        if not is_reduced(self.letters):
            raise ValueError(f"word {self.letters} is not reduced")

    @classmethod
    def reduce(cls, letters, k=2):
        return cls(free_reduce(int(x) for x in letters), k)

    @classmethod
    def parse(cls, text, k=2):
        toks = text.split()
        if toks in ([], [IDENTITY_TOKEN], ["1"]):
            return cls((), k)
        return cls.reduce([parse_letter(t) for t in toks], k)

    @classmethod
    def _raw(cls, letters, k):
        w = object.__new__(cls)
        object.__setattr__(w, "letters", letters)
        object.__setattr__(w, "k", k)
        return w

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return IDENTITY_TOKEN
        return " ".join(letter_name(x) for x in self.letters)

    def inverse(self):
        return FreeWord._raw(tuple(-x for x in reversed(self.letters)), self.k)

    def __mul__(self, other):
        if not isinstance(other, FreeWord):
            return NotImplemented
        if other.k != self.k:
            raise ModelMismatchError(f"rank mismatch: {self.k} vs {other.k}")
        return FreeWord._raw(_join(self.letters, other.letters)[0], self.k)

    def __pow__(self, n):
        out = FreeWord._raw((), self.k)
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            out = out * base
        return out


def _primitive_root(period):
    p = len(period)
    for d in range(1, p + 1):
        if p % d == 0 and period == period[:d] * (p // d):
            return period[:d]
    return period


@dataclass(frozen=True)
class TreeBoundary:
    """End of the tree: the infinite reduced word ``prefix · period · period · ...``.

    The pair is kept canonical (shortest prefix, primitive period), so two
    ends are equal iff their fields are equal. ``depth`` records the
    truncation length when the end approximates an aperiodic one (for
    instance a hitting point estimated at finite time); it does not take part
    in equality.
    """

    prefix: tuple
    period: tuple
    k: int = 2
    depth: int | None = field(default=None, compare=False)

    def __post_init__(self):
        prefix = tuple(int(x) for x in self.prefix)
        period = tuple(int(x) for x in self.period)
        if not period:
            raise ValueError("boundary point needs a nonempty period")
        _check_letters(prefix + period, self.k)
        if not is_reduced(prefix) or not is_reduced(period + period[:1]):
            raise ValueError("prefix and period must be reduced and non-cancelling")
        if prefix and prefix[-1] == -period[0]:
            raise ValueError("prefix cancels against the period")
        period = _primitive_root(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1:] + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def ray(cls, word, k=2, depth=None):
        """End obtained by extending a nonempty reduced word with its last letter forever."""
        letters = tuple(word.letters if isinstance(word, FreeWord) else word)
        if not letters:
            raise ValueError("cannot extend the empty word")
        return cls(letters[:-1], letters[-1:], k, depth)

    @classmethod
    def parse(cls, text, k=2):
        """Parse ``"<prefix> ( <period> )"``, e.g. ``"a b ( a )"`` for ``a b a a a ...``."""
        if "(" not in text or not text.rstrip().endswith(")"):
            raise ValueError(f"boundary point needs a '( period )' part: {text!r}")
        head, _, tail = text.partition("(")
        prefix = FreeWord.parse(head, k).letters if head.strip() else ()
        period = FreeWord.parse(tail.rstrip()[:-1], k).letters
        return cls(prefix, period, k)

    def __str__(self):
        pre = " ".join(letter_name(x) for x in self.prefix)
        per = " ".join(letter_name(x) for x in self.period)
        return f"{pre} ( {per} )".strip() if pre else f"( {per} )"

    def letter(self, i):
        n = len(self.prefix)
        return self.prefix[i] if i < n else self.period[(i - n) % len(self.period)]

    def head(self, length):
        n = len(self.prefix)
        if length <= n:
            return self.prefix[:length]
        p = len(self.period)
        reps = -(-(length - n) // p)
        return (self.prefix + self.period * reps)[:length]


def _act_boundary(g, xi):
    p = len(xi.period)
    reps = len(g) // p + 2
    body = xi.prefix + xi.period * reps
    joined, _ = _join(g, body)
    return TreeBoundary(joined, xi.period, xi.k, xi.depth)


def _ends_common_prefix(xi, eta):
    if xi == eta:
        return math.inf
    bound = max(len(xi.prefix), len(eta.prefix)) + math.lcm(len(xi.period), len(eta.period)) + 1
    return common_prefix(xi.head(bound), eta.head(bound))


class TreeModel(SpaceModel):
    """Free group ``F_k`` acting on its Cayley tree (δ = 0, any base b > 1)."""

    name = "tree"
    exact = True

    def __init__(self, k=2, b=2.0):
        if k < 1:
            raise ValueError("rank must be at least 1")
        if not b > 1:
            raise ValueError("metric base b must exceed 1")
        self.k = int(k)
        self.b = float(b)
        self.delta = 0.0
        self._x0 = FreeWord._raw((), self.k)

    def __repr__(self):
        return f"TreeModel(k={self.k}, b={self.b})"

    def __eq__(self, other):
        return isinstance(other, TreeModel) and (self.k, self.b) == (other.k, other.b)

    def __hash__(self):
        return hash(("tree", self.k, self.b))

    @property
    def basepoint(self):
        return self._x0

    def is_point(self, p):
        return isinstance(p, FreeWord) and p.k == self.k

    def is_boundary(self, p):
        return isinstance(p, TreeBoundary) and p.k == self.k

    def is_isometry(self, g):
        return self.is_point(g)

    def identity(self):
        return self._x0

    def word(self, text):
        return FreeWord.parse(text, self.k)

    def end(self, text):
        return TreeBoundary.parse(text, self.k)

    def _same_rank(self, *items):
        for x in items:
            if getattr(x, "k", None) != self.k:
                raise ModelMismatchError(f"{x!r} does not belong to F_{self.k}")

    def distance(self, u, w):
        self._same_rank(u, w)
        if not (isinstance(u, FreeWord) and isinstance(w, FreeWord)):
            raise ModelMismatchError("tree_distance takes two words")
        return len(u.letters) + len(w.letters) - 2 * common_prefix(u.letters, w.letters)

    def act(self, g, p):
        self._same_rank(g, p)
        if isinstance(p, FreeWord):
            return g * p
        if isinstance(p, TreeBoundary):
            return _act_boundary(g.letters, p)
        raise ModelMismatchError(f"cannot act on {p!r}")

    def compose(self, g, h):
        return g * h

    def inverse(self, g):
        return g.inverse()

    def displacement(self, g):
        return len(g.letters)

    def gromov(self, x, z, base):
        self._same_rank(x, z, base)
        if not isinstance(base, FreeWord):
            raise ModelMismatchError("Gromov product base must be an interior point")
        if base.letters:
            inv = base.inverse()
            x, z = self.act(inv, x), self.act(inv, z)
        if isinstance(x, TreeBoundary) and isinstance(z, TreeBoundary):
            return _ends_common_prefix(x, z)
        if isinstance(x, TreeBoundary):
            x, z = z, x
        if isinstance(z, TreeBoundary):
            return common_prefix(x.letters, z.head(len(x.letters)))
        return common_prefix(x.letters, z.letters)

    def boundary_net(self, resolution):
        """All reduced words of length ``resolution``, each continued by its last letter."""
        return [TreeBoundary.ray(w, self.k, depth=resolution) for w in self.words_of_length(resolution)]

    def words_of_length(self, length):
        if length < 1:
            raise ValueError("resolution must be at least 1")
        gens = [x for i in range(1, self.k + 1) for x in (i, -i)]
        out = [(x,) for x in gens]
        for _ in range(length - 1):
            out = [w + (x,) for w in out for x in gens if x != -w[-1]]
        return [FreeWord._raw(w, self.k) for w in out]

    def generators(self):
        return [FreeWord._raw((x,), self.k) for i in range(1, self.k + 1) for x in (i, -i)]

    # random sampling used by property suites and chain generators

    def random_word(self, rng, length):
        """Uniform reduced word of the given length."""
        if length == 0:
            return self._x0
        return FreeWord._raw(self._word_from_uniforms(rng.random(length).tolist()), self.k)

    def _word_from_uniforms(self, u):
        # code c in 0..2k-1 stands for letter (c // 2 + 1) * (+1, -1)[c % 2];
        # later codes skip the inverse of their predecessor
        k2 = 2 * self.k
        c = int(u[0] * k2)
        out = [c]
        for x in u[1:]:
            r = int(x * (k2 - 1))
            c = r + (r >= (c ^ 1))
            out.append(c)
        return tuple((c // 2 + 1) * (1 - 2 * (c % 2)) for c in out)

    def random_point(self, rng, max_length=12):
        u = rng.random(max_length + 1).tolist()
        n = int(u[0] * (max_length + 1))
        return FreeWord._raw(self._word_from_uniforms(u[1 : n + 1]), self.k) if n else self._x0

    def random_isometry(self, rng, max_length=6):
        return self.random_point(rng, max_length)

    def random_boundary(self, rng, max_prefix=8, max_period=3):
        for _ in range(100):
            u = rng.random(max_prefix + max_period + 2).tolist()
            n = int(u[0] * (max_prefix + 1))
            p = 1 + int(u[1] * max_period)
            # one reduced word cut into prefix and period keeps the junction reduced
            word = self._word_from_uniforms(u[2 : 2 + n + p])
            prefix, period = word[:n], word[n:]
            if period[-1] == -period[0]:
                continue
            return TreeBoundary(prefix, period, self.k)
        raise RuntimeError("failed to draw a boundary point")


def all_words(k, max_length):
    """Every reduced word of length at most ``max_length`` (ε first)."""
    model = TreeModel(k)
    return [model.identity()] + list(
        itertools.chain.from_iterable(model.words_of_length(n) for n in range(1, max_length + 1))
    )
