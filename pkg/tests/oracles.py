"""Independent reference computations used by the tests.

Nothing here imports hyperdrift; each function recomputes a quantity from
first principles by a different route than the library.
"""
import cmath
import itertools
import math
from fractions import Fraction


# free group, letters as strings "a", "A" (A = a inverse)


def inv_letter(x):
    return x.swapcase()


def reduce_word(s):
    out = []
    for x in s:
        if out and out[-1] == inv_letter(x):
            out.pop()
        else:
            out.append(x)
    return "".join(out)


def inv_word(s):
    return "".join(inv_letter(x) for x in reversed(s))


def word_distance(u, w):
    """|u^-1 w| by explicit reduction."""
    return len(reduce_word(inv_word(u) + w))


def letters_to_str(letters):
    return "".join(chr(ord("a") + abs(x) - 1) if x > 0 else chr(ord("A") + abs(x) - 1) for x in letters)


def all_reduced(k, length):
    gens = [chr(ord("a") + i) for i in range(k)] + [chr(ord("A") + i) for i in range(k)]
    out = [""]
    for _ in range(length):
        out = [w + x for w in out for x in gens if not (w and w[-1] == inv_letter(x))]
    return out


def srw_expected_length(n, k=2):
    """Exact E|X_n| for simple random walk on F_k via the birth-death chain on |w|."""
    up = Fraction(2 * k - 1, 2 * k)
    dist = {0: Fraction(1)}
    for _ in range(n):
        nxt = {}
        for r, p in dist.items():
            if r == 0:
                nxt[1] = nxt.get(1, 0) + p
            else:
                nxt[r + 1] = nxt.get(r + 1, 0) + p * up
                nxt[r - 1] = nxt.get(r - 1, 0) + p * (1 - up)
        dist = nxt
    return sum(r * p for r, p in dist.items())


def srw_expected_length_bruteforce(n, k=2):
    """Same expectation by enumerating all (2k)^n step sequences."""
    gens = [chr(ord("a") + i) for i in range(k)] + [chr(ord("A") + i) for i in range(k)]
    total = 0
    for steps in itertools.product(gens, repeat=n):
        total += len(reduce_word("".join(steps)))
    return Fraction(total, (2 * k) ** n)


# hyperbolic plane


def h2_dist_arccosh(z, w):
    return math.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))


def h2_dist_disk(z, w):
    """Distance through the Cayley map to the Poincaré disk."""
    def to_disk(u):
        return (u - 1j) / (u + 1j)

    p, q = to_disk(z), to_disk(w)
    t = abs(p - q) / abs(1 - p.conjugate() * q)
    return 2 * math.atanh(t)


def mobius(m, z):
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def busemann_limit(xi, z, base=1j, r=40.0):
    """``d(z, x_r) - d(base, x_r)`` along the geodesic ray from base toward real xi (or inf)."""
    if xi is None:
        x = complex(0, math.exp(r))
        return h2_dist_arccosh(z, x) - h2_dist_arccosh(base, x)
    # move along the semicircle through base and xi; use the disk model for stability
    def to_disk(u):
        return (u - 1j) / (u + 1j)

    def from_disk(p):
        return 1j * (1 + p) / (1 - p)

    target = to_disk(complex(xi, 0))
    p = math.tanh(r / 2) * target / abs(target)
    x = from_disk(p)
    return h2_dist_arccosh(z, x) - h2_dist_arccosh(base, x)


def two_state_stationary(p, q):
    return (q / (p + q), p / (p + q))


def two_state_sigma(p, q):
    return abs(1 - p - q)


def holder_seminorm_loops(values, D, alpha):
    best = 0.0
    m, N = len(values), len(D)
    for s in range(m):
        for i in range(N):
            for j in range(N):
                if i != j:
                    best = max(best, abs(values[s][i] - values[s][j]) / D[i][j] ** alpha)
    return best


def sl2_norm_svd(m):
    import numpy as np

    return float(np.linalg.svd(np.array(m, dtype=float).reshape(2, 2), compute_uv=False)[0])


def phase(z):
    return cmath.phase(z)
