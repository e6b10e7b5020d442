"""Time the numba kernels against their numpy fallbacks on identical inputs.

    python benchmarks/bench_kernels.py [--samples 4096] [--n 1000] [--repeat 3]

Both implementations are imported directly from ``kernels.IMPLEMENTATIONS``,
so ``HYPERDRIFT_BACKEND`` does not matter here; it only picks what the
library itself uses. The first numba call (compilation) is excluded.
Outputs of the two versions are compared before any timing is reported.
"""
import argparse
import time

import numpy as np

from hyperdrift.dynamics import f2_srw, h2_schottky_srw
from hyperdrift.kernels import IMPLEMENTATIONS
from hyperdrift.rng import uniforms
from hyperdrift.transfer import BoundaryGrid


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_inputs(samples, n, seed=0):
    tree = f2_srw().encoding()
    h2 = h2_schottky_srw().encoding()
    u = uniforms(seed, range(samples), n + 1)
    states = IMPLEMENTATIONS["numpy"]["sample_states"](u, tree.cum0, tree.cumrows)
    checkpoints = np.array([n // 4, n // 2, n], dtype=np.int64)
    grid = BoundaryGrid(f2_srw().model, 6)
    return tree, h2, u, states, checkpoints, grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=4096)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    tree, h2, u, states, cps, grid = make_inputs(args.samples, args.n)
    wcp = np.array([args.n // 10], dtype=np.int64)
    cap = args.n * tree.max_step

    cases = {
        "sample_states": lambda k: k["sample_states"](u, tree.cum0, tree.cumrows),
        "tree_walk": lambda k: k["tree_walk"](states, tree.index, tree.letters, tree.lengths, cps, wcp, cap),
        "sl2_walk": lambda k: k["sl2_walk"](states, h2.index, h2.mats, cps),
    }
    _, words, wlen = IMPLEMENTATIONS["numpy"]["tree_walk"](states, tree.index, tree.letters, tree.lengths, cps, wcp, cap)
    cases["tree_cp_matrix"] = lambda k: k["tree_cp_matrix"](words[:, 0, :], wlen[:, 0], grid.letters)

    print(f"samples={args.samples} n={args.n} repeat={args.repeat}")
    print(f"{'kernel':<16}{'numba s':>12}{'numpy s':>12}{'speedup':>10}  agree")
    for name, call in cases.items():
        nb, npy = IMPLEMENTATIONS["numba"], IMPLEMENTATIONS["numpy"]
        a, b = call(nb), call(npy)  # also warms up the jit
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        if name == "sl2_walk":
            agree = all(np.allclose(x, y, rtol=1e-12, atol=1e-9) for x, y in zip(a, b))
        else:
            agree = all(np.array_equal(x, y) for x, y in zip(a, b))
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(npy), args.repeat)
        print(f"{name:<16}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
