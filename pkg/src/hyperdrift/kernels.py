"""Hot loops of the Monte-Carlo engine.

Each kernel exists twice: a numba ``@njit`` version that walks one sample at
a time, and a numpy version vectorized across samples. Both consume the same
pre-drawn uniforms and produce bit-identical integer outputs; float outputs
agree to rounding. ``HYPERDRIFT_BACKEND`` picks the exported one.
"""
import numpy as np

from ._backend import BACKEND, njit

# sample_states -------------------------------------------------------------


@njit
def _sample_states_nb(u, cum0, cumrows):
    S, T = u.shape
    m = cum0.shape[0]
    out = np.empty((S, T), dtype=np.int64)
    for s in range(S):
        j = 0
        x = u[s, 0]
        while j < m - 1 and cum0[j] <= x:
            j += 1
        out[s, 0] = j
        for t in range(1, T):
            row = out[s, t - 1]
            x = u[s, t]
            j = 0
            while j < m - 1 and cumrows[row, j] <= x:
                j += 1
            out[s, t] = j
    return out


def _sample_states_np(u, cum0, cumrows):
    S, T = u.shape
    m = cum0.shape[0]
    out = np.empty((S, T), dtype=np.int64)
    out[:, 0] = np.minimum((cum0[None, :] <= u[:, :1]).sum(axis=1), m - 1)
    for t in range(1, T):
        rows = cumrows[out[:, t - 1]]
        out[:, t] = np.minimum((rows <= u[:, t : t + 1]).sum(axis=1), m - 1)
    return out


# tree_walk -----------------------------------------------------------------


@njit
def _tree_walk_nb(states, table, letters, lengths, checkpoints, word_checkpoints, cap):
    S, T = states.shape
    nc = checkpoints.shape[0]
    nw = word_checkpoints.shape[0]
    disp = np.empty((S, nc), dtype=np.int64)
    words = np.zeros((S, nw, cap), dtype=np.int8)
    wlen = np.zeros((S, nw), dtype=np.int64)
    stack = np.empty(cap, dtype=np.int8)
    for s in range(S):
        L = 0
        ci = 0
        wi = 0
        for t in range(T):
            if t > 0:
                g = table[states[s, t - 1], states[s, t]]
                for j in range(lengths[g]):
                    x = letters[g, j]
                    if L > 0 and stack[L - 1] == -x:
                        L -= 1
                    else:
                        stack[L] = x
                        L += 1
            while ci < nc and checkpoints[ci] == t:
                disp[s, ci] = L
                ci += 1
            while wi < nw and word_checkpoints[wi] == t:
                wlen[s, wi] = L
                for j in range(L):
                    words[s, wi, j] = stack[j]
                wi += 1
    return disp, words, wlen


def _tree_walk_np(states, table, letters, lengths, checkpoints, word_checkpoints, cap):
    S, T = states.shape
    nc = checkpoints.shape[0]
    nw = word_checkpoints.shape[0]
    disp = np.empty((S, nc), dtype=np.int64)
    words = np.zeros((S, nw, cap), dtype=np.int8)
    wlen = np.zeros((S, nw), dtype=np.int64)
    stack = np.zeros((S, cap + 1), dtype=np.int8)
    L = np.zeros(S, dtype=np.int64)
    rows = np.arange(S)
    ci = wi = 0
    maxlen = letters.shape[1]
    for t in range(T):
        if t > 0:
            g = table[states[:, t - 1], states[:, t]]
            glen = lengths[g]
            for j in range(maxlen):
                active = glen > j
                if not active.any():
                    break
                x = letters[g, j]
                top = stack[rows, np.maximum(L - 1, 0)]
                cancel = active & (L > 0) & (top == -x)
                push = active & ~cancel
                L[cancel] -= 1
                stack[rows[push], L[push]] = x[push]
                L[push] += 1
        while ci < nc and checkpoints[ci] == t:
            disp[:, ci] = L
            ci += 1
        while wi < nw and word_checkpoints[wi] == t:
            wlen[:, wi] = L
            words[:, wi, :] = stack[:, :cap]
            mask = np.arange(cap)[None, :] >= L[:, None]
            words[:, wi, :][mask] = 0
            wi += 1
    return disp, words, wlen


# sl2_walk ------------------------------------------------------------------


@njit
def _sl2_walk_nb(states, table, mats, checkpoints):
    S, T = states.shape
    nc = checkpoints.shape[0]
    disp = np.empty((S, nc), dtype=np.float64)
    for s in range(S):
        a, b, c, d = 1.0, 0.0, 0.0, 1.0
        acc = 0.0
        ci = 0
        for t in range(T):
            if t > 0:
                g = table[states[s, t - 1], states[s, t]]
                ga, gb, gc, gd = mats[g, 0], mats[g, 1], mats[g, 2], mats[g, 3]
                na = a * ga + b * gc
                nb = a * gb + b * gd
                nc_ = c * ga + d * gc
                nd = c * gb + d * gd
                sc = max(max(abs(na), abs(nb)), max(abs(nc_), abs(nd)))
                a, b, c, d = na / sc, nb / sc, nc_ / sc, nd / sc
                acc += np.log(sc)
            while ci < nc and checkpoints[ci] == t:
                q = (a - d) ** 2 + (b + c) ** 2
                p = (a + d) ** 2 + (b - c) ** 2
                disp[s, ci] = 2.0 * (acc + np.log(0.5 * (np.sqrt(q) + np.sqrt(p))))
                ci += 1
    return disp


def _sl2_walk_np(states, table, mats, checkpoints):
    S, T = states.shape
    nc = checkpoints.shape[0]
    disp = np.empty((S, nc), dtype=np.float64)
    a = np.ones(S)
    b = np.zeros(S)
    c = np.zeros(S)
    d = np.ones(S)
    acc = np.zeros(S)
    ci = 0
    for t in range(T):
        if t > 0:
            g = table[states[:, t - 1], states[:, t]]
            ga, gb, gc, gd = mats[g, 0], mats[g, 1], mats[g, 2], mats[g, 3]
            na = a * ga + b * gc
            nb = a * gb + b * gd
            nc_ = c * ga + d * gc
            nd = c * gb + d * gd
            sc = np.maximum(np.maximum(np.abs(na), np.abs(nb)), np.maximum(np.abs(nc_), np.abs(nd)))
            a, b, c, d = na / sc, nb / sc, nc_ / sc, nd / sc
            acc += np.log(sc)
        while ci < nc and checkpoints[ci] == t:
            q = (a - d) ** 2 + (b + c) ** 2
            p = (a + d) ** 2 + (b - c) ** 2
            disp[:, ci] = 2.0 * (acc + np.log(0.5 * (np.sqrt(q) + np.sqrt(p))))
            ci += 1
    return disp


# tree_cp_matrix --------------------------------------------------------------


@njit
def _tree_cp_matrix_nb(words, wlen, cells):
    S = words.shape[0]
    N, L = cells.shape
    out = np.empty((S, N), dtype=np.int64)
    for s in range(S):
        n = wlen[s]
        for k in range(N):
            j = 0
            while j < n:
                want = cells[k, j] if j < L else cells[k, L - 1]
                if words[s, j] != want:
                    break
                j += 1
            out[s, k] = j
    return out


def _tree_cp_matrix_np(words, wlen, cells):
    S, cap = words.shape
    N, L = cells.shape
    ext = np.empty((N, cap), dtype=np.int8)
    ext[:, : min(L, cap)] = cells[:, : min(L, cap)]
    if cap > L:
        ext[:, L:] = cells[:, L - 1 : L]
    out = np.empty((S, N), dtype=np.int64)
    for s in range(S):
        n = wlen[s]
        if n == 0:
            out[s] = 0
            continue
        neq = words[s, None, :n] != ext[:, :n]
        first = np.where(neq.any(axis=1), neq.argmax(axis=1), n)
        out[s] = first
    return out


IMPLEMENTATIONS = {
    "numba": {
        "sample_states": _sample_states_nb,
        "tree_walk": _tree_walk_nb,
        "sl2_walk": _sl2_walk_nb,
        "tree_cp_matrix": _tree_cp_matrix_nb,
    },
    "numpy": {
        "sample_states": _sample_states_np,
        "tree_walk": _tree_walk_np,
        "sl2_walk": _sl2_walk_np,
        "tree_cp_matrix": _tree_cp_matrix_np,
    },
}

_active = IMPLEMENTATIONS[BACKEND]
sample_states = _active["sample_states"]
tree_walk = _active["tree_walk"]
sl2_walk = _active["sl2_walk"]
tree_cp_matrix = _active["tree_cp_matrix"]
