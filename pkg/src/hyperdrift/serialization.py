"""Plain-text kernel / cocycle-map files.

Layout (blank lines and ``#`` comment lines are ignored)::

    m k
    p_00 p_01 ... p_0(m-1)          m probability rows
    ...
    g(0,0)                          m*m isometry tokens, row-major, one per line
    g(0,1)
    ...

``k`` is the free-group rank for the tree model and ``0`` for H². Tree
isometries are reduced words (``a b⁻ a``, identity ``ε``); H² isometries are
the four matrix entries ``a b c d``. A ``-`` marks a transition with no
isometry, which is only allowed where the kernel entry is zero. Floats are
written with ``repr`` so that parse and format invert each other exactly.

A file whose rows are all equal is read as an i.i.d. driver with that row
as step law; otherwise the chain starts from its stationary measure.
"""
from dataclasses import dataclass

import numpy as np

from .markov import MarkovKernel
from .models import FreeWord, SL2Isometry, make_model

UNDEFINED = "-"


@dataclass(frozen=True)
class KernelFile:
    kernel: MarkovKernel
    k: int
    table: dict

    @property
    def m(self):
        return self.kernel.m

    @property
    def model_name(self):
        return "h2" if self.k == 0 else "tree"

    def __eq__(self, other):
        return (
            isinstance(other, KernelFile)
            and self.kernel == other.kernel
            and self.k == other.k
            and self.table == other.table
        )


def _parse_iso(tok, k):
    if k == 0:
        return SL2Isometry.parse(tok)
    return FreeWord.parse(tok, k)


def parse_kernel_text(text):
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("kernel file is empty")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"kernel file header must be 'm k', got {lines[0]!r}")
    m, k = int(head[0]), int(head[1])
    if m < 1 or k < 0:
        raise ValueError(f"bad header values m={m}, k={k}")
    if len(lines) != 1 + m + m * m:
        raise ValueError(f"expected {1 + m + m * m} lines for m={m}, found {len(lines)}")
    rows = [[float(x) for x in ln.split()] for ln in lines[1 : 1 + m]]
    if any(len(r) != m for r in rows):
        raise ValueError(f"every probability row needs {m} entries")
    kernel = MarkovKernel(rows)
    table = {}
    for i, tok in enumerate(lines[1 + m :]):
        s, t = divmod(i, m)
        if tok == UNDEFINED:
            if kernel.rows[s, t] > 0:
                raise ValueError(f"isometry missing on positive transition ({s}, {t})")
            continue
        table[(s, t)] = _parse_iso(tok, k)
    return KernelFile(kernel, k, table)


def format_kernel_text(kf):
    out = [f"{kf.m} {kf.k}"]
    for row in kf.kernel.rows:
        out.append(" ".join(repr(float(x)) for x in row))
    for s in range(kf.m):
        for t in range(kf.m):
            g = kf.table.get((s, t))
            out.append(UNDEFINED if g is None else str(g))
    return "\n".join(out) + "\n"


def read_kernel_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_kernel_text(fh.read())


def write_kernel_file(path, kf):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kernel_text(kf))


def to_cocycle(kf, b=None, name=None):
    from .dynamics import Cocycle, IIDDriver, MarkovDriver

    model = make_model(kf.model_name, k=max(kf.k, 1), b=b)
    rows = kf.kernel.rows
    if np.all(rows == rows[0]):
        driver = IIDDriver(rows[0])
    else:
        driver = MarkovDriver(kf.kernel)
    return Cocycle(model, driver, kf.table, name)


def from_cocycle(c):
    k = 0 if c.model.name == "h2" else c.model.k
    return KernelFile(c.driver.kernel, k, dict(c.table))
