"""Alignments of a source sequence X against side-information Y.

Two aligners are provided:

* :func:`greedy_align` matches each bit of X to the leftmost unused equal bit
  of Y. It succeeds exactly when X is a subsequence of Y and returns the
  implied deletion pattern over Y.
* :func:`nw_align` computes a minimum-cost alignment under unit substitution
  and gap penalties (the Levenshtein distance).

Column vocabulary, from the point of view of editing Y into X:

* ``MATCH`` / ``SUBSTITUTE``: one bit of each sequence.
* ``INSERT_X``: a bit of X with a gap in Y*.
* ``DELETE_Y``: a bit of Y with a gap in X*.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .seqcore import BitSeq, DeletionPattern

MATCH, SUBSTITUTE, INSERT_X, DELETE_Y = 0, 1, 2, 3
OP_NAMES = ("Match", "Substitute", "InsertX", "DeleteY")
GAP = "-"


class NotSubsequence(ValueError):
    """X cannot be obtained from Y by deletions alone."""


class Column(NamedTuple):
    op: int
    x_bit: int | None
    y_bit: int | None

    def __repr__(self) -> str:
        args = ", ".join(str(b) for b in (self.x_bit, self.y_bit) if b is not None)
        return f"{OP_NAMES[self.op]}({args})"


@dataclass(frozen=True, eq=False)
class Alignment:
    """Gapped pairing of ``x`` and ``y`` stored as one op code per column."""

    x: BitSeq
    y: BitSeq
    ops: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=np.uint8)
        ops.flags.writeable = False
        object.__setattr__(self, "ops", ops)
        if np.count_nonzero(ops != DELETE_Y) != len(self.x):
            raise ValueError("alignment does not consume every bit of x")
        if np.count_nonzero(ops != INSERT_X) != len(self.y):
            raise ValueError("alignment does not consume every bit of y")
        xb, yb = self.x_column_bits(), self.y_column_bits()
        diag = (ops == MATCH) | (ops == SUBSTITUTE)
        if np.any((xb[diag] != yb[diag]) != (ops[diag] == SUBSTITUTE)):
            raise ValueError("match/substitute columns disagree with the bits")

    @property
    def cost(self) -> int:
        return int(np.count_nonzero(self.ops != MATCH))

    def __len__(self) -> int:
        return int(self.ops.size)

    def x_column_bits(self) -> np.ndarray:
        """Bit of X under each column, with the Y bit copied into gaps."""
        out = np.empty(self.ops.size, dtype=np.uint8)
        has_x = self.ops != DELETE_Y
        out[has_x] = self.x.bits
        out[~has_x] = self.y.bits[np.cumsum(self.ops != INSERT_X)[~has_x] - 1]
        return out

    def y_column_bits(self) -> np.ndarray:
        """Bit of Y under each column, with the X bit copied into gaps."""
        out = np.empty(self.ops.size, dtype=np.uint8)
        has_y = self.ops != INSERT_X
        out[has_y] = self.y.bits
        out[~has_y] = self.x.bits[np.cumsum(self.ops != DELETE_Y)[~has_y] - 1]
        return out

    @property
    def columns(self) -> list[Column]:
        xb, yb = self.x_column_bits().tolist(), self.y_column_bits().tolist()
        cols = []
        for op, a, b in zip(self.ops.tolist(), xb, yb):
            cols.append(Column(op, None if op == DELETE_Y else a, None if op == INSERT_X else b))
        return cols

    def gapped(self) -> tuple[str, str]:
        """X* and Y* as strings with ``-`` for gaps."""
        xs = (self.x_column_bits() + ord("0")).tobytes().decode()
        ys = (self.y_column_bits() + ord("0")).tobytes().decode()
        xs = "".join(GAP if op == DELETE_Y else c for op, c in zip(self.ops.tolist(), xs))
        ys = "".join(GAP if op == INSERT_X else c for op, c in zip(self.ops.tolist(), ys))
        return xs, ys

    @classmethod
    def from_gapped(cls, x_star: str, y_star: str) -> "Alignment":
        if len(x_star) != len(y_star):
            raise ValueError("gapped rows must have equal length")
        ops = []
        for a, b in zip(x_star, y_star):
            if a == GAP and b == GAP:
                raise ValueError("column with gaps in both rows")
            if a == GAP:
                ops.append(DELETE_Y)
            elif b == GAP:
                ops.append(INSERT_X)
            else:
                ops.append(MATCH if a == b else SUBSTITUTE)
        return cls(BitSeq(x_star.replace(GAP, "")), BitSeq(y_star.replace(GAP, "")),
                   np.array(ops, dtype=np.uint8))


@dataclass(frozen=True)
class FilledPair:
    z_x: BitSeq
    z_y: BitSeq


def fill_gaps(a: Alignment) -> FilledPair:
    return FilledPair(BitSeq._wrap(a.x_column_bits()), BitSeq._wrap(a.y_column_bits()))


# --------------------------------------------------------------------------
# greedy leftmost alignment
# --------------------------------------------------------------------------

@numba.njit(cache=True)
def _greedy_kernel(x, y, flags):
    i = 0
    for j in range(y.size):
        if i < x.size and x[i] == y[j]:
            i += 1
        else:
            flags[j] = 1
    return i


def greedy_align(x: BitSeq, y: BitSeq) -> DeletionPattern:
    """Deletion pattern over ``y`` that leaves ``x``, matching greedily."""
    flags = np.zeros(len(y), dtype=np.uint8)
    if len(x) > len(y):
        raise NotSubsequence(f"x has {len(x)} bits but y only {len(y)}")
    consumed = _greedy_kernel(x.bits, y.bits, flags)
    if consumed < len(x):
        raise NotSubsequence(
            f"y exhausted after matching {consumed} of {len(x)} bits of x"
        )
    return DeletionPattern._wrap(flags)


# --------------------------------------------------------------------------
# Needleman-Wunsch with unit costs
#
# The DP runs inside a diagonal band: with delta = len(y) - len(x), a path
# through diagonal k = j - i costs at least |k| + |k - delta|, so if the band
# holds every diagonal with |k| + |k - delta| <= C and the best in-band cost
# is <= C, that cost is the global optimum and every optimal path lies in the
# band. A narrow first pass gives an upper bound U on the cost; if it is
# not certified, a second pass with budget U is. Each cell stores
# its preferred predecessor (diagonal, then DeleteY, then InsertX among the
# optimal ones), so the traceback matches the full-matrix one exactly.
# --------------------------------------------------------------------------

_DIAG, _LEFT, _UP = 0, 1, 2


@numba.njit(cache=True)
def _banded_nw(x, y, kmin, kmax, trace):
    """Fill the band, returning D[n][m]; cell (i, j) lives at trace[i, j - i - kmin]."""
    n = x.size
    m = y.size
    width = kmax - kmin + 1
    prev = np.zeros(width, dtype=np.int32)
    cur = np.zeros(width, dtype=np.int32)
    for b in range(-kmin, min(width, m - kmin + 1)):
        prev[b] = b + kmin
        trace[0, b] = _LEFT
    for i in range(1, n + 1):
        xi = x[i - 1]
        b_lo = max(0, -i - kmin)
        b_hi = min(width - 1, m - i - kmin)
        b = b_lo
        if i + kmin + b == 0:
            # column j = 0 is reachable only from above
            cur[b] = prev[b + 1] + 1
            trace[i, b] = _UP
            b += 1
        while b <= b_hi:
            j = i + kmin + b
            best = prev[b] + (0 if xi == y[j - 1] else 1)
            move = _DIAG
            if b >= 1:
                t = cur[b - 1] + 1
                if t < best:
                    best = t
                    move = _LEFT
            if b + 1 < width:
                t = prev[b + 1] + 1
                if t < best:
                    best = t
                    move = _UP
            cur[b] = best
            trace[i, b] = move
            b += 1
        prev, cur = cur, prev
    return prev[m - n - kmin]


@numba.njit(cache=True)
def _traceback(x, y, kmin, trace, ops):
    i = x.size
    j = y.size
    k = ops.size
    while i > 0 or j > 0:
        move = trace[i, j - i - kmin]
        k -= 1
        if i > 0 and j > 0 and move == _DIAG:
            ops[k] = MATCH if x[i - 1] == y[j - 1] else SUBSTITUTE
            i -= 1
            j -= 1
        elif j > 0 and (move == _LEFT or i == 0):
            ops[k] = DELETE_Y
            j -= 1
        else:
            ops[k] = INSERT_X
            i -= 1
    return k


def _band(delta: int, budget: int) -> tuple[int, int]:
    slack = (budget - abs(delta)) // 2
    return min(0, delta) - slack, max(0, delta) + slack


def nw_align(x: BitSeq, y: BitSeq, initial_budget: int = 64) -> Alignment:
    """Minimum-edit alignment of ``x`` and ``y`` with a deterministic tie-break.

    A first pass in a narrow band yields an upper bound on the cost; if it
    is not already certified, a second pass with that bound as budget is.
    """
    n, m = len(x), len(y)
    delta = m - n
    budget = abs(delta) + max(initial_budget, 2)
    while True:
        kmin, kmax = _band(delta, budget)
        kmin, kmax = max(kmin, -n), min(kmax, m)
        trace = np.empty((n + 1, kmax - kmin + 1), dtype=np.uint8)
        cost = int(_banded_nw(x.bits, y.bits, kmin, kmax, trace))
        if cost <= budget or (kmin == -n and kmax == m):
            break
        budget = cost
    ops = np.empty(n + m, dtype=np.uint8)
    start = _traceback(x.bits, y.bits, kmin, trace, ops)
    return Alignment(x, y, ops[start:].copy())


def edit_distance(x: BitSeq, y: BitSeq) -> int:
    return nw_align(x, y).cost
