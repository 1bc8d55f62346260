import functools
import itertools

import numpy as np
import pytest
from hypothesis import given

from msac.align import (
    DELETE_Y, INSERT_X, MATCH, SUBSTITUTE, Alignment, NotSubsequence, edit_distance,
    fill_gaps, greedy_align, nw_align,
)
from msac.seqcore import BitSeq, apply_deletion
from msac.simulate import SourceParams, generate
from strategies import bitseqs


def levenshtein(x, y):
    @functools.lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (x[i - 1] != y[j - 1]))
    return d(len(x), len(y))


def full_matrix_ops(x, y):
    """Unbanded reference with the same tie-break: diagonal, then DeleteY, then InsertX."""
    n, m = len(x), len(y)
    D = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 or j == 0:
                D[i][j] = i + j
            else:
                D[i][j] = min(D[i - 1][j - 1] + (x[i - 1] != y[j - 1]), D[i][j - 1] + 1, D[i - 1][j] + 1)
    ops, i, j = [], n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and D[i - 1][j - 1] + (x[i - 1] != y[j - 1]) == D[i][j]:
            ops.append(MATCH if x[i - 1] == y[j - 1] else SUBSTITUTE)
            i, j = i - 1, j - 1
        elif j > 0 and D[i][j - 1] + 1 == D[i][j]:
            ops.append(DELETE_Y)
            j -= 1
        else:
            ops.append(INSERT_X)
            i -= 1
    return ops[::-1]


# --------------------------------------------------------------------------
# greedy

def test_greedy_worked_example():
    y = BitSeq("10110001011")
    x = BitSeq("0100101")
    assert greedy_align(x, y) == BitSeq("10010010001")


def test_greedy_short_example():
    assert greedy_align(BitSeq("010"), BitSeq("0010")) == BitSeq("0100")


@pytest.mark.parametrize("x, y", [("11", "010"), ("0", "111"), ("0101", "010")])
def test_greedy_rejects_non_subsequence(x, y):
    with pytest.raises(NotSubsequence):
        greedy_align(BitSeq(x), BitSeq(y))


@given(bitseqs(max_size=40), bitseqs(max_size=40))
def test_greedy_pattern_reproduces_x(a, b):
    y = a.concat(b)
    flags = np.zeros(len(y), dtype=np.uint8)
    flags[len(a):] = 1
    x = apply_deletion(y, BitSeq(flags))
    pattern = greedy_align(x, y)
    assert apply_deletion(y, pattern) == x
    # leftmost matching keeps every matched bit at or before the planted one
    assert np.all(np.flatnonzero(pattern.bits == 0) <= np.flatnonzero(flags == 0))


# --------------------------------------------------------------------------
# Needleman-Wunsch

def test_exhaustive_short_pairs_match_oracle():
    seqs = [s for k in range(6) for s in itertools.product((0, 1), repeat=k)]
    for x in seqs:
        for y in seqs:
            assert nw_align(BitSeq(x), BitSeq(y)).cost == levenshtein(x, y)


@given(bitseqs(max_size=12), bitseqs(max_size=12))
def test_banded_equals_full_matrix(x, y):
    for budget in (1, 2, 64):
        a = nw_align(x, y, initial_budget=budget)
        assert a.ops.tolist() == full_matrix_ops(x.tolist(), y.tolist())


def test_banded_equals_full_matrix_on_longer_pairs():
    rng = np.random.default_rng(11)
    for _ in range(40):
        x = rng.integers(0, 2, rng.integers(20, 80))
        y = rng.integers(0, 2, rng.integers(20, 80))
        a = nw_align(BitSeq(x), BitSeq(y), initial_budget=1)
        assert a.ops.tolist() == full_matrix_ops(x.tolist(), y.tolist())


def test_large_instance_cost_bounded_by_edits():
    inst = generate(SourceParams(20_000, 0.5, 0.01, 0.01, 0.01, seed=4))
    a = nw_align(inst.x, inst.y)
    planted = inst.d_xpat.popcount() + inst.d_ypat.popcount() + int(np.count_nonzero(inst.z_x.bits != inst.z_y.bits))
    assert a.cost <= planted
    assert Alignment(inst.x, inst.y, a.ops).cost == a.cost


def test_intro_alignment_columns():
    a = Alignment.from_gapped("001101-", "0-10011")
    assert a.cost == 3
    assert [repr(c) for c in a.columns][:3] == ["Match(0, 0)", "InsertX(0)", "Match(1, 1)"]
    assert a.gapped() == ("001101-", "0-10011")
    f = fill_gaps(a)
    assert f.z_x == BitSeq("0011011") and f.z_y == BitSeq("0010011")
    assert edit_distance(BitSeq("001101"), BitSeq("010011")) == 3


def test_alignment_validates_ops():
    with pytest.raises(ValueError):
        Alignment(BitSeq("01"), BitSeq("01"), np.array([MATCH], dtype=np.uint8))
    with pytest.raises(ValueError):
        Alignment(BitSeq("0"), BitSeq("1"), np.array([MATCH], dtype=np.uint8))
    with pytest.raises(ValueError):
        Alignment.from_gapped("0-", "0-")


@given(bitseqs(max_size=30), bitseqs(max_size=30))
def test_gapped_round_trip(x, y):
    a = nw_align(x, y)
    b = Alignment.from_gapped(*a.gapped())
    assert b.ops.tolist() == a.ops.tolist() and b.x == x and b.y == y
