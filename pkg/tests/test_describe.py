import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msac import describe as ds
from msac.align import Alignment, greedy_align, nw_align
from msac.seqcore import BitSeq, DeletionPattern, apply_deletion, decompose_runs
from strategies import bitseqs, runny_bitseqs

Y_EX = BitSeq("10110001011")
X_EX = BitSeq("0100101")


# --------------------------------------------------------------------------
# pure deletion

def test_worked_example_counts():
    d_hat = greedy_align(X_EX, Y_EX)
    v = ds.describe_deletions(d_hat, Y_EX)
    assert v.as_tuples() == ((1, 0, 0, 0), (1, 1), (1,))
    assert v.total() == 4
    assert ds.apply_deletion_description(Y_EX, v) == X_EX


def test_true_pattern_gives_same_counts_as_greedy():
    # the hidden pattern deletes other bits of the same runs
    d = DeletionPattern("10010100010")
    assert apply_deletion(Y_EX, d) == X_EX
    assert ds.describe_deletions(d, Y_EX) == ds.describe_deletions(greedy_align(X_EX, Y_EX), Y_EX)


def test_counts_validation():
    rd = decompose_runs(BitSeq("0010"))
    with pytest.raises(ValueError):
        ds.describe_deletions(DeletionPattern("01"), BitSeq("0010"))
    too_many = ds.DeletionDescription.from_per_run(rd, np.array([0, 2, 0]))
    with pytest.raises(ds.DescriptionError):
        ds.apply_deletion_description(BitSeq("0010"), too_many)
    with pytest.raises(ds.DescriptionError):
        ds.RunCounts({1: np.array([0])}).per_run(rd)


def test_run_counts_flat_order_and_equality():
    rd = decompose_runs(Y_EX)
    per_run = np.array([1, 0, 1, 1, 0, 0, 1])
    v = ds.RunCounts.from_per_run(rd, per_run)
    assert v.flat().tolist() == [1, 0, 0, 0, 1, 1, 1]
    assert v.per_run(rd).tolist() == per_run.tolist()
    assert v == ds.RunCounts.from_per_run(rd, per_run.copy())
    assert ds.RunCounts.zeros(rd).total() == 0


@given(runny_bitseqs(), st.data())
def test_deletion_description_round_trip(y, data):
    flags = data.draw(st.lists(st.integers(0, 1), min_size=len(y), max_size=len(y)))
    x = apply_deletion(y, DeletionPattern(flags))
    v = ds.describe_deletions(greedy_align(x, y), y)
    assert ds.apply_deletion_description(y, v) == x


@given(runny_bitseqs(), st.data())
def test_deletions_anywhere_in_a_run_are_equivalent(y, data):
    rd = decompose_runs(y)
    counts = np.array([data.draw(st.integers(0, int(l))) for l in rd.extents], dtype=np.int64)
    canonical = ds.apply_deletion_description(y, ds.DeletionDescription.from_per_run(rd, counts))
    flags = np.zeros(len(y), dtype=np.uint8)
    for start, l, v in zip(rd.starts, rd.extents, counts):
        where = data.draw(st.permutations(range(int(l))))[: int(v)]
        flags[start + np.array(where, dtype=np.int64)] = 1
    assert apply_deletion(y, DeletionPattern(flags)) == canonical


# --------------------------------------------------------------------------
# general case

def test_intro_example_description():
    a = Alignment.from_gapped("001101-", "0-10011")
    g = ds.describe_general(a, a.y)
    # the inserted 0 lengthens the first run of Y
    assert g.ins.extend_counts.as_tuples() == ((1, 0), (0, 0))
    assert g.ins.break_flags == BitSeq("00000")
    assert g.ins.bursts == ()
    assert g.sub.mask == BitSeq("0001000")
    assert g.deletion.as_tuples() == ((0,), (0, 0, 1))
    assert ds.decode_general_description(a.y, g) == BitSeq("001101")


def test_potential_slots():
    assert ds.potential_slots(np.array([0, 0, 1, 1, 1, 0], dtype=np.uint8)).tolist() == [0, 1, 3, 4, 6]
    assert ds.potential_slots(np.array([1], dtype=np.uint8)).tolist() == [0, 1]
    assert ds.potential_slots(np.zeros(0, dtype=np.uint8)).size == 0


def test_break_inserts_complement():
    y1 = np.array([0, 0, 1, 1], dtype=np.uint8)
    # potential slots are 0, 1, 3, 4; flags pick 1 and 4
    assert ds.apply_breaks(y1, BitSeq("0101")).tolist() == [0, 1, 0, 1, 1, 0]
    with pytest.raises(ds.DescriptionError):
        ds.apply_breaks(y1, BitSeq("01"))


def test_break_is_used_for_isolated_insertion():
    y = BitSeq("0000")
    x = BitSeq("00100")
    g = ds.describe_general(nw_align(x, y), y)
    assert g.ins.break_flags.popcount() == 1 and g.ins.extend_counts.total() == 0
    assert ds.decode_general_description(y, g) == x


def test_burst_for_grouped_insertion():
    y = BitSeq("0011")
    x = BitSeq("00101011")
    g = ds.describe_general(Alignment.from_gapped("00101011", "00----11"), y)
    assert [(s, b.to_str()) for s, b in g.ins.bursts] == [(2, "1010")]
    assert ds.decode_general_description(y, g) == x


def test_empty_side_information_uses_bursts():
    x = BitSeq("0110")
    g = ds.describe_general(nw_align(x, BitSeq("")), BitSeq(""))
    assert [(s, b.to_str()) for s, b in g.ins.bursts] == [(0, "0110")]
    assert ds.min_burst_length(0) == 1 and ds.min_burst_length(5) == 2
    assert ds.decode_general_description(BitSeq(""), g) == x


def test_alignment_must_match_side_information():
    with pytest.raises(ValueError):
        ds.describe_general(nw_align(BitSeq("01"), BitSeq("01")), BitSeq("00"))


@st.composite
def alignments(draw, max_cols=24):
    """Arbitrary (not necessarily optimal) alignments."""
    cols = draw(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 1)), max_size=max_cols))
    xs, ys, ops = [], [], []
    for op, b in cols:
        ops.append(op)
        if op in (0, 1):
            xs.append(b)
            ys.append(b if op == 0 else 1 - b)
        elif op == 2:
            xs.append(b)
        else:
            ys.append(b)
    return Alignment(BitSeq(xs), BitSeq(ys), np.array(ops, dtype=np.uint8))


@given(alignments())
def test_any_alignment_round_trips(a):
    g = ds.describe_general(a, a.y)
    assert ds.decode_general_description(a.y, g) == a.x
    inserted = int(np.count_nonzero(a.ops == 2))
    assert g.ins.inserted_bits() == inserted
    assert g.sub.mask.popcount() == int(np.count_nonzero(a.ops == 1))
    assert g.deletion.total() == int(np.count_nonzero(a.ops == 3))


@given(bitseqs(max_size=40), bitseqs(max_size=40))
def test_optimal_alignment_round_trips(x, y):
    g = ds.describe_general(nw_align(x, y), y)
    assert ds.decode_general_description(y, g) == x


@given(runny_bitseqs(), st.data())
def test_extensions_anywhere_in_a_run_are_equivalent(y, data):
    rd = decompose_runs(y)
    ext = np.array([data.draw(st.integers(0, 3)) for _ in range(rd.num_runs)], dtype=np.int64)
    canonical = ds.extend_runs(y, ds.RunCounts.from_per_run(rd, ext), rd)
    out = []
    for sym, l, e in zip(rd.symbols.tolist(), rd.extents.tolist(), ext.tolist()):
        run = [sym] * l
        for _ in range(e):
            run.insert(data.draw(st.integers(0, len(run))), sym)
        out.extend(run)
    assert out == canonical.tolist()
