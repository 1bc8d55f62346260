import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from msac.seqcore import (
    BitSeq, DeletionPattern, FormatError, apply_deletion, decode_raw, decompose_runs,
    encode_raw, nth_run_of_extent, random_bits, read_bits, write_bits,
)
from strategies import bitseqs, runny_bitseqs


def test_construction_forms_agree():
    ref = BitSeq("01101")
    assert BitSeq([0, 1, 1, 0, 1]) == ref
    assert BitSeq(np.array([False, True, True, False, True])) == ref
    assert BitSeq(ref) == ref
    assert ref == [0, 1, 1, 0, 1]
    assert ref.to_str() == "01101" and len(ref) == 5 and ref.popcount() == 3


@pytest.mark.parametrize("bad", ["012", [0, 2], [-1], np.array([[0, 1]]), [0.5]])
def test_rejects_non_bits(bad):
    with pytest.raises(ValueError):
        BitSeq(bad)


def test_immutable_and_copied():
    src = np.array([0, 1, 1], dtype=np.uint8)
    s = BitSeq(src)
    src[0] = 1
    assert s.to_str() == "011"
    with pytest.raises(ValueError):
        s.bits[0] = 1


def test_xor_concat_slice():
    a, b = BitSeq("0110"), BitSeq("1100")
    assert a.xor(b) == BitSeq("1010")
    assert a.concat(b) == BitSeq("01101100")
    assert a[1:3] == BitSeq("11") and a[2] == 1
    with pytest.raises(ValueError):
        a.xor(BitSeq("1"))


def test_packing_is_msb_first():
    assert BitSeq("10000000" "1").to_packed() == bytes([0x80, 0x80])
    assert BitSeq.from_packed(bytes([0xA0]), 3) == BitSeq("101")


@given(bitseqs(max_size=200))
def test_raw_format_round_trip(s):
    data = encode_raw(s)
    assert len(data) == 8 + (len(s) + 7) // 8
    assert decode_raw(data) == s


def test_raw_format_known_bytes():
    assert encode_raw(BitSeq("101")) == bytes([3, 0, 0, 0, 0, 0, 0, 0, 0xA0])
    assert encode_raw(BitSeq("")) == bytes(8)


@pytest.mark.parametrize("data", [b"", b"\x03\x00", bytes([9] + [0] * 7) + b"\x00",
                                  bytes([3] + [0] * 7) + b"\x00\x00"])
def test_raw_format_rejects_bad_lengths(data):
    with pytest.raises(FormatError):
        decode_raw(data)


def test_file_round_trip(tmp_path):
    s = BitSeq("1101001")
    write_bits(tmp_path / "s.bits", s)
    assert read_bits(tmp_path / "s.bits") == s


def test_runs_of_worked_example():
    rd = decompose_runs(BitSeq("10110001011"))
    assert rd.extents.tolist() == [1, 1, 2, 3, 1, 1, 2]
    assert rd.symbols.tolist() == [1, 0, 1, 0, 1, 0, 1]
    assert rd.max_extent == 3
    assert [rd.count(l) for l in (1, 2, 3, 4)] == [4, 2, 1, 0]
    assert rd.grouped_order().tolist() == [0, 1, 4, 5, 2, 6, 3]
    assert rd.rank_in_extent().tolist() == [1, 2, 1, 1, 3, 4, 2]
    assert nth_run_of_extent(rd, 2, 2) == (9, 2)
    with pytest.raises(IndexError):
        nth_run_of_extent(rd, 3, 2)


def test_runs_of_empty_sequence():
    rd = decompose_runs(BitSeq(""))
    assert rd.num_runs == 0 and rd.max_extent == 0 and rd.expand() == BitSeq("")


def _runs_oracle(bits):
    runs = []
    for b in bits:
        if runs and runs[-1][0] == b:
            runs[-1][1] += 1
        else:
            runs.append([b, 1])
    return runs


@given(runny_bitseqs())
def test_runs_match_oracle_and_expand(s):
    rd = decompose_runs(s)
    assert [list(r[:2]) for r in rd.runs] == _runs_oracle(s.tolist())
    assert rd.expand() == s
    assert rd.length == len(s)
    assert sum(rd.extent_counts.values()) == rd.num_runs
    # neighbouring runs always alternate
    assert np.all(rd.symbols[1:] != rd.symbols[:-1])


@given(bitseqs(max_size=100), st.data())
def test_apply_deletion_keeps_unflagged_bits(s, data):
    flags = data.draw(st.lists(st.integers(0, 1), min_size=len(s), max_size=len(s)))
    out = apply_deletion(s, DeletionPattern(flags))
    assert out.tolist() == [b for b, f in zip(s.tolist(), flags) if not f]


def test_apply_deletion_length_mismatch():
    with pytest.raises(ValueError):
        apply_deletion(BitSeq("01"), DeletionPattern("1"))


def test_random_bits_bias():
    s = random_bits(np.random.default_rng(1), 100_000, 0.1)
    assert abs(s.popcount() / len(s) - 0.1) < 0.005
