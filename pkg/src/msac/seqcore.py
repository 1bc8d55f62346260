"""Binary sequences, deletion patterns and run decomposition."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

BitLike = Union["BitSeq", np.ndarray, Iterable[int], str]


class FormatError(ValueError):
    """Raised when a raw bit file or bit literal is malformed."""


def _as_bit_array(bits) -> np.ndarray:
    if isinstance(bits, BitSeq):
        return bits.bits
    if isinstance(bits, str):
        bits = bits.strip()
        if bits and set(bits) - {"0", "1"}:
            raise ValueError(f"bit string may only contain 0 and 1: {bits!r}")
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        return arr.astype(np.uint8)
    arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits))
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("bit sequences are one-dimensional")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"bits must be integers, got dtype {arr.dtype}")
    if arr.min() < 0 or arr.max() > 1:
        raise ValueError("every element of a bit sequence must be 0 or 1")
    return arr.astype(np.uint8)


class BitSeq:
    """Immutable finite binary sequence.

    Bits live in a read-only ``uint8`` array, one bit per element, so every
    operation can be vectorised; :meth:`to_packed` gives the 8-bits-per-byte
    form used on disk.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits: BitLike = ()):
        arr = _as_bit_array(bits)
        if arr.base is not None or arr.flags.writeable:
            arr = arr.copy()
        arr.flags.writeable = False
        self._bits = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray):
        # Trusted constructor: arr is a fresh uint8 0/1 array owned by the caller.
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        obj._bits = arr
        return obj

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def length(self) -> int:
        return int(self._bits.size)

    def __len__(self) -> int:
        return int(self._bits.size)

    def __iter__(self):
        return iter(self._bits.tolist())

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return type(self)._wrap(self._bits[idx].copy())
        return int(self._bits[idx])

    def __eq__(self, other) -> bool:
        if isinstance(other, BitSeq):
            return np.array_equal(self._bits, other._bits)
        if isinstance(other, (tuple, list)):
            return self.tolist() == list(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.length, self.to_packed()))

    def __repr__(self) -> str:
        if len(self) <= 64:
            return f"{type(self).__name__}('{self.to_str()}')"
        return f"{type(self).__name__}(len={len(self)}, head='{self[:32].to_str()}...')"

    def tolist(self) -> list[int]:
        return self._bits.tolist()

    def to_str(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def popcount(self) -> int:
        return int(np.count_nonzero(self._bits))

    def concat(self, other: "BitSeq") -> "BitSeq":
        return type(self)._wrap(np.concatenate([self._bits, other.bits]))

    def xor(self, other: "BitSeq") -> "BitSeq":
        if len(other) != len(self):
            raise ValueError("xor of sequences with different lengths")
        return BitSeq._wrap(self._bits ^ other.bits)

    def to_packed(self) -> bytes:
        """Bits packed MSB-first, final partial byte zero-padded."""
        return np.packbits(self._bits).tobytes()

    @classmethod
    def from_packed(cls, data: bytes, length: int):
        if length < 0 or (length + 7) // 8 > len(data):
            raise FormatError(f"{len(data)} bytes cannot hold {length} bits")
        arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=length)
        return cls._wrap(arr.astype(np.uint8))


class DeletionPattern(BitSeq):
    """0/1 flags over a parent sequence; 1 marks a removed position."""

    __slots__ = ()


# --------------------------------------------------------------------------
# raw bit file format: <u64 little-endian bit count> <ceil(n/8) packed bytes>
# --------------------------------------------------------------------------

def encode_raw(seq: BitSeq) -> bytes:
    return struct.pack("<Q", len(seq)) + seq.to_packed()


def decode_raw(data: bytes) -> BitSeq:
    if len(data) < 8:
        raise FormatError("raw bit file shorter than its 8-byte length header")
    (n,) = struct.unpack_from("<Q", data)
    body = data[8:]
    if len(body) != (n + 7) // 8:
        raise FormatError(
            f"raw bit file declares {n} bits but carries {len(body)} bytes "
            f"(expected {(n + 7) // 8})"
        )
    return BitSeq.from_packed(body, n)


def read_bits(path) -> BitSeq:
    return decode_raw(Path(path).read_bytes())


def write_bits(path, seq: BitSeq) -> None:
    Path(path).write_bytes(encode_raw(seq))


# --------------------------------------------------------------------------
# runs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RunDecomposition:
    """Maximal runs of a sequence, in left-to-right order.

    ``symbols``, ``extents`` and ``starts`` are parallel arrays with one entry
    per run. ``extent_counts[l]`` is the number of runs of extent ``l`` and is
    only populated for extents that occur.
    """

    symbols: np.ndarray
    extents: np.ndarray
    starts: np.ndarray
    extent_counts: dict[int, int] = field(default_factory=dict)

    @property
    def max_extent(self) -> int:
        """Longest run, or 0 when there are no runs."""
        return int(self.extents.max()) if self.extents.size else 0

    @property
    def num_runs(self) -> int:
        return int(self.extents.size)

    @property
    def length(self) -> int:
        return int(self.extents.sum())

    @property
    def runs(self) -> list[tuple[int, int, int]]:
        return list(zip(self.symbols.tolist(), self.extents.tolist(), self.starts.tolist()))

    def count(self, extent: int) -> int:
        return self.extent_counts.get(extent, 0)

    def grouped_order(self) -> np.ndarray:
        """Run indices sorted by (extent, position).

        This is the canonical order of per-run descriptions: all extent-1 runs
        left to right, then all extent-2 runs, and so on.
        """
        return np.argsort(self.extents, kind="stable")

    def rank_in_extent(self) -> np.ndarray:
        """1-based rank of every run among the runs sharing its extent."""
        order = self.grouped_order()
        ext_sorted = self.extents[order]
        ranks_sorted = np.arange(1, order.size + 1)
        if order.size:
            first = np.r_[True, ext_sorted[1:] != ext_sorted[:-1]]
            group_start = np.maximum.accumulate(np.where(first, np.arange(order.size), 0))
            ranks_sorted = ranks_sorted - group_start
        ranks = np.empty_like(ranks_sorted)
        ranks[order] = ranks_sorted
        return ranks

    def expand(self) -> BitSeq:
        return BitSeq._wrap(np.repeat(self.symbols, self.extents).astype(np.uint8))


def decompose_runs(seq: BitSeq) -> RunDecomposition:
    bits = seq.bits
    n = bits.size
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return RunDecomposition(empty.astype(np.uint8), empty, empty.copy(), {})
    starts = np.flatnonzero(np.r_[True, bits[1:] != bits[:-1]]).astype(np.int64)
    extents = np.diff(np.r_[starts, n]).astype(np.int64)
    values, counts = np.unique(extents, return_counts=True)
    extent_counts = {int(v): int(c) for v, c in zip(values, counts)}
    return RunDecomposition(bits[starts].copy(), extents, starts, extent_counts)


def nth_run_of_extent(rd: RunDecomposition, extent: int, i: int) -> tuple[int, int]:
    """Start index and extent of the ``i``-th (1-based) run of the given extent."""
    u = rd.count(extent)
    if not 1 <= i <= u:
        raise IndexError(f"run {i} of extent {extent} requested but only {u} exist")
    idx = np.flatnonzero(rd.extents == extent)[i - 1]
    return int(rd.starts[idx]), extent


def apply_deletion(parent: BitSeq, pattern: DeletionPattern) -> BitSeq:
    if len(pattern) != len(parent):
        raise ValueError(
            f"deletion pattern length {len(pattern)} != parent length {len(parent)}"
        )
    return BitSeq._wrap(parent.bits[pattern.bits == 0])


def random_bits(rng: np.random.Generator, n: int, p: float = 0.5) -> BitSeq:
    """iid Bernoulli(p) bits drawn from ``rng``."""
    return BitSeq._wrap((rng.random(n) < p).astype(np.uint8))
