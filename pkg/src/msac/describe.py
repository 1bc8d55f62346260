"""Edit descriptions relative to the runs of a reference sequence.

Pure deletion: for every run of the reference (grouped by extent, left to
right within an extent) record how many of its bits are deleted.

General case, applied to Y in this fixed order:

1. isolated inserted bits equal to a neighbouring bit lengthen that run
   (``extend_counts``), giving Y';
2. isolated inserted bits that differ from both neighbours split a run or
   open a new one at either end (``break_flags`` over the potential slots
   of Y'), giving Y'';
3. groups of two or more inserted bits are bursts, stored with their slot
   in Y'' and their content, giving Z_Y;
4. a substitution mask turns Z_Y into Z_X;
5. deletion counts over the runs of Z_X give X.

Which bit of a run is deleted, or where inside a run an extension goes, does
not change the resulting string, so the decoder uses fixed placements: the
first bits of a run are deleted and extensions are appended at its right end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .align import DELETE_Y, INSERT_X, Alignment, fill_gaps
from .seqcore import BitSeq, DeletionPattern, RunDecomposition, decompose_runs


class DescriptionError(ValueError):
    """A description does not fit the sequence it is applied to."""


class RunCounts:
    """One non-negative integer per run, grouped by run extent.

    ``counts[l]`` lists the values for the runs of extent ``l`` in left to
    right order. Extents from 1 to the longest run are always present (empty
    when no run has that extent).
    """

    __slots__ = ("counts",)

    def __init__(self, counts: dict[int, np.ndarray] | None = None):
        self.counts = {
            int(l): np.asarray(v, dtype=np.int64).reshape(-1) for l, v in (counts or {}).items()
        }

    @classmethod
    def from_per_run(cls, rd: RunDecomposition, per_run: np.ndarray):
        per_run = np.asarray(per_run, dtype=np.int64)
        counts = {l: per_run[rd.extents == l] for l in range(1, rd.max_extent + 1)}
        return cls(counts)

    @classmethod
    def zeros(cls, rd: RunDecomposition):
        return cls.from_per_run(rd, np.zeros(rd.num_runs, dtype=np.int64))

    def per_run(self, rd: RunDecomposition) -> np.ndarray:
        """Scatter the grouped values back to run order, checking the shape."""
        expected = set(range(1, rd.max_extent + 1))
        extra = {l for l, v in self.counts.items() if v.size and l not in expected}
        if extra:
            raise DescriptionError(f"values given for extents {sorted(extra)} absent from the reference")
        out = np.zeros(rd.num_runs, dtype=np.int64)
        for l in expected:
            values = self.counts.get(l, np.zeros(0, dtype=np.int64))
            idx = np.flatnonzero(rd.extents == l)
            if values.size != idx.size:
                raise DescriptionError(
                    f"{values.size} values for extent {l} but the reference has {idx.size} such runs"
                )
            out[idx] = values
        return out

    def flat(self) -> np.ndarray:
        """Values in canonical order: extent ascending, then position."""
        parts = [self.counts[l] for l in sorted(self.counts)]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def total(self) -> int:
        return int(sum(int(v.sum()) for v in self.counts.values()))

    def as_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.counts[l].tolist()) for l in sorted(self.counts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, RunCounts):
            return NotImplemented
        keys = set(self.counts) | set(other.counts)
        empty = np.zeros(0, dtype=np.int64)
        return all(np.array_equal(self.counts.get(l, empty), other.counts.get(l, empty)) for l in keys)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.as_tuples()})"


class DeletionDescription(RunCounts):
    """Number of deleted bits in each run of a reference sequence."""

    __slots__ = ()


@dataclass(frozen=True)
class InsertionDescription:
    extend_counts: RunCounts
    break_flags: BitSeq
    bursts: tuple[tuple[int, BitSeq], ...] = ()

    def inserted_bits(self) -> int:
        return self.extend_counts.total() + self.break_flags.popcount() + sum(len(c) for _, c in self.bursts)


@dataclass(frozen=True)
class SubstitutionMask:
    mask: BitSeq


@dataclass(frozen=True)
class GeneralDescription:
    ins: InsertionDescription
    sub: SubstitutionMask
    deletion: DeletionDescription
    # Diagnostics only; not needed to decode.
    stats: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------------
# pure deletion
# --------------------------------------------------------------------------

def describe_deletions(pattern: DeletionPattern, reference: BitSeq,
                       rd: RunDecomposition | None = None) -> DeletionDescription:
    if len(pattern) != len(reference):
        raise ValueError(
            f"pattern length {len(pattern)} != reference length {len(reference)}"
        )
    rd = rd or decompose_runs(reference)
    if rd.num_runs == 0:
        return DeletionDescription({})
    per_run = np.add.reduceat(pattern.bits.astype(np.int64), rd.starts)
    return DeletionDescription.from_per_run(rd, per_run)


def apply_deletion_description(reference: BitSeq, desc: RunCounts,
                               rd: RunDecomposition | None = None) -> BitSeq:
    """Delete the first ``V`` bits of every designated run of ``reference``."""
    rd = rd or decompose_runs(reference)
    per_run = desc.per_run(rd)
    bad = (per_run < 0) | (per_run > rd.extents)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise DescriptionError(
            f"{int(per_run[k])} deletions requested in a run of extent {int(rd.extents[k])}"
        )
    offset = np.arange(len(reference)) - np.repeat(rd.starts, rd.extents)
    keep = offset >= np.repeat(per_run, rd.extents)
    return BitSeq._wrap(reference.bits[keep])


# --------------------------------------------------------------------------
# general case
# --------------------------------------------------------------------------

def potential_slots(seq: np.ndarray) -> np.ndarray:
    """Slots of ``seq`` where a complementary bit would start a new run.

    Slot ``t`` sits before ``seq[t]``. The two end slots always qualify; an
    inner slot qualifies when its two neighbours are equal. An empty sequence
    has no potential slots, since the inserted value would be undetermined.
    """
    n = seq.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    inner = np.flatnonzero(seq[1:] == seq[:-1]) + 1
    return np.concatenate([[0], inner, [n]]).astype(np.int64)


def _break_bits(seq: np.ndarray, slots: np.ndarray) -> np.ndarray:
    # The bit opposite to the slot's neighbour(s).
    neighbour = seq[np.minimum(slots, seq.size - 1)]
    return (1 - neighbour).astype(np.uint8)


def _groups(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start indices and lengths of the maximal True runs of ``mask``."""
    edges = np.diff(np.r_[0, mask.astype(np.int8), 0])
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return starts, ends - starts


def min_burst_length(y_len: int) -> int:
    # With an empty Y no isolated insertion can be described as an extension
    # or a break, so single inserted bits become one-bit bursts.
    return 1 if y_len == 0 else 2


def describe_general(a: Alignment, y: BitSeq) -> GeneralDescription:
    if a.y != y:
        raise ValueError("alignment was not computed against this side-information")
    ops = a.ops
    filled = fill_gaps(a)
    z_y = filled.z_y.bits
    z_x = filled.z_x.bits
    ybits = y.bits
    m = ybits.size
    rd_y = decompose_runs(y)
    run_of = np.repeat(np.arange(rd_y.num_runs), rd_y.extents)

    has_y = ops != INSERT_X
    y_before = np.cumsum(has_y) - has_y  # Y bits strictly left of each column

    starts, lengths = _groups(ops == INSERT_X)
    kind = np.zeros(ops.size, dtype=np.int8)  # 1 extend, 2 break, 3 burst
    ext = np.zeros(rd_y.num_runs, dtype=np.int64)
    min_burst = min_burst_length(m)
    burst_groups = []
    for c, length in zip(starts.tolist(), lengths.tolist()):
        if length >= min_burst:
            kind[c:c + length] = 3
            burst_groups.append((c, length))
            continue
        s = int(y_before[c])
        b = z_y[c]
        if s > 0 and ybits[s - 1] == b:
            ext[run_of[s - 1]] += 1
            kind[c] = 1
        elif s < m and ybits[s] == b:
            ext[run_of[s]] += 1
            kind[c] = 1
        else:
            kind[c] = 2

    # Coordinates: every column holds one bit of Z_Y. Y'' drops burst bits,
    # Y' additionally drops break bits.
    is_burst = kind == 3
    is_break = kind == 2
    in_y2 = ~is_burst
    in_y1 = in_y2 & ~is_break
    pos_y2 = np.cumsum(in_y2) - in_y2
    pos_y1 = np.cumsum(in_y1) - in_y1

    y1 = z_y[in_y1]
    slots = potential_slots(y1)
    flags = np.zeros(slots.size, dtype=np.uint8)
    break_cols = np.flatnonzero(is_break)
    if break_cols.size:
        t = pos_y1[break_cols]
        rank = np.searchsorted(slots, t)
        if np.any(rank >= slots.size) or np.any(slots[np.minimum(rank, slots.size - 1)] != t):
            raise AssertionError("run-breaking insertion landed on a non-potential slot")
        flags[rank] = 1

    bursts = [(int(pos_y2[c]), BitSeq._wrap(z_y[c:c + length].copy())) for c, length in burst_groups]

    mask = BitSeq._wrap(z_y ^ z_x)
    del_pattern = DeletionPattern._wrap((ops == DELETE_Y).astype(np.uint8))
    deletion = describe_deletions(del_pattern, filled.z_x)
    stats = {
        "extend": int(ext.sum()),
        "break": int(break_cols.size),
        "burst_events": len(bursts),
        "burst_bits": int(np.count_nonzero(is_burst)),
        "substitutions": mask.popcount(),
        "deletions": deletion.total(),
    }
    return GeneralDescription(
        InsertionDescription(RunCounts.from_per_run(rd_y, ext), BitSeq._wrap(flags), tuple(bursts)),
        SubstitutionMask(mask),
        deletion,
        stats,
    )


def extend_runs(y: BitSeq, extend_counts: RunCounts, rd: RunDecomposition | None = None) -> np.ndarray:
    """Y' as a bit array: each run lengthened at its right end."""
    rd = rd or decompose_runs(y)
    ext = extend_counts.per_run(rd)
    if np.any(ext < 0):
        raise DescriptionError("negative extension count")
    return np.repeat(rd.symbols, rd.extents + ext).astype(np.uint8)


def apply_breaks(y1: np.ndarray, flags: BitSeq) -> np.ndarray:
    slots = potential_slots(y1)
    if len(flags) != slots.size:
        raise DescriptionError(
            f"{len(flags)} break flags but Y' has {slots.size} potential slots"
        )
    chosen = slots[flags.bits.astype(bool)]
    if chosen.size == 0:
        return y1
    return np.insert(y1, chosen, _break_bits(y1, chosen))


def apply_bursts(y2: np.ndarray, bursts) -> np.ndarray:
    if not bursts:
        return y2
    pieces = []
    prev = 0
    for slot, content in bursts:
        if slot < prev or slot > y2.size:
            raise DescriptionError(f"burst slot {slot} out of order or beyond length {y2.size}")
        pieces.append(y2[prev:slot])
        pieces.append(content.bits)
        prev = slot
    pieces.append(y2[prev:])
    return np.concatenate(pieces).astype(np.uint8)


def decode_general_description(y: BitSeq, g: GeneralDescription) -> BitSeq:
    y1 = extend_runs(y, g.ins.extend_counts)
    y2 = apply_breaks(y1, g.ins.break_flags)
    z_y = apply_bursts(y2, g.ins.bursts)
    if len(g.sub.mask) != z_y.size:
        raise DescriptionError(
            f"substitution mask covers {len(g.sub.mask)} bits but Z_Y has {z_y.size}"
        )
    z_x = BitSeq._wrap(z_y ^ g.sub.mask.bits)
    return apply_deletion_description(z_x, g.deletion)
