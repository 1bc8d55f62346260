"""Message format and the encode/decode pipelines.

Wire layout::

    b"MSAC" | version (1 byte) | mode (1 byte) | gamma(len X), zero-padded to
    a byte boundary | range-coded payload (to the end of the message)

Counts attached to runs are coded with
:meth:`~msac.entropy.RangeEncoder.encode_counts`: one family of adaptive
models per run extent, runs visited in order of extent then position.

Mode 0 (pure deletion) payload: one deletion count per run of Y (at most
the run's extent).

Mode 1 (general) payload, in this order:

1. ``extend``: one extension count per run of Y;
2. ``break``: one flag per potential slot of Y' (single binary context);
3. ``burst``: gamma(count), then per burst gamma(slot gap), gamma(length
   minus the minimum burst length) and the content as raw bits;
4. ``substitution``: the mask over Z_Y (single binary context);
5. ``deletion``: one count per run of Z_X (extent contexts).

The decoder recomputes every run structure and slot count from Y, so none
of them are transmitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import describe as ds
from .align import NotSubsequence, greedy_align, nw_align
from .entropy import CodedStream, CorruptStreamError, ModelSet, RangeDecoder, RangeEncoder, decode_uint, encode_uint
from .seqcore import BitSeq, decompose_runs

MAGIC = b"MSAC"
VERSION = 1
MODE_PURE = 0
MODE_GENERAL = 1
# encode_auto also tries the general mode on subsequence pairs when Y is at
# most this long; beyond it the O(n * edits) alignment is skipped.
AUTO_COMPARE_LIMIT = 1 << 14

SECTIONS = ("header", "extend", "break", "burst", "substitution", "deletion")


class CorruptionError(ValueError):
    """A message could not be decoded against the given side-information."""

    def __init__(self, section: str, detail: str):
        super().__init__(f"corrupt message in section '{section}': {detail}")
        self.section = section
        self.detail = detail


@dataclass(frozen=True)
class Message:
    mode: int
    x_length: int
    payload: CodedStream
    version: int = VERSION

    @property
    def payload_bits(self) -> int:
        return self.payload.bit_length

    def header_bytes(self) -> bytes:
        gamma = encode_uint(self.x_length)
        gamma += "0" * (-len(gamma) % 8)
        return MAGIC + bytes([self.version, self.mode]) + int(gamma, 2).to_bytes(len(gamma) // 8, "big")

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.payload.data

    def __len__(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Message":
        if len(data) < 7 or data[:4] != MAGIC:
            raise CorruptionError("header", "missing MSAC magic")
        version, mode = data[4], data[5]
        if version != VERSION:
            raise CorruptionError("header", f"unsupported version {version}")
        if mode not in (MODE_PURE, MODE_GENERAL):
            raise CorruptionError("header", f"unknown mode {mode}")
        # gamma codes of lengths below 2**64 fit in 16 bytes
        head = data[6:6 + 16]
        bits = "".join(f"{b:08b}" for b in head)
        try:
            x_length, used = decode_uint(bits)
        except ValueError as exc:
            raise CorruptionError("header", str(exc)) from None
        offset = 6 + (used + 7) // 8
        return cls(mode, x_length, CodedStream(bytes(data[offset:])), version)


def _binary_models():
    return ModelSet(lambda c: 2)


# --------------------------------------------------------------------------
# pure deletion
# --------------------------------------------------------------------------

def encode_pure_description(desc: ds.DeletionDescription, y: BitSeq, x_length: int) -> Message:
    rd = decompose_runs(y)
    per_run = desc.per_run(rd)
    order = rd.grouped_order()
    enc = RangeEncoder()
    enc.encode_counts(rd.extents[order], per_run[order], rd.extents[order], _binary_models())
    return Message(MODE_PURE, x_length, enc.finish())


def encode_pure(x: BitSeq, y: BitSeq) -> Message:
    """Pure-deletion codec; raises :class:`NotSubsequence` otherwise."""
    pattern = greedy_align(x, y)
    return encode_pure_description(ds.describe_deletions(pattern, y), y, len(x))


def decode_pure_description(m: Message, y: BitSeq) -> ds.DeletionDescription:
    if m.mode != MODE_PURE:
        raise ValueError("not a pure-deletion message")
    if m.x_length > len(y):
        raise CorruptionError("header", f"x_length {m.x_length} exceeds len(Y) = {len(y)}")
    rd = decompose_runs(y)
    order = rd.grouped_order()
    try:
        values = RangeDecoder(m.payload).decode_counts(rd.extents[order], rd.extents[order], _binary_models())
    except CorruptStreamError as exc:
        raise CorruptionError("deletion", str(exc)) from None
    per_run = np.empty(rd.num_runs, dtype=np.int64)
    per_run[order] = values
    return ds.DeletionDescription.from_per_run(rd, per_run)


def decode_pure(m: Message, y: BitSeq) -> BitSeq:
    desc = decode_pure_description(m, y)
    if len(y) - desc.total() != m.x_length:
        raise CorruptionError(
            "deletion", f"decoded {len(y) - desc.total()} bits, header says {m.x_length}"
        )
    return ds.apply_deletion_description(y, desc)


# --------------------------------------------------------------------------
# general
# --------------------------------------------------------------------------

def encode_general_description(g: ds.GeneralDescription, y: BitSeq, x_length: int) -> Message:
    enc = RangeEncoder()

    rd_y = decompose_runs(y)
    order = rd_y.grouped_order()
    ext = g.ins.extend_counts.per_run(rd_y)[order]
    enc.encode_counts(rd_y.extents[order], ext, x_length + len(y), _binary_models())

    enc.encode(0, g.ins.break_flags.bits, _binary_models())

    min_burst = ds.min_burst_length(len(y))
    enc.encode_uint(len(g.ins.bursts))
    prev = 0
    for slot, content in g.ins.bursts:
        enc.encode_uint(slot - prev)
        enc.encode_uint(len(content) - min_burst)
        enc.encode_bits(content.bits)
        prev = slot

    enc.encode(0, g.sub.mask.bits, _binary_models())

    z_x = ds.apply_bursts(
        ds.apply_breaks(ds.extend_runs(y, g.ins.extend_counts, rd_y), g.ins.break_flags), g.ins.bursts
    ) ^ g.sub.mask.bits
    rd_zx = decompose_runs(BitSeq._wrap(z_x))
    order_zx = rd_zx.grouped_order()
    ext_zx = rd_zx.extents[order_zx]
    enc.encode_counts(ext_zx, g.deletion.per_run(rd_zx)[order_zx], ext_zx, _binary_models())
    return Message(MODE_GENERAL, x_length, enc.finish())


def encode_general(x: BitSeq, y: BitSeq) -> Message:
    g = ds.describe_general(nw_align(x, y), y)
    return encode_general_description(g, y, len(x))


class _SectionReader:
    def __init__(self, dec: RangeDecoder):
        self.dec = dec
        self.section = "extend"

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type in (CorruptStreamError, ds.DescriptionError):
            raise CorruptionError(self.section, str(exc)) from None
        return False


def decode_general_description(m: Message, y: BitSeq) -> ds.GeneralDescription:
    if m.mode != MODE_GENERAL:
        raise ValueError("not a general-mode message")
    dec = RangeDecoder(m.payload)
    # Every column of an alignment holds a bit of X or of Y, which bounds
    # all insertion counts; corrupt data cannot force huge allocations.
    budget = m.x_length + len(y)
    with _SectionReader(dec) as r:
        rd_y = decompose_runs(y)
        order = rd_y.grouped_order()
        ext_sorted = dec.decode_counts(rd_y.extents[order], budget, _binary_models(), total_limit=budget)
        ext = np.empty(rd_y.num_runs, dtype=np.int64)
        ext[order] = ext_sorted
        if ext.sum() > budget:
            raise ds.DescriptionError("more extensions than the message can hold")
        extend_counts = ds.RunCounts.from_per_run(rd_y, ext)
        y1 = ds.extend_runs(y, extend_counts, rd_y)

        r.section = "break"
        slots = ds.potential_slots(y1)
        flags = BitSeq._wrap(dec.decode(0, _binary_models(), count=slots.size).astype(np.uint8))
        y2 = ds.apply_breaks(y1, flags)

        r.section = "burst"
        min_burst = ds.min_burst_length(len(y))
        count = dec.decode_uint(limit=budget)
        bursts = []
        slot = 0
        burst_bits = 0
        for _ in range(count):
            slot += dec.decode_uint(limit=budget)
            length = dec.decode_uint(limit=budget) + min_burst
            burst_bits += length
            if slot > y2.size or burst_bits > budget:
                raise ds.DescriptionError("burst outside the sequence")
            bursts.append((slot, BitSeq._wrap(dec.decode_bits(length).astype(np.uint8))))
        z_y = ds.apply_bursts(y2, bursts)

        r.section = "substitution"
        mask = BitSeq._wrap(dec.decode(0, _binary_models(), count=z_y.size).astype(np.uint8))
        z_x = BitSeq._wrap(z_y ^ mask.bits)

        r.section = "deletion"
        rd_zx = decompose_runs(z_x)
        order_zx = rd_zx.grouped_order()
        ext_zx = rd_zx.extents[order_zx]
        values = dec.decode_counts(ext_zx, ext_zx, _binary_models())
        per_run = np.empty(rd_zx.num_runs, dtype=np.int64)
        per_run[order_zx] = values
        deletion = ds.DeletionDescription.from_per_run(rd_zx, per_run)
    return ds.GeneralDescription(
        ds.InsertionDescription(extend_counts, flags, tuple(bursts)),
        ds.SubstitutionMask(mask),
        deletion,
    )


def decode_general(m: Message, y: BitSeq) -> BitSeq:
    g = decode_general_description(m, y)
    try:
        x = ds.decode_general_description(y, g)
    except ds.DescriptionError as exc:
        raise CorruptionError("deletion", str(exc)) from None
    if len(x) != m.x_length:
        raise CorruptionError("deletion", f"decoded {len(x)} bits, header says {m.x_length}")
    return x


# --------------------------------------------------------------------------
# front door
# --------------------------------------------------------------------------

def encode_auto(x: BitSeq, y: BitSeq, compare_limit: int = AUTO_COMPARE_LIMIT) -> Message:
    """Pure mode when X is a subsequence of Y, unless general is strictly smaller."""
    try:
        pure = encode_pure(x, y)
    except NotSubsequence:
        return encode_general(x, y)
    if len(y) <= compare_limit:
        general = encode_general(x, y)
        if len(general.payload) < len(pure.payload):
            return general
    return pure


def encode(x: BitSeq, y: BitSeq, mode: str = "auto") -> Message:
    if mode == "auto":
        return encode_auto(x, y)
    if mode == "pure":
        return encode_pure(x, y)
    if mode == "general":
        return encode_general(x, y)
    raise ValueError(f"unknown mode {mode!r}")


def decode(m: Message | bytes, y: BitSeq) -> BitSeq:
    if not isinstance(m, Message):
        m = Message.from_bytes(m)
    if m.mode == MODE_PURE:
        return decode_pure(m, y)
    return decode_general(m, y)
