"""Adaptive range coding of description symbols and Elias-gamma integers.

The coder is a byte-oriented 32-bit range coder with carry propagation
(cache byte plus a count of pending 0xFF bytes). Every context owns an
:class:`AdaptiveModel` using the Krichevsky-Trofimov (add-1/2) estimator,
kept in integer form by storing doubled counts: each symbol starts at 1 and
gains 2 per occurrence. All coding arithmetic is integer-only.

Raw (equiprobable) bits share the same stream; they carry the Elias-gamma
codes used for lengths, escapes and burst positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numba
import numpy as np

TOP = 1 << 24
MASK32 = 0xFFFFFFFF
# Counts are halved once a model's total exceeds this; with range >= 2**24
# every symbol keeps a sub-interval of at least 2**4.
MAX_TOTAL = 1 << 20
RAW_CONTEXT = -1
# Number of distinct decision models per family in count coding.
COUNT_DEPTH = 4


class CorruptStreamError(ValueError):
    """The coded stream cannot have been produced by the matching encoder."""


class AdaptiveModel:
    """KT-estimated frequency table for one coding context."""

    __slots__ = ("alphabet_size", "counts")

    def __init__(self, alphabet_size: int):
        if alphabet_size < 1:
            raise ValueError("alphabet_size must be positive")
        if 2 * alphabet_size > MAX_TOTAL:
            raise ValueError(f"alphabet of {alphabet_size} symbols is too large")
        self.alphabet_size = int(alphabet_size)
        self.counts = np.ones(alphabet_size, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def probability(self, symbol: int) -> float:
        return float(self.counts[symbol]) / self.total

    def update(self, symbol: int) -> None:
        _update(self.counts, symbol)

    def copy(self) -> "AdaptiveModel":
        m = AdaptiveModel(self.alphabet_size)
        m.counts = self.counts.copy()
        return m

    def __repr__(self) -> str:
        return f"AdaptiveModel(alphabet_size={self.alphabet_size}, counts={self.counts.tolist()})"


@numba.njit(cache=True)
def _update(counts, symbol):
    counts[symbol] += 2
    total = 0
    for k in range(counts.size):
        total += counts[k]
    if total > MAX_TOTAL:
        for k in range(counts.size):
            counts[k] = (counts[k] + 1) // 2


class ModelSet(dict):
    """Mapping from context id to model that creates models on first use.

    ``alphabet`` maps a context id to its alphabet size; it is consulted only
    when a context is seen for the first time.
    """

    def __init__(self, alphabet=lambda ctx: 2):
        super().__init__()
        self._alphabet = alphabet

    def __missing__(self, ctx):
        model = AdaptiveModel(self._alphabet(ctx))
        self[ctx] = model
        return model


@dataclass(frozen=True)
class CodedStream:
    data: bytes

    @property
    def bit_length(self) -> int:
        return 8 * len(self.data)

    def __len__(self) -> int:
        return len(self.data)


# --------------------------------------------------------------------------
# numba kernels
#
# Encoder state (int64[4]): low, range, cache (-1 = no byte yet), pending.
# Decoder state (int64[3]): range, code, read position.
# --------------------------------------------------------------------------

@numba.njit(cache=True)
def _shift_low(state, out, n_out):
    low = state[0]
    if low < 0xFF000000 or low > MASK32:
        carry = low >> 32
        if state[2] >= 0:
            out[n_out] = (state[2] + carry) & 0xFF
            n_out += 1
        for _ in range(state[3]):
            out[n_out] = (0xFF + carry) & 0xFF
            n_out += 1
        state[3] = 0
        state[2] = (low >> 24) & 0xFF
    else:
        state[3] += 1
    state[0] = (low << 8) & MASK32
    return n_out


@numba.njit(cache=True)
def _encode_one(state, out, n_out, cum, freq, total):
    rng = state[1]
    lo = rng * cum // total
    state[0] += lo
    state[1] = rng * (cum + freq) // total - lo
    while state[1] < TOP:
        state[1] <<= 8
        n_out = _shift_low(state, out, n_out)
    return n_out


@numba.njit(cache=True)
def _encode_kernel(state, out, ctx, syms, counts, alpha):
    n_out = 0
    for k in range(syms.size):
        c = ctx[k]
        s = syms[k]
        if c < 0:
            n_out = _encode_one(state, out, n_out, s, 1, 2)
            continue
        row = counts[c]
        cum = 0
        for t in range(s):
            cum += row[t]
        total = cum
        for t in range(s, alpha[c]):
            total += row[t]
        n_out = _encode_one(state, out, n_out, cum, row[s], total)
        _update(row[: alpha[c]], s)
    return n_out


@numba.njit(cache=True)
def _finish_kernel(state, out):
    # Pick the value in [low, low + range) with the most trailing zero bits;
    # range >= 2**24 so a multiple of 2**24 always exists.
    n_out = 0
    state[0] = (state[0] + 0xFFFFFF) & ~np.int64(0xFFFFFF)
    n_out = _shift_low(state, out, n_out)
    n_out = _shift_low(state, out, n_out)
    return n_out


@numba.njit(cache=True)
def _next_byte(data, state):
    pos = state[2]
    state[2] = pos + 1
    if pos < data.size:
        return np.int64(data[pos])
    return np.int64(0)


@numba.njit(cache=True)
def _decode_kernel(state, data, ctx, counts, alpha, out):
    """Decode ``ctx.size`` symbols into ``out``.

    Returns the number decoded, or ``-1 - k`` if symbol ``k`` is impossible.
    """
    for k in range(ctx.size):
        c = ctx[k]
        rng = state[0]
        code = state[1]
        if c < 0:
            half = rng // 2
            if code >= rng:
                return -1 - k
            if code < half:
                rng = half
                out[k] = 0
            else:
                code -= half
                rng -= half
                out[k] = 1
        else:
            row = counts[c]
            a = alpha[c]
            total = 0
            for t in range(a):
                total += row[t]
            v = ((code + 1) * total - 1) // rng
            if v >= total:
                return -1 - k
            s = 0
            cum = 0
            while cum + row[s] <= v:
                cum += row[s]
                s += 1
            lo = rng * cum // total
            rng = rng * (cum + row[s]) // total - lo
            code -= lo
            out[k] = s
            _update(row[:a], s)
        while rng < TOP:
            rng <<= 8
            code = ((code << 8) | _next_byte(data, state)) & MASK32
        state[0] = rng
        state[1] = code
    return ctx.size


@numba.njit(cache=True)
def _encode_counts_kernel(state, out, fam, values, limits, counts, depth):
    n_out = 0
    for t in range(values.size):
        v = values[t]
        base = fam[t] * depth
        k = 0
        while k < limits[t]:
            row = counts[base + min(k, depth - 1)]
            bit = 1 if v > k else 0
            n_out = _encode_one(state, out, n_out, row[0] * bit, row[bit], row[0] + row[1])
            _update(row, bit)
            if bit == 0:
                break
            k += 1
    return n_out


@numba.njit(cache=True)
def _decode_counts_kernel(state, data, fam, limits, counts, depth, total_limit, out):
    decoded = 0
    for t in range(limits.size):
        base = fam[t] * depth
        k = 0
        while k < limits[t]:
            row = counts[base + min(k, depth - 1)]
            rng = state[0]
            code = state[1]
            total = row[0] + row[1]
            v = ((code + 1) * total - 1) // rng
            if v >= total:
                return -1 - t
            bit = 1 if v >= row[0] else 0
            cum = row[0] * bit
            lo = rng * cum // total
            rng = rng * (cum + row[bit]) // total - lo
            code -= lo
            _update(row, bit)
            while rng < TOP:
                rng <<= 8
                code = ((code << 8) | _next_byte(data, state)) & MASK32
            state[0] = rng
            state[1] = code
            if bit == 0:
                break
            k += 1
            decoded += 1
            if decoded > total_limit:
                return -1 - t
        out[t] = k
    return limits.size


def _pack_models(contexts: Sequence[Hashable], models: Mapping) -> tuple[np.ndarray, np.ndarray]:
    width = max(models[c].alphabet_size for c in contexts)
    counts = np.zeros((len(contexts), width), dtype=np.int64)
    alpha = np.empty(len(contexts), dtype=np.int64)
    for k, c in enumerate(contexts):
        m = models[c]
        counts[k, : m.alphabet_size] = m.counts
        alpha[k] = m.alphabet_size
    return counts, alpha


def _pack_count_models(families: np.ndarray, models: Mapping, depth: int):
    keys, fam = np.unique(families, return_inverse=True)
    keys = keys.tolist()
    counts = np.empty((len(keys) * depth, 2), dtype=np.int64)
    for a, f in enumerate(keys):
        for k in range(depth):
            m = models[(f, k)]
            if m.alphabet_size != 2:
                raise ValueError("count decisions need binary models")
            counts[a * depth + k] = m.counts
    return keys, fam.astype(np.int64).reshape(-1), counts


def _unpack_count_models(keys, models, counts, depth) -> None:
    for a, f in enumerate(keys):
        for k in range(depth):
            models[(f, k)].counts = counts[a * depth + k].copy()


def _unpack_models(contexts, models, counts) -> None:
    for k, c in enumerate(contexts):
        m = models[c]
        m.counts = counts[k, : m.alphabet_size].copy()


def _index_contexts(ctx_ids) -> tuple[list, np.ndarray]:
    if isinstance(ctx_ids, np.ndarray) and np.issubdtype(ctx_ids.dtype, np.integer):
        raw = ctx_ids == RAW_CONTEXT
        contexts, inverse = np.unique(ctx_ids[~raw], return_inverse=True)
        idx = np.full(ctx_ids.size, -1, dtype=np.int64)
        idx[~raw] = inverse
        return contexts.tolist(), idx
    table: dict = {}
    idx = np.empty(len(ctx_ids), dtype=np.int64)
    for k, c in enumerate(ctx_ids):
        if c is None or c == RAW_CONTEXT:
            idx[k] = -1
        else:
            idx[k] = table.setdefault(c, len(table))
    return list(table), idx


class RangeEncoder:
    """Incremental encoder; symbols are fed in batches that share one stream."""

    def __init__(self):
        self._state = np.array([0, MASK32, -1, 0], dtype=np.int64)
        self._out = bytearray()
        self._finished = False

    def encode(self, ctx_ids, symbols, models: Mapping) -> None:
        """Encode ``symbols[k]`` under context ``ctx_ids[k]``.

        ``ctx_ids`` may be a single context id applied to every symbol.
        Models are updated in place.
        """
        syms = np.asarray(symbols, dtype=np.int64)
        if syms.size == 0:
            return
        if ctx_ids is None or np.isscalar(ctx_ids) or isinstance(ctx_ids, tuple):
            contexts, idx = [ctx_ids], np.zeros(syms.size, dtype=np.int64)
            if ctx_ids is None or ctx_ids == RAW_CONTEXT:
                contexts, idx = [], np.full(syms.size, -1, dtype=np.int64)
        else:
            contexts, idx = _index_contexts(ctx_ids if isinstance(ctx_ids, np.ndarray) else list(ctx_ids))
            if len(idx) != syms.size:
                raise ValueError("one context id per symbol is required")
        if contexts:
            counts, alpha = _pack_models(contexts, models)
            coded = idx >= 0
            if np.any(syms < 0) or np.any(syms[coded] >= alpha[idx[coded]]):
                raise ValueError("symbol outside its context's alphabet")
        else:
            counts = np.zeros((1, 1), dtype=np.int64)
            alpha = np.ones(1, dtype=np.int64)
        if np.any((idx < 0) & ((syms < 0) | (syms > 1))):
            raise ValueError("raw symbols must be bits")
        self._run(idx, syms, counts, alpha)
        if contexts:
            _unpack_models(contexts, models, counts)

    def encode_counts(self, families, values, limits, models: Mapping, depth: int = COUNT_DEPTH) -> None:
        """Code bounded non-negative counts as unary binary decisions.

        Count ``values[t]`` (at most ``limits[t]``) becomes "> 0?", "> 1?", ...
        decisions, stopping at the first "no" or once the limit is reached.
        Decision ``k`` is coded with the binary model ``(families[t],
        min(k, depth - 1))`` of ``models``, so every family keeps its own
        distribution while rare large counts share one tail model.
        """
        values = np.asarray(values, dtype=np.int64)
        limits = np.broadcast_to(np.asarray(limits, dtype=np.int64), values.shape)
        if values.size == 0:
            return
        if np.any(values < 0) or np.any(values > limits):
            raise ValueError("count outside [0, limit]")
        keys, fam, counts = _pack_count_models(np.asarray(families), models, depth)
        if self._finished:
            raise RuntimeError("encoder already finished")
        decisions = int(np.minimum(values + 1, limits).sum())
        out = np.empty(3 * decisions + 16, dtype=np.uint8)
        n_out = _encode_counts_kernel(self._state, out, fam, values, np.ascontiguousarray(limits), counts, depth)
        self._out += out[:n_out].tobytes()
        _unpack_count_models(keys, models, counts, depth)

    def encode_bits(self, bits) -> None:
        """Append equiprobable raw bits (a '0'/'1' string or int iterable)."""
        if isinstance(bits, str):
            bits = [int(b) for b in bits]
        syms = np.asarray(bits, dtype=np.int64)
        if syms.size == 0:
            return
        if syms.min() < 0 or syms.max() > 1:
            raise ValueError("raw symbols must be bits")
        self._run(np.full(syms.size, -1, dtype=np.int64), syms,
                  np.zeros((1, 1), dtype=np.int64), np.ones(1, dtype=np.int64))

    def encode_uint(self, n: int) -> None:
        self.encode_bits(encode_uint(n))

    def _run(self, idx, syms, counts, alpha):
        if self._finished:
            raise RuntimeError("encoder already finished")
        out = np.empty(3 * syms.size + 16, dtype=np.uint8)
        n_out = _encode_kernel(self._state, out, idx, syms, counts, alpha)
        self._out += out[:n_out].tobytes()

    def finish(self) -> CodedStream:
        if not self._finished:
            out = np.empty(16 + int(self._state[3]), dtype=np.uint8)
            n_out = _finish_kernel(self._state, out)
            self._out += out[:n_out].tobytes()
            self._finished = True
        # The decoder reads zeros past the end, so trailing zeros are implied.
        return CodedStream(bytes(self._out).rstrip(b"\x00"))


class RangeDecoder:
    def __init__(self, stream):
        data = stream.data if isinstance(stream, CodedStream) else bytes(stream)
        self._data = np.frombuffer(data, dtype=np.uint8)
        self._state = np.array([MASK32, 0, 0], dtype=np.int64)
        for _ in range(4):
            self._state[1] = (self._state[1] << 8) | _next_byte(self._data, self._state)

    @property
    def bytes_consumed(self) -> int:
        return int(self._state[2])

    def decode(self, ctx_ids, models: Mapping, count: int | None = None) -> np.ndarray:
        """Decode one symbol per entry of ``ctx_ids``.

        If ``ctx_ids`` is a single context id, ``count`` symbols are decoded
        under it.
        """
        if count is not None:
            if count == 0:
                return np.zeros(0, dtype=np.int64)
            if ctx_ids is None or ctx_ids == RAW_CONTEXT:
                contexts, idx = [], np.full(count, -1, dtype=np.int64)
            else:
                contexts, idx = [ctx_ids], np.zeros(count, dtype=np.int64)
        else:
            contexts, idx = _index_contexts(ctx_ids if isinstance(ctx_ids, np.ndarray) else list(ctx_ids))
        if idx.size == 0:
            return np.zeros(0, dtype=np.int64)
        if contexts:
            counts, alpha = _pack_models(contexts, models)
        else:
            counts = np.zeros((1, 1), dtype=np.int64)
            alpha = np.ones(1, dtype=np.int64)
        out = np.empty(idx.size, dtype=np.int64)
        done = _decode_kernel(self._state, self._data, idx, counts, alpha, out)
        if done < 0:
            raise CorruptStreamError(f"impossible code value at symbol {-1 - done}")
        if contexts:
            _unpack_models(contexts, models, counts)
        return out

    def decode_counts(self, families, limits, models: Mapping, depth: int = COUNT_DEPTH,
                      total_limit: int | None = None) -> np.ndarray:
        """Inverse of :meth:`RangeEncoder.encode_counts`.

        ``total_limit`` caps the sum of the decoded counts.
        """
        families = np.asarray(families)
        limits = np.ascontiguousarray(np.broadcast_to(np.asarray(limits, dtype=np.int64), families.shape))
        if families.size == 0:
            return np.zeros(0, dtype=np.int64)
        keys, fam, counts = _pack_count_models(families, models, depth)
        out = np.empty(families.size, dtype=np.int64)
        if total_limit is None:
            total_limit = int(limits.sum())
        done = _decode_counts_kernel(self._state, self._data, fam, limits, counts, depth, total_limit, out)
        if done < 0:
            raise CorruptStreamError(f"impossible code value at count {-1 - done}")
        _unpack_count_models(keys, models, counts, depth)
        return out

    def decode_bits(self, count: int) -> np.ndarray:
        return self.decode(RAW_CONTEXT, {}, count=count)

    def decode_uint(self, limit: int = 1 << 40) -> int:
        """Read one Elias-gamma integer bit by bit; ``limit`` bounds the value."""
        zeros = 0
        while self.decode_bits(1)[0] == 0:
            zeros += 1
            if zeros > limit.bit_length():
                raise CorruptStreamError("gamma prefix longer than any legal value")
        rest = self.decode_bits(zeros)
        value = 1
        for b in rest.tolist():
            value = (value << 1) | b
        if value - 1 > limit:
            raise CorruptStreamError(f"decoded integer {value - 1} exceeds limit {limit}")
        return value - 1


def encode_symbols(symbols: Iterable[tuple[Hashable, int]], models: Mapping) -> CodedStream:
    """Code ``(context_id, symbol)`` pairs into one stream, updating ``models``."""
    pairs = list(symbols)
    enc = RangeEncoder()
    if pairs:
        ctxs, syms = zip(*pairs)
        enc.encode(list(ctxs), list(syms), models)
    return enc.finish()


def decode_symbols(stream: CodedStream, schedule: Sequence[Hashable], models: Mapping) -> list[int]:
    return RangeDecoder(stream).decode(list(schedule), models).tolist()


def adaptive_code_length(symbols: Sequence[int], alphabet_size: int) -> float:
    """Ideal code length in bits of ``symbols`` under one fresh adaptive model."""
    counts = np.ones(alphabet_size, dtype=np.int64)
    return float(_adaptive_length_kernel(np.asarray(symbols, dtype=np.int64), counts))


@numba.njit(cache=True)
def _adaptive_length_kernel(syms, counts):
    bits = 0.0
    for k in range(syms.size):
        total = 0
        for t in range(counts.size):
            total += counts[t]
        bits -= np.log2(counts[syms[k]] / total)
        _update(counts, syms[k])
    return bits


# --------------------------------------------------------------------------
# Elias gamma
# --------------------------------------------------------------------------

def encode_uint(n: int) -> str:
    """Elias-gamma code of ``n + 1`` as a '0'/'1' string."""
    if n < 0:
        raise ValueError("encode_uint takes non-negative integers")
    body = bin(n + 1)[2:]
    return "0" * (len(body) - 1) + body


def decode_uint(bits: str, pos: int = 0) -> tuple[int, int]:
    """Inverse of :func:`encode_uint`; returns ``(value, next_position)``."""
    zeros = 0
    while True:
        if pos + zeros >= len(bits):
            raise ValueError("truncated gamma code")
        if bits[pos + zeros] == "1":
            break
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise ValueError("truncated gamma code")
    return int(bits[pos + zeros:end], 2) - 1, end
