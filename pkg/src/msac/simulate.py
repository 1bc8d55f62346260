"""Seeded sampler for the source model.

Z_X is iid Bernoulli(p); Z_Y is Z_X through a BSC(q); X and Y are Z_X and
Z_Y with iid Bernoulli(d_x) and Bernoulli(d_y) deletion patterns applied.

Randomness comes from numpy's Philox counter-based generator. Each of the
four streams ("zx", "bsc", "dx", "dy") is keyed by the seed plus a fixed
label, so the streams are independent of one another and of draw order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .seqcore import BitSeq, DeletionPattern, apply_deletion

STREAMS = ("zx", "bsc", "dx", "dy")


@dataclass(frozen=True)
class SourceParams:
    n: int
    p: float = 0.5
    q: float = 0.0
    d_x: float = 0.0
    d_y: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        for name in ("q", "d_x", "d_y"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def pure_deletion(self) -> bool:
        return self.q == 0 and self.d_y == 0

    def with_seed(self, seed: int) -> "SourceParams":
        return SourceParams(self.n, self.p, self.q, self.d_x, self.d_y, seed)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_text(cls, text: str) -> "SourceParams":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ValueError(f"unknown parameter {key!r}")
            values[key] = int(value) if key in ("n", "seed") else float(value)
        return cls(**values)


@dataclass(frozen=True)
class SimInstance:
    z_x: BitSeq
    z_y: BitSeq
    d_xpat: DeletionPattern
    d_ypat: DeletionPattern
    x: BitSeq
    y: BitSeq
    params: SourceParams


def stream(seed: int, label: str) -> np.random.Generator:
    """Independent generator for one named stream of one seed."""
    key = int.from_bytes(label.encode("ascii"), "little")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(key,))
    return np.random.Generator(np.random.Philox(ss))


def _bernoulli(seed: int, label: str, n: int, prob: float) -> np.ndarray:
    return (stream(seed, label).random(n) < prob).astype(np.uint8)


def generate(params: SourceParams) -> SimInstance:
    n, seed = params.n, params.seed
    z_x = BitSeq._wrap(_bernoulli(seed, "zx", n, params.p))
    flips = _bernoulli(seed, "bsc", n, params.q)
    z_y = BitSeq._wrap(z_x.bits ^ flips)
    d_xpat = DeletionPattern._wrap(_bernoulli(seed, "dx", n, params.d_x))
    d_ypat = DeletionPattern._wrap(_bernoulli(seed, "dy", n, params.d_y))
    return SimInstance(
        z_x=z_x,
        z_y=z_y,
        d_xpat=d_xpat,
        d_ypat=d_ypat,
        x=apply_deletion(z_x, d_xpat),
        y=apply_deletion(z_y, d_ypat),
        params=params,
    )


def trial_seeds(base_seed: int, trials: int) -> list[int]:
    """Per-trial seeds: consecutive offsets from the base seed."""
    return [(base_seed + t) % 2**64 for t in range(trials)]
