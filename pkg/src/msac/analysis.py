"""Baselines, closed-form rates, an exact small-n oracle and benchmark harnesses.

Rates are reported per bit of side information (payload bits / len(Y)),
with bits per source bit alongside for convenience.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from . import describe as ds
from .align import greedy_align
from .container import encode_pure
from .entropy import ModelSet, RangeEncoder
from .seqcore import BitSeq, decompose_runs
from .simulate import SourceParams, generate, trial_seeds

CODECS = ("no_si", "dhat_direct", "w_runs", "msac")
CODEC_TITLES = {
    "no_si": "No SI",
    "dhat_direct": "D-hat direct",
    "w_runs": "W-hat runs",
    "msac": "Per-extent runs",
}


def h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def theoretical_c(tol: float = 1e-12) -> float:
    """sum over l >= 1 of 2^(-l-1) * l * log2(l), truncated once terms drop below ``tol``."""
    total, l = 0.0, 1
    while True:
        term = 2.0 ** (-l - 1) * l * math.log2(l)
        total += term
        # terms grow until l = 3, so only stop on the way down
        if l > 3 and term < tol:
            return total
        l += 1


def theoretical_rate_pure(d: float) -> float:
    """Leading-order rate of the per-extent codec for p = 1/2."""
    if not 0.0 < d < 0.5:
        raise ValueError(f"d must lie in (0, 1/2), got {d}")
    return h2(d) - theoretical_c() * d


# --------------------------------------------------------------------------
# baselines (all return payload bits)
# --------------------------------------------------------------------------

def _binary_models():
    return ModelSet(lambda c: 2)


def baseline_dhat_direct(x: BitSeq, y: BitSeq) -> int:
    """Code the flags of the greedy deletion pattern under one adaptive context."""
    pattern = greedy_align(x, y)
    enc = RangeEncoder()
    enc.encode(0, pattern.bits, _binary_models())
    return enc.finish().bit_length


def baseline_w_runs(x: BitSeq, y: BitSeq) -> int:
    """Per-run deletion counts of Y, all runs sharing one context family."""
    pattern = greedy_align(x, y)
    rd = decompose_runs(y)
    w = ds.describe_deletions(pattern, y, rd).per_run(rd)
    enc = RangeEncoder()
    enc.encode_counts(np.zeros(rd.num_runs, dtype=np.int64), w, rd.max_extent, _binary_models())
    return enc.finish().bit_length


def baseline_no_si(x: BitSeq) -> int:
    """Adaptive order-0 coding of X without side information."""
    enc = RangeEncoder()
    enc.encode(0, x.bits, _binary_models())
    return enc.finish().bit_length


# --------------------------------------------------------------------------
# exact oracle for tiny n
# --------------------------------------------------------------------------

@numba.njit(cache=True)
def _conditional_entropy_kernel(n, p, d):
    size = 1 << n
    # X of length L and value v is stored at index (1 << L) - 1 + v
    dist = np.zeros(2 * size, dtype=np.float64)
    pat_prob = np.empty(size, dtype=np.float64)
    for dm in range(size):
        k = 0
        for t in range(n):
            k += (dm >> t) & 1
        pat_prob[dm] = d ** k * (1 - d) ** (n - k)
    h = 0.0
    for z in range(size):
        w = 0
        for t in range(n):
            w += (z >> t) & 1
        pz = p ** w * (1 - p) ** (n - w)
        dist[:] = 0.0
        for dm in range(size):
            v = 0
            length = 0
            for t in range(n - 1, -1, -1):
                if not (dm >> t) & 1:
                    v = (v << 1) | ((z >> t) & 1)
                    length += 1
            dist[(1 << length) - 1 + v] += pat_prob[dm]
        hz = 0.0
        for k in range(dist.size):
            if dist[k] > 0.0:
                hz -= dist[k] * np.log2(dist[k])
        h += pz * hz
    return h


def _binomial_entropy(n: int, d: float) -> float:
    probs = [math.comb(n, k) * d ** k * (1 - d) ** (n - k) for k in range(n + 1)]
    return -sum(q * math.log2(q) for q in probs if q > 0)


def bruteforce_conditional_entropy(params: SourceParams, given_length: bool = False) -> float:
    """Exact H(X|Y)/n for the pure-deletion source by full enumeration.

    With ``given_length`` the conditioning also includes len(X), which the
    message header carries; since len(X) is a function of X this just
    subtracts the binomial entropy of the deletion count.
    """
    if not params.pure_deletion:
        raise ValueError("the oracle covers the pure-deletion source only (q = d_y = 0)")
    if params.n > 12:
        raise ValueError(f"n = {params.n} is too large to enumerate (max 12)")
    if params.d_x == 0:
        return 0.0
    h = float(_conditional_entropy_kernel(params.n, params.p, params.d_x))
    if given_length:
        h -= _binomial_entropy(params.n, params.d_x)
    return max(h, 0.0) / params.n


# --------------------------------------------------------------------------
# plug-in entropy of the description
# --------------------------------------------------------------------------

def _empirical_entropy(hist: Counter) -> float:
    total = sum(hist.values())
    return -sum(c / total * math.log2(c / total) for c in hist.values())


def estimate_description_entropy(params: SourceParams, trials: int) -> float:
    """Plug-in estimate of H(V)/n with one empirical distribution per extent.

    Counts of every trial are pooled per extent; the estimate is the mean
    number of runs of each extent times that extent's empirical entropy.
    """
    if not params.pure_deletion:
        raise ValueError("description entropy is defined for the pure-deletion source")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    hists: dict[int, Counter] = defaultdict(Counter)
    total_y = 0
    for seed in trial_seeds(params.seed, trials):
        inst = generate(params.with_seed(seed))
        rd = decompose_runs(inst.y)
        v = ds.describe_deletions(greedy_align(inst.x, inst.y), inst.y, rd).per_run(rd)
        pairs = np.unique(np.stack([rd.extents, v]), axis=1, return_counts=True)
        for (l, k), c in zip(pairs[0].T.tolist(), pairs[1].tolist()):
            hists[l][k] += c
        total_y += len(inst.y)
    bits = sum(sum(h.values()) * _empirical_entropy(h) for h in hists.values())
    return bits / total_y


# --------------------------------------------------------------------------
# benchmark harness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CodecRate:
    codec: str
    mean_bits: float
    std_err: float
    rate: float        # E[L_M] / E[len Y]
    mean_ratio: float  # mean of L_M / len Y
    rate_x: float      # E[L_M] / E[len X]


@dataclass(frozen=True)
class RateReport:
    params: SourceParams
    trials: int
    codecs: dict[str, CodecRate] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("a report needs at least one trial")

    @property
    def mean_rate(self) -> float:
        return self.codecs["msac"].rate

    @property
    def std_err(self) -> float:
        return self.codecs["msac"].std_err / self.params.n


def _trial_bits(params: SourceParams, codecs: tuple[str, ...]) -> dict[str, int]:
    inst = generate(params)
    x, y = inst.x, inst.y
    out = {"len_x": len(x), "len_y": len(y)}
    for name in codecs:
        if name == "no_si":
            out[name] = baseline_no_si(x)
        elif name == "dhat_direct":
            out[name] = baseline_dhat_direct(x, y)
        elif name == "w_runs":
            out[name] = baseline_w_runs(x, y)
        elif name == "msac":
            out[name] = encode_pure(x, y).payload_bits
        else:
            raise ValueError(f"unknown codec {name!r}")
    return out


def _run_trials(params: SourceParams, trials: int, codecs, workers: int) -> list[dict]:
    jobs = [params.with_seed(s) for s in trial_seeds(params.seed, trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_trial_bits, jobs, [codecs] * len(jobs)))
    return [_trial_bits(j, codecs) for j in jobs]


def evaluate(params: SourceParams, trials: int, codecs=CODECS, workers: int = 1) -> RateReport:
    """Mean payload of each codec over ``trials`` seeds derived from ``params.seed``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    results = _run_trials(params, trials, tuple(codecs), workers)
    len_y = np.array([r["len_y"] for r in results], dtype=float)
    len_x = np.array([r["len_x"] for r in results], dtype=float)
    rates = {}
    for name in codecs:
        bits = np.array([r[name] for r in results], dtype=float)
        se = bits.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0
        ratio = np.divide(bits, len_y, out=np.zeros_like(bits), where=len_y > 0)
        rates[name] = CodecRate(
            codec=name,
            mean_bits=float(bits.mean()),
            std_err=float(se),
            rate=float(bits.mean() / max(len_y.mean(), 1.0)),
            mean_ratio=float(ratio.mean()),
            rate_x=float(bits.mean() / max(len_x.mean(), 1.0)),
        )
    return RateReport(params, trials, rates)


def run_table1(trials: int, n: int = 10**6, d: float = 0.01, seed: int = 0,
               workers: int = 1) -> list[RateReport]:
    """One report per row (p = 0.5 and p = 0.1), all four codecs each."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return [evaluate(SourceParams(n, p=p, d_x=d, seed=seed), trials, CODECS, workers)
            for p in (0.5, 0.1)]


def run_sweep(d_values, trials: int, n: int = 10**6, p: float = 0.5, seed: int = 0,
              workers: int = 1) -> list[RateReport]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    return [evaluate(SourceParams(n, p=p, d_x=d, seed=seed), trials, ("msac",), workers)
            for d in d_values]


def fit_c(reports: list[RateReport]) -> float:
    """Least-squares slope c in h2(d) - rate = c * d over a sweep."""
    d = np.array([r.params.d_x for r in reports])
    gap = np.array([h2(r.params.d_x) - r.mean_rate for r in reports])
    return float(d @ gap / (d @ d))


CSV_FIELDS = ("codec", "p", "d", "n", "mean_rate", "std_err", "trials", "mean_bits", "rate_per_x_bit")


def reports_to_csv(reports: list[RateReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        for c in r.codecs.values():
            w.writerow([c.codec, r.params.p, r.params.d_x, r.params.n, f"{c.rate:.6f}",
                        f"{c.std_err / r.params.n:.6f}", r.trials, f"{c.mean_bits:.1f}",
                        f"{c.rate_x:.6f}"])
    return buf.getvalue()


def format_table(reports: list[RateReport]) -> str:
    """Plain-text table, one row per report, mean payload in kilobits."""
    if not reports:
        return ""
    codecs = list(reports[0].codecs)
    head = ["p", "d", "n"] + [CODEC_TITLES.get(c, c) for c in codecs]
    rows = [head]
    for r in reports:
        rows.append([f"{r.params.p:g}", f"{r.params.d_x:g}", f"{r.params.n}"]
                    + [f"{r.codecs[c].mean_bits / 1000:.1f}kb" for c in codecs])
    widths = [max(len(row[k]) for row in rows) for k in range(len(head))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
