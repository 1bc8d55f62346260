import numpy as np
from hypothesis import strategies as st

from msac.seqcore import BitSeq


def bitseqs(min_size=0, max_size=64):
    return st.lists(st.integers(0, 1), min_size=min_size, max_size=max_size).map(BitSeq)


def runny_bitseqs(max_runs=12, max_extent=6):
    """Sequences built from explicit runs, so long runs show up often."""
    runs = st.lists(st.integers(1, max_extent), max_size=max_runs)
    return st.tuples(st.integers(0, 1), runs).map(
        lambda t: BitSeq(np.repeat((np.arange(len(t[1])) + t[0]) % 2, t[1]).astype(np.uint8))
    )
