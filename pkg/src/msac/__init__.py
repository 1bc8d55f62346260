"""Compression of a bit sequence given side information that differs from it
by deletions, insertions and substitutions."""

from .align import Alignment, NotSubsequence, edit_distance, fill_gaps, greedy_align, nw_align
from .container import CorruptionError, Message, decode, encode, encode_auto, encode_general, encode_pure
from .seqcore import BitSeq, DeletionPattern, FormatError, RunDecomposition, decompose_runs, read_bits, write_bits
from .simulate import SourceParams, generate

__version__ = "0.1.0"

__all__ = [
    "Alignment", "BitSeq", "CorruptionError", "DeletionPattern", "FormatError", "Message",
    "NotSubsequence", "RunDecomposition", "SourceParams", "decode", "decompose_runs", "edit_distance",
    "encode", "encode_auto", "encode_general", "encode_pure", "fill_gaps", "generate", "greedy_align",
    "nw_align", "read_bits", "write_bits",
]
