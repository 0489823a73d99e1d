"""Torn-paper channel toolkit: channel simulation, pilot-interleaved codec,
tiling oracle decoder, closed-form bounds and Monte Carlo checks."""

from .bitstring import BitString, find_occurrences, stride_subsequence
from .channel import FragmentSet, TearConfig, coverage, shuffle, tear, unconstrained_tear

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "find_occurrences",
    "stride_subsequence",
    "FragmentSet",
    "TearConfig",
    "coverage",
    "shuffle",
    "tear",
    "unconstrained_tear",
]
