"""Exhaustive tiling decoder from the random-coding argument.

A codeword is accepted when every retained fragment can be placed on it as
pairwise disjoint substrings (gaps allowed). This is exponential in general
and only meant for codewords of a few dozen bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bitstring import BitString, find_occurrences
from .channel import FragmentSet, coverage

__all__ = [
    "Codebook",
    "AmbiguityError",
    "NoMatchError",
    "tiles",
    "tiling_decode",
    "count_embeddings",
    "tiling_probability",
]

MAX_N = 64


class AmbiguityError(Exception):
    def __init__(self, matches: list[int]):
        super().__init__(f"{len(matches)} codewords tile the fragments")
        self.matches = matches


class NoMatchError(Exception):
    pass


@dataclass(frozen=True)
class Codebook:
    codewords: list[BitString]

    def __post_init__(self) -> None:
        if not self.codewords:
            raise ValueError("codebook must hold at least one codeword")
        n = len(self.codewords[0])
        if any(len(c) != n for c in self.codewords):
            raise ValueError("codewords must share one length")

    @property
    def n(self) -> int:
        return len(self.codewords[0])

    @property
    def rate(self) -> float:
        return math.log2(len(self.codewords)) / self.n

    @classmethod
    def random(cls, size: int, n: int, rng: np.random.Generator) -> Codebook:
        rows = rng.integers(0, 2, size=(size, n), dtype=np.uint8)
        return cls([BitString._wrap(r) for r in rows])


def tiles(codeword: BitString, fragments: list[BitString]) -> bool:
    """Can all fragments sit on ``codeword`` as pairwise disjoint substrings?"""
    if not fragments:
        return True
    n = len(codeword)
    if sum(len(f) for f in fragments) > n:
        return False
    # longest first; equal fragments end up adjacent so their placements can
    # be forced increasing, which removes permutation duplicates
    frags = sorted(fragments, key=lambda f: (-len(f), str(f)))
    cands = []
    for f in frags:
        masks = [(pos, ((1 << len(f)) - 1) << pos) for pos in find_occurrences(codeword, f)]
        if not masks:
            return False
        cands.append(masks)
    same_as_prev = [i > 0 and frags[i] == frags[i - 1] for i in range(len(frags))]

    @lru_cache(maxsize=None)
    def place(i: int, occupied: int, floor: int) -> bool:
        if i == len(frags):
            return True
        lo = floor if same_as_prev[i] else -1
        for pos, mask in cands[i]:
            if pos <= lo or occupied & mask:
                continue
            nxt = pos if i + 1 < len(frags) and same_as_prev[i + 1] else -1
            if place(i + 1, occupied | mask, nxt):
                return True
        return False

    return place(0, 0, -1)


def tiling_decode(cb: Codebook, fs: FragmentSet, gamma: float) -> int:
    """Index of the unique codeword tiled by the fragments of length >= gamma log2 n.

    Raises :class:`AmbiguityError` when several codewords qualify and
    :class:`NoMatchError` when none does.
    """
    _, kept = coverage(fs, gamma, cb.n)
    frags = kept.fragments
    matches = [i for i, c in enumerate(cb.codewords) if tiles(c, frags)]
    if not matches:
        raise NoMatchError("no codeword contains the retained fragments")
    if len(matches) > 1:
        raise AmbiguityError(matches)
    return matches[0]


def count_embeddings(x: np.ndarray, fragments: list[np.ndarray]) -> np.ndarray:
    """Number of labelled disjoint placements of ``fragments`` on each row of ``x``.

    ``x`` has shape (S, n). Dynamic programme over (prefix length, set of
    placed fragments), vectorized across rows and subsets.
    """
    x = np.atleast_2d(x)
    S, n = x.shape
    K = len(fragments)
    full = (1 << K) - 1
    # ends[j][i]: fragment j matches x[:, i - len_j : i]
    ends = []
    for f in fragments:
        ell = f.size
        hit = np.zeros((S, n + 1), dtype=bool)
        if ell <= n:
            win = np.lib.stride_tricks.sliding_window_view(x, ell, axis=1)
            hit[:, ell:] = (win == f).all(axis=2)
        ends.append(hit)
    masks = np.arange(1 << K)
    with_j = [masks[(masks >> j) & 1 == 1] for j in range(K)]
    table = np.zeros((n + 1, S, 1 << K), dtype=np.float64)
    table[0, :, 0] = 1.0
    for i in range(1, n + 1):
        row = table[i - 1].copy()
        for j, f in enumerate(fragments):
            ell = f.size
            if ell > i:
                continue
            hit = ends[j][:, i]
            if not hit.any():
                continue
            mj = with_j[j]
            row[:, mj] += hit[:, None] * table[i - ell][:, mj ^ (1 << j)]
        table[i] = row
    return table[n, :, full]


def tiling_probability(n: int, fragments: list[BitString], samples: int,
                       rng: np.random.Generator) -> float:
    """Estimate Pr(a uniform random length-n string is tiled by ``fragments``).

    Karp-Luby style: the tiled strings are the union over labelled disjoint
    placements P of the sets S_P fixing the placed bits, all of size
    2^(n - L). Draw P uniformly, fill the free bits at random, count the
    placements c(x) the result admits. Then q = #P 2^-L E[1/c(x)].
    """
    K = len(fragments)
    if K == 0:
        return 1.0
    lens = [len(f) for f in fragments]
    L = sum(lens)
    if L > n:
        return 0.0
    slack = n - L
    # #P = K! * C(slack + K, K) = (slack + K)! / slack!
    log_count = math.lgamma(slack + K + 1) - math.lgamma(slack + 1)
    arrs = [f.to_array() for f in fragments]
    x = rng.integers(0, 2, size=(samples, n), dtype=np.uint8)
    for s in range(samples):
        order = rng.permutation(K)
        bars = np.sort(rng.choice(slack + K, size=K, replace=False))
        offset = 0
        for rank, j in enumerate(order):
            start = int(bars[rank]) - rank + offset
            x[s, start:start + lens[j]] = arrs[j]
            offset += lens[j]
    c = count_embeddings(x, arrs)
    est = math.exp(log_count - L * math.log(2.0)) * float(np.mean(1.0 / c))
    return min(1.0, est)
