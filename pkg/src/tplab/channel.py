"""Torn-paper channel simulation.

The channel cuts a length-n input at i.i.d. Bernoulli(p) boundaries, so the
fragment lengths are i.i.d. Geometric(p) with the last one truncated, and then
outputs the fragments in uniformly random order.

Fragment sets are kept as (source, starts, lengths) and a fragment's bits are
only materialized when someone asks for them. That keeps million-bit Monte
Carlo runs cheap when only the length statistics matter. The starts are the
ground truth and decoders must not read them; :func:`truth_intervals` is the
harness-side accessor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bitstring import BitString

__all__ = [
    "TearConfig",
    "FragmentSet",
    "tear",
    "tear_lengths",
    "unconstrained_tear",
    "shuffle",
    "coverage",
    "coverage_threshold",
    "truth_intervals",
    "write_dump",
    "read_dump",
    "read_truth",
    "as_rng",
]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class TearConfig:
    n: int
    p: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0 < self.p <= 1:
            raise ValueError("tearing probability must lie in (0, 1]")

    @property
    def alpha_hat(self) -> float:
        """p * log2(n), the finite-n stand-in for alpha."""
        return self.p * math.log2(self.n) if self.n > 1 else 0.0

    @classmethod
    def from_alpha(cls, n: int, alpha: float, seed: int = 0) -> TearConfig:
        p = alpha / math.log2(n)
        if not 0 < p <= 1:
            raise ValueError(f"alpha={alpha} at n={n} gives p={p}, outside (0, 1]")
        return cls(n, p, seed)


class FragmentSet:
    """Multiset of fragments with hidden origins.

    ``lengths`` is public (a decoder sees every fragment's length). The bits of
    fragment i are ``source[starts[i] : starts[i] + lengths[i]]``.
    """

    __slots__ = ("n", "lengths", "_source", "_starts", "_cache")

    def __init__(self, n: int, lengths: np.ndarray, source: BitString | None = None,
                 starts: np.ndarray | None = None, fragments: list[BitString] | None = None):
        self.n = int(n)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.lengths.flags.writeable = False
        self._source = source
        self._starts = None if starts is None else np.asarray(starts, dtype=np.int64)
        if fragments is not None:
            if len(fragments) != self.lengths.size:
                raise ValueError("fragment list and lengths disagree")
            self._cache = list(fragments)
        else:
            if source is None or starts is None:
                raise ValueError("need either explicit fragments or source + starts")
            self._cache = [None] * self.lengths.size

    @classmethod
    def from_fragments(cls, n: int, fragments: list[BitString]) -> FragmentSet:
        return cls(n, np.array([len(f) for f in fragments], dtype=np.int64), fragments=fragments)

    @property
    def K(self) -> int:
        return int(self.lengths.size)

    def __len__(self) -> int:
        return self.K

    def fragment(self, i: int) -> BitString:
        f = self._cache[i]
        if f is None:
            a = int(self._starts[i])
            f = self._source[a:a + int(self.lengths[i])]
            self._cache[i] = f
        return f

    @property
    def fragments(self) -> list[BitString]:
        return [self.fragment(i) for i in range(self.K)]

    def take(self, idx: np.ndarray) -> FragmentSet:
        """Sub-multiset (in the order of ``idx``), truth carried along."""
        idx = np.asarray(idx, dtype=np.int64)
        out = FragmentSet.__new__(FragmentSet)
        out.n = self.n
        out.lengths = self.lengths[idx]
        out.lengths.flags.writeable = False
        out._source = self._source
        out._starts = None if self._starts is None else self._starts[idx]
        out._cache = [self._cache[i] for i in idx]
        return out


def truth_intervals(fs: FragmentSet) -> list[tuple[int, int]] | None:
    """Ground-truth ``(start, length)`` per fragment; harness use only."""
    if fs._starts is None:
        return None
    return [(int(a), int(b)) for a, b in zip(fs._starts, fs.lengths)]


def _geometric(p: float, size: int, rng: np.random.Generator) -> np.ndarray:
    if p >= 1.0:
        return np.ones(size, dtype=np.int64)
    # 1 - U lies in (0, 1], so the log is finite
    u = 1.0 - rng.random(size)
    return np.maximum(np.ceil(np.log(u) / math.log1p(-p)), 1).astype(np.int64)


def tear_lengths(n: int, p: float, rng: np.random.Generator, per_boundary: bool = False) -> np.ndarray:
    """Fragment lengths of one constrained tearing of a length-n input."""
    if per_boundary:
        cuts = np.flatnonzero(rng.random(n - 1) < p) + 1
        edges = np.concatenate([[0], cuts, [n]])
        return np.diff(edges).astype(np.int64)
    chunks = []
    total = 0
    batch = max(16, int(n * p * 1.05) + 16)
    while total < n:
        draws = _geometric(p, batch, rng)
        csum = total + np.cumsum(draws)
        stop = int(np.searchsorted(csum, n, side="left"))
        if stop < draws.size:
            chunks.append(draws[: stop + 1])
            total = int(csum[stop])
            break
        chunks.append(draws)
        total = int(csum[-1])
    lengths = np.concatenate(chunks)
    lengths[-1] -= total - n
    return lengths


def tear(x: BitString, cfg: TearConfig, rng=None, per_boundary: bool = False) -> FragmentSet:
    """Tear ``x`` into ordered fragments (no shuffling yet)."""
    if len(x) != cfg.n:
        raise ValueError("input length does not match cfg.n")
    rng = as_rng(cfg.seed if rng is None else rng)
    lengths = tear_lengths(cfg.n, cfg.p, rng, per_boundary=per_boundary)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    return FragmentSet(cfg.n, lengths, source=x, starts=starts)


def unconstrained_tear(x: BitString, cfg: TearConfig, rng=None) -> FragmentSet:
    """Exactly round(n*p) Geometric(p) windows of ``x`` padded with zeros."""
    if len(x) != cfg.n:
        raise ValueError("input length does not match cfg.n")
    rng = as_rng(cfg.seed if rng is None else rng)
    count = max(1, int(round(cfg.n * cfg.p)))
    lengths = _geometric(cfg.p, count, rng)
    total = int(lengths.sum())
    source = x if total <= cfg.n else x + BitString.zeros(total - cfg.n)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    return FragmentSet(cfg.n, lengths, source=source, starts=starts)


def shuffle(fs: FragmentSet, seed=None) -> FragmentSet:
    """Uniformly random reordering; truth is permuted with the fragments."""
    rng = as_rng(seed)
    return fs.take(rng.permutation(fs.K))


def coverage_threshold(gamma: float, n: int) -> float:
    return gamma * math.log2(n) if n > 1 else 0.0


def coverage(fs: FragmentSet, gamma: float, n: int | None = None) -> tuple[float, FragmentSet]:
    """Coverage c_gamma and the retained set of fragments with length >= gamma*log2(n)."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    n = fs.n if n is None else n
    keep = np.flatnonzero(fs.lengths >= coverage_threshold(gamma, n))
    kept = fs.take(keep)
    return float(kept.lengths.sum()) / n, kept


def write_dump(path, fs: FragmentSet, p: float, seed: int, truth_path=None) -> None:
    lines = [f"n={fs.n} p={p!r} seed={seed}"]
    lines += [str(f) for f in fs.fragments]
    Path(path).write_text("\n".join(lines) + "\n")
    if truth_path is not None:
        truth = truth_intervals(fs)
        if truth is None:
            raise ValueError("fragment set carries no ground truth")
        Path(truth_path).write_text("".join(f"{a},{b}\n" for a, b in truth))


def read_dump(path) -> tuple[FragmentSet, dict]:
    """Parse a fragment dump; returns the set and its header fields."""
    text = Path(path).read_text().splitlines()
    if not text:
        raise ValueError(f"{path}: empty dump")
    header = {}
    for item in text[0].split():
        key, _, val = item.partition("=")
        header[key] = val
    try:
        n = int(header["n"])
        meta = {"n": n, "p": float(header["p"]), "seed": int(header["seed"])}
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: bad header {text[0]!r}") from exc
    frags = [BitString(line) for line in text[1:] if line.strip()]
    return FragmentSet.from_fragments(n, frags), meta


def read_truth(path) -> list[tuple[int, int]]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            a, b = line.split(",")
            out.append((int(a), int(b)))
    return out
