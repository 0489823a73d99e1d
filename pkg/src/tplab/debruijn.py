"""Binary de Bruijn sequences for the pilot.

``generate`` concatenates, in lexicographic order, the binary Lyndon words
whose length divides the order (Fredricksen-Kessler-Maiorana), giving the
lexicographically least de Bruijn sequence. ``verify`` checks the window
property directly and shares no code with the generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitstring import BitString

__all__ = ["DeBruijnSeq", "PilotCorrupted", "generate", "verify", "locate_unique", "window_values"]

MAX_ORDER = 24


class PilotCorrupted(RuntimeError):
    """A sample of at least ``order`` symbols matched the pilot twice."""


@dataclass(frozen=True)
class DeBruijnSeq:
    order: int
    seq: BitString
    _index: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.seq) != 1 << self.order:
            raise ValueError("de Bruijn sequence of order k must have length 2**k")

    def window_index(self) -> np.ndarray:
        """Map from linear k-window value to its start (-1 if absent)."""
        if self._index is None:
            k = self.order
            vals = window_values(self.seq.to_array(), k, cyclic=False).astype(np.int64)
            index = np.full(1 << k, -1, dtype=np.int64)
            index[vals] = np.arange(vals.size)
            if np.count_nonzero(index >= 0) != vals.size:
                raise PilotCorrupted("pilot has a repeated linear window")
            index.flags.writeable = False
            object.__setattr__(self, "_index", index)
        return self._index


def _lyndon_concat(k: int) -> np.ndarray:
    out = np.empty(1 << k, dtype=np.uint8)
    pos = 0
    w = [-1]
    while w:
        w[-1] += 1
        size = len(w)
        if k % size == 0:
            out[pos:pos + size] = w
            pos += size
        while len(w) < k:
            w.append(w[len(w) - size])
        while w and w[-1] == 1:
            w.pop()
    assert pos == out.size
    return out


def generate(k: int) -> DeBruijnSeq:
    """Lexicographically least binary de Bruijn sequence of order ``k``."""
    if not 1 <= k <= MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}], got {k}")
    return DeBruijnSeq(k, BitString._wrap(_lyndon_concat(k)))


def window_values(bits: np.ndarray, k: int, cyclic: bool) -> np.ndarray:
    """Integer value (MSB first) of every length-``k`` window, ``k <= 63``."""
    if k > 63:
        raise ValueError("window_values supports k <= 63")
    bits = np.asarray(bits, dtype=np.uint64)
    if cyclic:
        bits = np.concatenate([bits, bits[: k - 1]]) if k > 1 else bits
        count = bits.size - k + 1
    else:
        count = bits.size - k + 1
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
    vals = np.zeros(count, dtype=np.uint64)
    for j in range(k):
        vals = (vals << np.uint64(1)) | bits[j:j + count]
    return vals


def verify(s: BitString, k: int) -> bool:
    """True iff ``s`` has length 2**k and its 2**k cyclic k-windows are distinct."""
    if k < 1 or len(s) != 1 << k:
        return False
    vals = window_values(s.to_array(), k, cyclic=True)
    return np.unique(vals).size == vals.size


def locate_unique(pilot: DeBruijnSeq, sample: BitString) -> int | None:
    """Start of ``sample`` among the linear windows of the pilot, or None.

    Requires ``len(sample) >= pilot.order``. A pilot with a repeated linear
    window (so that two matches would be possible) raises
    :class:`PilotCorrupted`.
    """
    if len(sample) < pilot.order:
        raise ValueError("sample shorter than the pilot order has no unique location")
    k = pilot.order
    bits = sample.to_array()
    head = 0
    for b in bits[:k].tolist():
        head = (head << 1) | b
    # linear k-windows of a de Bruijn sequence are distinct, so the head
    # window fixes the only possible start
    t = int(pilot.window_index()[head])
    if t < 0 or t + bits.size > len(pilot.seq):
        return None
    if not np.array_equal(pilot.seq.to_array()[t:t + bits.size], bits):
        return None
    return t
