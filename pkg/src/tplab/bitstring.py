"""Immutable packed binary sequences.

Bits are stored packed (eight per byte, little bit order) and unpacked lazily
into a read-only ``uint8`` view the first time an operation needs symbol
access. Search goes through ``bytes.find`` on the unpacked view, so exact
matching runs at C speed.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np

__all__ = ["BitString", "find_occurrences", "stride_subsequence", "interleave"]


class BitString:
    """A finite sequence of 0/1 symbols with value semantics."""

    __slots__ = ("_packed", "_len", "_unpacked")

    def __init__(self, bits: Iterable[int] | str | np.ndarray = ()) -> None:
        if isinstance(bits, str):
            arr = _parse(bits)
        else:
            arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.int64)
            if arr.ndim != 1:
                raise ValueError("BitString needs a 1-D sequence")
            if arr.size and (arr.min() < 0 or arr.max() > 1):
                raise ValueError("BitString symbols must be 0 or 1")
            arr = arr.astype(np.uint8)
        self._set(arr)

    def _set(self, arr: np.ndarray) -> None:
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        arr.flags.writeable = False
        self._len = int(arr.size)
        self._packed = np.packbits(arr, bitorder="little").tobytes()
        self._unpacked = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> BitString:
        # trusted path: arr is already a 0/1 uint8 vector
        obj = cls.__new__(cls)
        obj._set(arr)
        return obj

    @classmethod
    def from_array(cls, arr: np.ndarray) -> BitString:
        arr = np.asarray(arr)
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValueError("BitString symbols must be 0 or 1")
        return cls._wrap(arr.astype(np.uint8, copy=True).ravel())

    @classmethod
    def zeros(cls, n: int) -> BitString:
        return cls._wrap(np.zeros(n, dtype=np.uint8))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> BitString:
        """i.i.d. Bernoulli(1/2) symbols."""
        return cls._wrap(rng.integers(0, 2, size=n, dtype=np.uint8))

    def to_array(self) -> np.ndarray:
        """Read-only ``uint8`` view of the symbols."""
        if self._unpacked is None:
            arr = np.unpackbits(np.frombuffer(self._packed, dtype=np.uint8),
                                count=self._len, bitorder="little")
            arr.flags.writeable = False
            self._unpacked = arr
        return self._unpacked

    def to_bytes01(self) -> bytes:
        """One byte (0x00 or 0x01) per symbol; the search buffer."""
        return self.to_array().tobytes()

    @property
    def packed(self) -> bytes:
        return self._packed

    def __len__(self) -> int:
        return self._len

    def __iter__(self) -> Iterator[int]:
        return iter(self.to_array().tolist())

    def __getitem__(self, key):
        if isinstance(key, slice):
            return BitString._wrap(self.to_array()[key])
        return int(self.to_array()[key])

    def __add__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString._wrap(np.concatenate([self.to_array(), other.to_array()]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._len == other._len and self._packed == other._packed

    def __hash__(self) -> int:
        return hash((self._len, self._packed))

    def __str__(self) -> str:
        return (self.to_array() + ord("0")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 64:
            s = s[:30] + "..." + s[-30:]
        return f"BitString('{s}', len={self._len})"

    def __getstate__(self):
        return (self._packed, self._len)

    def __setstate__(self, state) -> None:
        self._packed, self._len = state
        self._unpacked = None


def _parse(text: str) -> np.ndarray:
    raw = np.frombuffer(text.strip().encode("ascii"), dtype=np.uint8)
    arr = raw - ord("0")
    if arr.size and arr.max() > 1:
        raise ValueError(f"not a 0/1 string: {text[:40]!r}")
    return arr


def find_occurrences(haystack: BitString, needle: BitString, cyclic: bool = False) -> list[int]:
    """All start positions (ascending) where ``needle`` matches ``haystack``.

    In cyclic mode windows wrap around the end of ``haystack`` and start
    positions range over ``[0, len(haystack))``.
    """
    k = len(needle)
    if k < 1:
        raise ValueError("needle must be non-empty")
    n = len(haystack)
    if n == 0:
        return []
    if cyclic:
        reps = -(-(n + k - 1) // n)
        buf = (haystack.to_bytes01() * reps)[: n + k - 1]
        limit = n
    else:
        if k > n:
            return []
        buf = haystack.to_bytes01()
        limit = n - k + 1
    pat = needle.to_bytes01()
    out = []
    i = buf.find(pat)
    while 0 <= i < limit:
        out.append(i)
        i = buf.find(pat, i + 1)
    return out


def stride_subsequence(s: BitString, start_residue: int, step: int) -> BitString:
    """Symbols at ``start_residue, start_residue + step, ...``."""
    if step < 1 or not 0 <= start_residue < step:
        raise ValueError("need step >= 1 and 0 <= start_residue < step")
    return BitString._wrap(s.to_array()[start_residue::step])


def interleave(parts: list[BitString]) -> BitString:
    """Inverse of striding: output[m*t + j] = parts[j][t].

    Lengths must be non-increasing and differ by at most one, which is
    exactly what ``stride_subsequence`` produces for residues 0..m-1.
    """
    m = len(parts)
    if m == 0:
        return BitString()
    total = sum(len(p) for p in parts)
    out = np.empty(total, dtype=np.uint8)
    for j, part in enumerate(parts):
        dst = out[j::m]
        if dst.size != len(part):
            raise ValueError("part lengths are not a valid stride decomposition")
        dst[:] = part.to_array()
    return BitString._wrap(out)
