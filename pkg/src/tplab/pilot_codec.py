"""Pilot-interleaved code for the torn-paper channel.

A codeword interleaves a de Bruijn pilot with m-1 message blocks: position
``m*t`` carries pilot symbol ``t`` and position ``m*t + j`` carries symbol
``t`` of the block chosen for slot ``j``. Message blocks come from a seeded
catalog filtered so that no block shares a length-``k_f`` window with the
pilot.

Decoding strides every long fragment by ``m``. Exactly one residue falls on
the pilot, and that residue pins down the fragment's position. Any other
residue is a substring of one message block, and the filter keeps those from
matching the pilot at this length.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bitstring import BitString, stride_subsequence
from .channel import FragmentSet
from .debruijn import DeBruijnSeq, generate, locate_unique, window_values

__all__ = [
    "CodeSpec",
    "CodeConstructionError",
    "Alignment",
    "AlignFailure",
    "BlockOutcome",
    "DecodeReport",
    "make_code",
    "contains_forbidden",
    "encode",
    "align_fragment",
    "decode",
    "recover_block",
    "save_code",
    "load_code",
]

DEFAULT_DELTA = 0.1


class CodeConstructionError(ValueError):
    """Raised when the requested code cannot be built."""


@dataclass(frozen=True, eq=False)
class CodeSpec:
    n: int
    m: int
    delta: float
    k_p: int
    k_f: int
    pilot: DeBruijnSeq
    catalog: np.ndarray  # (M, block_len) uint8, read-only
    seed: int
    rejections: int = 0

    @property
    def beta(self) -> float:
        return 1.0 / self.m

    @property
    def block_len(self) -> int:
        return self.n // self.m

    @property
    def M(self) -> int:
        return int(self.catalog.shape[0])

    @property
    def N_min(self) -> int:
        return self.m * self.k_f

    @property
    def rate(self) -> float:
        """(m-1) log2(M) / n bits per channel symbol."""
        return (self.m - 1) * math.log2(self.M) / self.n

    def block(self, i: int) -> BitString:
        return BitString._wrap(self.catalog[i])


class AlignFailure(enum.Enum):
    TOO_SHORT = "too_short"
    UNALIGNABLE = "unalignable"
    AMBIGUOUS = "ambiguous"  # an unalignable fragment with several candidate phases


@dataclass(frozen=True)
class Alignment:
    fragment: int
    start: int
    residue: int
    pilot_hits: int


@dataclass(frozen=True)
class BlockOutcome:
    status: str  # "recovered" | "erased" | "inconsistent"
    index: int | None = None


@dataclass
class DecodeReport:
    n: int
    m: int
    symbols: np.ndarray  # int8, -1 marks an erasure
    coverage_recovered: float
    blocks: list[BlockOutcome]
    alignments: list[Alignment] = field(default_factory=list)
    too_short: int = 0
    unalignable: int = 0
    ambiguous: int = 0
    conflicts: int = 0
    misalignments: int = 0  # filled in by the harness, which holds the truth

    @property
    def message(self) -> tuple[int, ...] | None:
        if all(b.status == "recovered" for b in self.blocks):
            return tuple(b.index for b in self.blocks)
        return None

    @property
    def aligned_length(self) -> int:
        return int((self.symbols >= 0).sum())

    def erasure_mask(self) -> np.ndarray:
        return self.symbols < 0

    def symbols_str(self) -> str:
        return "".join("?" if s < 0 else str(int(s)) for s in self.symbols)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "symbols": self.symbols_str(),
            "coverage_recovered": self.coverage_recovered,
            "message": None if self.message is None else list(self.message),
            "blocks": [{"slot": j + 1, "status": b.status, "index": b.index}
                       for j, b in enumerate(self.blocks)],
            "alignments": [{"fragment": a.fragment, "start": a.start, "residue": a.residue,
                            "pilot_hits": a.pilot_hits} for a in self.alignments],
            "too_short": self.too_short,
            "unalignable": self.unalignable,
            "ambiguous": self.ambiguous,
            "conflicts": self.conflicts,
            "misalignments": self.misalignments,
        }


def _pilot_windows(pilot: DeBruijnSeq, k_f: int):
    if k_f <= 63:
        return window_values(pilot.seq.to_array(), k_f, cyclic=False)
    buf = pilot.seq.to_bytes01()
    return {buf[i:i + k_f] for i in range(len(buf) - k_f + 1)}


def _has_forbidden(block: np.ndarray, k_f: int, windows) -> bool:
    if k_f > block.size:
        return False
    if isinstance(windows, np.ndarray):
        return bool(np.isin(window_values(block, k_f, cyclic=False), windows).any())
    buf = block.tobytes()
    return any(buf[i:i + k_f] in windows for i in range(block.size - k_f + 1))


def contains_forbidden(block: BitString, pilot: DeBruijnSeq, k_f: int) -> bool:
    """True iff some length-``k_f`` window of ``block`` is a linear window of the pilot."""
    if k_f < 1 or k_f > len(block) or k_f > len(pilot.seq):
        return False
    return _has_forbidden(block.to_array(), k_f, _pilot_windows(pilot, k_f))


def forbidden_length(n: int, delta: float) -> int:
    # round before ceil so that (2+0)*6 stays 12 despite float noise
    return math.ceil(round((2.0 + delta) * math.log2(n), 9))


def make_code(n: int, m: int, delta: float = DEFAULT_DELTA, M: int = 16, seed: int = 0) -> CodeSpec:
    """Build the pilot and a catalog of M distinct admissible message blocks."""
    if m < 2:
        raise CodeConstructionError("need m >= 2 (one pilot block plus at least one message block)")
    if delta < 0:
        raise CodeConstructionError("delta must be non-negative")
    if M < 1:
        raise CodeConstructionError("catalog size M must be at least 1")
    if n % m:
        raise CodeConstructionError(f"n={n} is not a multiple of m={m}")
    block_len = n // m
    k_p = block_len.bit_length() - 1
    if block_len != 1 << k_p or k_p < 2:
        raise CodeConstructionError(f"n/m={block_len} must be a power of two >= 4")
    k_f = forbidden_length(n, delta)
    if k_f > block_len:
        raise CodeConstructionError(f"forbidden length k_f={k_f} exceeds block length {block_len}")
    pilot = generate(k_p)
    windows = _pilot_windows(pilot, k_f)
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    seen: set[bytes] = set()
    window = 10 * M
    draws = rejections = window_accepts = 0
    while len(accepted) < M:
        block = rng.integers(0, 2, size=block_len, dtype=np.uint8)
        draws += 1
        key = block.tobytes()
        if key in seen or _has_forbidden(block, k_f, windows):
            rejections += 1
        else:
            seen.add(key)
            accepted.append(block)
            window_accepts += 1
        if draws % window == 0:
            if window_accepts < 0.01 * window:
                raise CodeConstructionError(
                    f"acceptance rate {window_accepts}/{window} below 1%; "
                    "k_f is too small for this block length")
            window_accepts = 0
    catalog = np.stack(accepted)
    catalog.flags.writeable = False
    return CodeSpec(n=n, m=m, delta=delta, k_p=k_p, k_f=k_f, pilot=pilot,
                    catalog=catalog, seed=seed, rejections=rejections)


def encode(code: CodeSpec, u) -> BitString:
    """Interleave pilot and the catalog blocks named by ``u`` (m-1 indices)."""
    u = tuple(int(i) for i in u)
    if len(u) != code.m - 1:
        raise ValueError(f"message must hold {code.m - 1} indices")
    if any(not 0 <= i < code.M for i in u):
        raise ValueError(f"message index out of range [0, {code.M})")
    out = np.empty(code.n, dtype=np.uint8)
    out[0::code.m] = code.pilot.seq.to_array()
    for j, i in enumerate(u, start=1):
        out[j::code.m] = code.catalog[i]
    return BitString._wrap(out)


def align_fragment(code: CodeSpec, f: BitString, index: int = 0) -> Alignment | AlignFailure:
    """Place a fragment on the codeword skeleton via its pilot residue."""
    length = len(f)
    if length < code.N_min:
        return AlignFailure.TOO_SHORT
    m = code.m
    found = []
    for r in range(m):
        q = stride_subsequence(f, r, m)
        if len(q) < code.k_f:
            continue
        t = locate_unique(code.pilot, q)
        if t is None:
            continue
        s = m * t - r
        if 0 <= s <= code.n - length:
            found.append(Alignment(index, s, r, len(q)))
    if len(found) == 1:
        return found[0]
    return AlignFailure.AMBIGUOUS if found else AlignFailure.UNALIGNABLE


def recover_block(code: CodeSpec, known: np.ndarray, values: np.ndarray) -> BlockOutcome:
    """Identify a catalog block from partial symbols.

    ``known`` is a boolean mask over the block's positions, ``values`` the
    symbols (ignored where unknown).
    """
    known = np.asarray(known, dtype=bool)
    if known.any():
        cols = np.flatnonzero(known)
        agree = np.flatnonzero((code.catalog[:, cols] == np.asarray(values)[cols]).all(axis=1))
    else:
        agree = np.arange(code.M)
    if agree.size == 1:
        return BlockOutcome("recovered", int(agree[0]))
    if agree.size == 0:
        return BlockOutcome("inconsistent")
    return BlockOutcome("erased")


def decode(code: CodeSpec, fs: FragmentSet) -> DecodeReport:
    """Align every usable fragment, merge symbols, and identify message blocks."""
    n, m = code.n, code.m
    symbols = np.full(n, -1, dtype=np.int8)
    void = np.zeros(n, dtype=bool)
    report = DecodeReport(n=n, m=m, symbols=symbols, coverage_recovered=0.0, blocks=[])
    lengths = fs.lengths
    for i in range(fs.K):
        if lengths[i] < code.N_min:
            report.too_short += 1
            continue
        frag = fs.fragment(i)
        res = align_fragment(code, frag, index=i)
        if res is AlignFailure.UNALIGNABLE:
            report.unalignable += 1
            continue
        if res is AlignFailure.AMBIGUOUS:
            report.ambiguous += 1
            continue
        report.alignments.append(res)
        window = slice(res.start, res.start + len(frag))
        new = frag.to_array().astype(np.int8)
        old = symbols[window]
        clash = (old >= 0) & (old != new)
        if clash.any():
            report.conflicts += int(clash.sum())
            void[window] |= clash
        symbols[window] = np.where(old >= 0, old, new)
    symbols[void] = -1

    msg_mask = np.ones(n, dtype=bool)
    msg_mask[0::m] = False
    report.coverage_recovered = float((symbols[msg_mask] >= 0).sum()) / msg_mask.sum()
    for j in range(1, m):
        part = symbols[j::m]
        report.blocks.append(recover_block(code, part >= 0, np.maximum(part, 0).astype(np.uint8)))
    return report


def code_to_dict(code: CodeSpec) -> dict:
    return {"n": code.n, "m": code.m, "delta": code.delta, "M": code.M,
            "seed": code.seed, "pilot": str(code.pilot.seq)}


def save_code(code: CodeSpec, path) -> None:
    Path(path).write_text(json.dumps(code_to_dict(code), indent=2) + "\n")


def load_code(path_or_dict) -> CodeSpec:
    """Rebuild a code from its description; the catalog is regenerated from the seed."""
    d = path_or_dict if isinstance(path_or_dict, dict) else json.loads(Path(path_or_dict).read_text())
    code = make_code(int(d["n"]), int(d["m"]), float(d["delta"]), int(d["M"]), int(d["seed"]))
    if "pilot" in d and d["pilot"] != str(code.pilot.seq):
        raise ValueError("code file pilot does not match the regenerated pilot")
    return code
