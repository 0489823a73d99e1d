import itertools

import numpy as np
import pytest

from tplab.bitstring import BitString
from tplab.debruijn import DeBruijnSeq, PilotCorrupted, generate, locate_unique, verify


def cyclic_windows(s: str, k: int) -> list[str]:
    return [(s + s)[i:i + k] for i in range(len(s))]


@pytest.mark.parametrize("k,expected", [(1, "01"), (2, "0011"), (3, "00010111")])
def test_generate_small(k, expected):
    seq = str(generate(k).seq)
    assert seq == expected
    # independent check: every k-string appears exactly once
    windows = cyclic_windows(seq, k)
    assert sorted(windows) == sorted("".join(w) for w in itertools.product("01", repeat=k))


def test_generate_is_lexicographically_least():
    # brute force over all de Bruijn sequences of order 3 starting anywhere
    k = 3
    candidates = []
    for v in range(1 << (1 << k)):
        s = format(v, f"0{1 << k}b")
        if len(set(cyclic_windows(s, k))) == 1 << k:
            candidates.append(s)
    assert str(generate(k).seq) == min(candidates)


@pytest.mark.parametrize("s,k,expected", [("0011", 2, True), ("0101", 2, False), ("01", 1, True),
                                          ("001", 2, False), ("0110", 2, True)])
def test_verify_examples(s, k, expected):
    assert verify(BitString(s), k) is expected


def test_generate_range():
    for k in (0, 25):
        with pytest.raises(ValueError):
            generate(k)


@pytest.mark.parametrize("k,sample,expected", [(2, "01", 1), (3, "0111", 4), (2, "1111", None),
                                               (3, "10", "error")])
def test_locate_examples(k, sample, expected):
    pilot = generate(k)
    if expected == "error":
        with pytest.raises(ValueError):
            locate_unique(pilot, BitString(sample))
    else:
        assert locate_unique(pilot, BitString(sample)) == expected


def test_locate_never_wraps():
    pilot = generate(3)  # 00010111
    # "1100" only exists across the seam
    assert locate_unique(pilot, BitString("1100")) is None


def test_locate_agrees_with_scan():
    pilot = generate(6)
    s = str(pilot.seq)
    rng = np.random.default_rng(0)
    for _ in range(300):
        ell = int(rng.integers(6, 20))
        sample = "".join(rng.choice(["0", "1"], size=ell))
        hits = [i for i in range(len(s) - ell + 1) if s[i:i + ell] == sample]
        assert locate_unique(pilot, BitString(sample)) == (hits[0] if hits else None)


def test_corrupted_pilot_detected():
    bad = DeBruijnSeq(2, BitString("0101"))
    with pytest.raises(PilotCorrupted):
        locate_unique(bad, BitString("01"))
