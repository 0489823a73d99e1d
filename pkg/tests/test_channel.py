import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tplab.bitstring import BitString
from tplab.channel import (FragmentSet, TearConfig, coverage, read_dump, read_truth, shuffle, tear,
                           tear_lengths, truth_intervals, unconstrained_tear, write_dump)


def check_partition(fs, x):
    truth = truth_intervals(fs)
    pos = 0
    for (a, ell), frag in zip(truth, fs.fragments):
        assert a == pos and ell == len(frag) >= 1
        assert frag == x[a:a + ell]
        pos += ell
    assert pos == len(x)


def test_every_boundary_cut():
    x = BitString("0110")
    fs = tear(x, TearConfig(4, 1.0, seed=3))
    assert [str(f) for f in fs.fragments] == ["0", "1", "1", "0"]


def test_no_cut_when_p_tiny():
    x = BitString("0110")
    fs = tear(x, TearConfig(4, 1e-12, seed=3))
    assert fs.K == 1 and fs.fragment(0) == x


def test_config_validation():
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            TearConfig(8, bad)
    with pytest.raises(ValueError):
        TearConfig(0, 0.5)
    with pytest.raises(ValueError):
        tear(BitString("01"), TearConfig(3, 0.5))
    assert TearConfig.from_alpha(1 << 10, 1.0).p == pytest.approx(0.1)
    assert TearConfig(1 << 10, 0.1).alpha_hat == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 300), p=st.floats(0.01, 1.0), seed=st.integers(0, 2**32), per=st.booleans())
def test_partition_invariant(n, p, seed, per):
    x = BitString.random(n, np.random.default_rng(seed))
    fs = tear(x, TearConfig(n, p, seed), per_boundary=per)
    check_partition(fs, x)
    assert int(fs.lengths.sum()) == n


def test_mean_fragment_length():
    n, p = 1 << 20, 1 / 20
    rng = np.random.default_rng(5)
    total = frags = 0
    for _ in range(1000):
        lengths = tear_lengths(n, p, rng)
        total += lengths.sum()
        frags += lengths.size
    assert 19.0 <= total / frags <= 21.0


def test_fragment_count_mean():
    n, p, trials = 1000, 0.05, 2000
    rng = np.random.default_rng(8)
    ks = np.array([tear_lengths(n, p, rng).size for _ in range(trials)])
    se = ks.std(ddof=1) / math.sqrt(trials)
    assert abs(ks.mean() - (1 + (n - 1) * p)) < 3 * se


def test_inverse_cdf_matches_per_boundary_mode():
    n, p, trials = 300, 0.08, 3000
    rng = np.random.default_rng(9)
    a = [tear_lengths(n, p, rng) for _ in range(trials)]
    b = [tear_lengths(n, p, rng, per_boundary=True) for _ in range(trials)]
    for stat in (lambda L: L.size, lambda L: np.mean(L >= 10), lambda L: L.max()):
        va = np.array([stat(L) for L in a], dtype=float)
        vb = np.array([stat(L) for L in b], dtype=float)
        se = math.sqrt(va.var(ddof=1) / trials + vb.var(ddof=1) / trials)
        assert abs(va.mean() - vb.mean()) < 4 * se


def test_tail_matches_exact_geometric_law():
    # finite-n law of the sampler: Pr(N >= t) = (1-p)^(ceil(t) - 1)
    n, p = 1 << 20, 0.05
    rng = np.random.default_rng(10)
    lengths = np.concatenate([tear_lengths(n, p, rng)[:-1] for _ in range(20)])
    for t in (10, 20, 40):
        exact = (1 - p) ** (t - 1)
        se = math.sqrt(exact * (1 - exact) / lengths.size)
        assert abs(np.mean(lengths >= t) - exact) < 5 * se


def test_shuffle_identity_for_one_fragment():
    x = BitString("0110")
    fs = tear(x, TearConfig(4, 1e-12))
    assert shuffle(fs, 1).fragments == fs.fragments


def test_shuffle_uniform_on_two_fragments():
    fs = FragmentSet.from_fragments(2, [BitString("0"), BitString("1")])
    first_zero = sum(str(shuffle(fs, s).fragment(0)) == "0" for s in range(10_000))
    assert abs(first_zero / 10_000 - 0.5) <= 0.02


def test_shuffle_keeps_multiset_and_truth():
    x = BitString.random(500, np.random.default_rng(1))
    fs = tear(x, TearConfig(500, 0.1, seed=2))
    sh = shuffle(fs, 3)
    assert sorted(map(str, sh.fragments)) == sorted(map(str, fs.fragments))
    for (a, ell), f in zip(truth_intervals(sh), sh.fragments):
        assert x[a:a + ell] == f
    for g in (0.0, 0.5, 1.0, 2.0):
        assert coverage(sh, g)[0] == coverage(fs, g)[0]
        assert coverage(sh, g)[1].K == coverage(fs, g)[1].K


def test_unconstrained_replays_seeded_draws():
    n, p, seed = 8, 0.5, 4
    x = BitString("10110011")
    fs = unconstrained_tear(x, TearConfig(n, p, seed))
    # replay the inverse-CDF draws
    u = 1.0 - np.random.default_rng(seed).random(4)
    expected = np.maximum(np.ceil(np.log(u) / math.log(0.5)), 1).astype(int)
    assert fs.K == 4
    assert fs.lengths.tolist() == expected.tolist()
    padded = str(x) + "0" * max(0, int(expected.sum()) - n)
    pos = 0
    for f, ell in zip(fs.fragments, expected):
        assert str(f) == padded[pos:pos + ell]
        pos += ell


def test_unconstrained_all_ones_and_count():
    x = BitString("0110")
    fs = unconstrained_tear(x, TearConfig(4, 1.0))
    assert [str(f) for f in fs.fragments] == ["0", "1", "1", "0"]
    for seed in range(20):
        fs = unconstrained_tear(BitString.zeros(100), TearConfig(100, 0.137, seed))
        assert fs.K == round(100 * 0.137)


def test_coverage_examples():
    frags = [BitString("1" * 8), BitString("0" * 5), BitString("101")]
    fs = FragmentSet.from_fragments(16, frags)
    c, kept = coverage(fs, 1.0)
    assert c == 13 / 16 and kept.K == 2
    assert coverage(fs, 0.0)[0] == 1.0
    with pytest.raises(ValueError):
        coverage(fs, -0.5)


def test_coverage_zero_gamma_constrained():
    x = BitString.random(1000, np.random.default_rng(0))
    assert coverage(tear(x, TearConfig(1000, 0.3, 1)), 0.0)[0] == 1.0


def test_coverage_monte_carlo():
    n = 1 << 20
    p = 1.0 / math.log2(n)
    x = BitString.zeros(n)
    rng = np.random.default_rng(12)
    vals = [coverage(shuffle(tear(x, TearConfig(n, p), rng), rng), 1.0)[0] for _ in range(200)]
    assert abs(np.mean(vals) - 2 * math.exp(-1)) <= 0.02


def test_dump_round_trip(tmp_path):
    x = BitString.random(64, np.random.default_rng(2))
    fs = shuffle(tear(x, TearConfig(64, 0.2, 7)), 8)
    write_dump(tmp_path / "d.txt", fs, 0.2, 7, truth_path=tmp_path / "t.txt")
    header = (tmp_path / "d.txt").read_text().splitlines()[0]
    assert header == "n=64 p=0.2 seed=7"
    back, meta = read_dump(tmp_path / "d.txt")
    assert meta == {"n": 64, "p": 0.2, "seed": 7}
    assert back.fragments == fs.fragments
    assert read_truth(tmp_path / "t.txt") == truth_intervals(fs)
    assert truth_intervals(back) is None


def test_bad_dump(tmp_path):
    (tmp_path / "d.txt").write_text("hello\n0101\n")
    with pytest.raises(ValueError):
        read_dump(tmp_path / "d.txt")
