"""Seeded Monte Carlo experiments comparing simulations with the closed forms.

Every trial draws from its own generator seeded by ``SeedSequence([seed,
trial])``, and results are merged in trial order. Output therefore does not
depend on how many worker processes ran the trials.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds
from .bitstring import BitString
from .channel import TearConfig, coverage, coverage_threshold, shuffle, tear, tear_lengths, truth_intervals
from .oracle_decoder import MAX_N, AmbiguityError, Codebook, NoMatchError, tiles, tiling_decode, tiling_probability
from .pilot_codec import CodeSpec, decode, encode, load_code

__all__ = [
    "RateEstimate",
    "trial_rng",
    "run_trials",
    "summarize",
    "verify_lemmas",
    "codec_experiment",
    "oracle_experiment",
    "audit",
    "sweep",
    "to_csv",
    "to_json",
    "table_to_csv",
    "MAX_CODEBOOK",
]

MAX_CODEBOOK = 4096
LEMMA_BETAS = (0.5, 1.0, 2.0)
LEMMA_GAMMAS = (0.5, 1.0, 2.0)


@dataclass
class RateEstimate:
    """One tracked statistic at one parameter point.

    ``tolerance`` is absolute; ``passed`` is None when there is no target.
    """

    experiment: str
    statistic: str
    params: dict
    trials: int
    mean: float
    stderr: float
    target: float | None = None
    tolerance: float | None = None
    exact: float | None = None  # finite-n value where one is known

    @property
    def passed(self) -> bool | None:
        if self.target is None or self.tolerance is None:
            return None
        return abs(self.mean - self.target) <= self.tolerance

    def line(self) -> str:
        mark = {True: "PASS", False: "FAIL", None: "----"}[self.passed]
        tgt = "" if self.target is None else f" target={self.target:.6f} tol={self.tolerance:.4g}"
        return f"[{mark}] {self.experiment}/{self.statistic}: {self.mean:.6f} (se {self.stderr:.2e}){tgt}"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def _run_chunk(args):
    fn, payload, seed, indices = args
    return [fn(payload, i, trial_rng(seed, i)) for i in indices]


def run_trials(fn, payload, trials: int, seed: int, workers: int = 1) -> list:
    """``fn(payload, trial_index, rng)`` for every trial, in trial order."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if workers <= 1:
        return _run_chunk((fn, payload, seed, range(trials)))
    chunks = [list(range(trials))[w::workers] for w in range(workers)]
    out = [None] * trials
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for idx, res in zip(chunks, pool.map(_run_chunk, [(fn, payload, seed, c) for c in chunks])):
            for i, r in zip(idx, res):
                out[i] = r
    return out


def summarize(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


# -- channel lemmas -----------------------------------------------------------

def _lemma_trial(payload, i, rng):
    n, p = payload
    lengths = tear_lengths(n, p, rng)
    lengths = lengths[rng.permutation(lengths.size)]
    K = lengths.size
    row = {"K": float(K)}
    for b in LEMMA_BETAS:
        row[f"tail_{b}"] = float(np.mean(lengths >= coverage_threshold(b, n)))
    for g in LEMMA_GAMMAS:
        kept = lengths[lengths >= coverage_threshold(g, n)]
        row[f"count_{g}"] = kept.size / (n * p)
        row[f"cov_{g}"] = float(kept.sum()) / n
    return row


def _geom_tail(p: float, t: float) -> float:
    return (1.0 - p) ** max(math.ceil(t) - 1, 0)


def verify_lemmas(n: int, alpha: float, trials: int, seed: int = 0, workers: int = 1,
                  tail_tol: float = 0.01, count_tol: float = 0.02, cov_tol: float = 0.02,
                  k_se: float = 3.0) -> list[RateEstimate]:
    """Empirical fragment statistics vs their limits at p = alpha / log2 n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    p = alpha / math.log2(n)
    if not 0 < p <= 1:
        raise ValueError(f"alpha={alpha} at n={n} gives p={p:.4g}, outside (0, 1]")
    rows = run_trials(_lemma_trial, (n, p), trials, seed, workers)
    params = {"n": n, "alpha": alpha, "p": p, "seed": seed}
    out = []

    def add(stat, target, tol, exact=None):
        mean, se = summarize([r[stat] for r in rows])
        out.append(RateEstimate("lemmas", stat, dict(params), trials, mean, se, target,
                                k_se * se if tol is None else tol, exact))

    add("K", 1 + (n - 1) * p, None, 1 + (n - 1) * p)
    for b in LEMMA_BETAS:
        add(f"tail_{b}", bounds.exp_tail(alpha, b), tail_tol, _geom_tail(p, coverage_threshold(b, n)))
    for g in LEMMA_GAMMAS:
        add(f"count_{g}", bounds.exp_tail(alpha, g), count_tol)
    for g in LEMMA_GAMMAS:
        t = coverage_threshold(g, n)
        add(f"cov_{g}", bounds.coverage_expect(alpha, g), cov_tol, bounds.finite_coverage(n, p, t))
    return out


# -- pilot codec ----------------------------------------------------------------

def audit(report, fs, codeword: BitString) -> dict:
    """Check a decode report against the channel's ground truth."""
    truth = truth_intervals(fs)
    mis = 0
    if truth is not None:
        for a in report.alignments:
            if a.start != truth[a.fragment][0]:
                mis += 1
    report.misalignments = mis
    known = report.symbols >= 0
    wrong = int((report.symbols[known] != codeword.to_array()[known]).sum())
    return {"misalignments": mis, "wrong_symbols": wrong}


def _codec_trial(payload, i, rng):
    code_desc, p = payload
    code = _code_cache(code_desc)
    u = tuple(int(v) for v in rng.integers(0, code.M, size=code.m - 1))
    x = encode(code, u)
    fs = shuffle(tear(x, TearConfig(code.n, p), rng), rng)
    rep = decode(code, fs)
    checks = audit(rep, fs, x)
    good = sum(1 for j, b in enumerate(rep.blocks) if b.status == "recovered" and b.index == u[j])
    return {
        "aligned_fraction": rep.aligned_length / code.n,
        "coverage_recovered": rep.coverage_recovered,
        "block_recovery": good / (code.m - 1),
        "aligned_fragments": float(len(rep.alignments)),
        "misalignments": float(checks["misalignments"]),
        "wrong_symbols": float(checks["wrong_symbols"]),
        "conflicts": float(rep.conflicts),
        "inconsistent": float(sum(b.status == "inconsistent" for b in rep.blocks)),
        "wrong_blocks": float(sum(1 for j, b in enumerate(rep.blocks)
                                  if b.status == "recovered" and b.index != u[j])),
    }


_CODES: dict = {}


def _code_cache(desc: dict) -> CodeSpec:
    key = tuple(sorted(desc.items()))
    if key not in _CODES:
        _CODES[key] = load_code(desc)
    return _CODES[key]


def _code_desc(code: CodeSpec) -> dict:
    return {"n": code.n, "m": code.m, "delta": code.delta, "M": code.M, "seed": code.seed}


def codec_experiment(code: CodeSpec, p: float, trials: int, seed: int = 0, workers: int = 1,
                     coverage_tol: float = 0.05) -> list[RateEstimate]:
    """Encode random messages, pass them through the channel, and decode them."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    desc = _code_desc(code)
    _CODES.setdefault(tuple(sorted(desc.items())), code)
    rows = run_trials(_codec_trial, (desc, p), trials, seed, workers)
    params = {"n": code.n, "m": code.m, "M": code.M, "p": p,
              "alpha": p * math.log2(code.n), "seed": seed}
    fc = bounds.finite_coverage(code.n, p, code.N_min)
    out = []

    def add(stat, target=None, tol=None, exact=None):
        mean, se = summarize([r[stat] for r in rows])
        out.append(RateEstimate("codec", stat, dict(params), trials, mean, se, target, tol, exact))

    add("aligned_fraction", fc, coverage_tol, fc)
    add("coverage_recovered")
    add("block_recovery")
    add("aligned_fragments")
    for stat in ("misalignments", "wrong_symbols", "conflicts", "inconsistent", "wrong_blocks"):
        add(stat, 0.0, 0.0)
    block_rate = out[2].mean
    out.append(RateEstimate("codec", "empirical_rate", dict(params), trials,
                            code.rate * block_rate, code.rate * out[2].stderr))
    return out


# -- tiling oracle ----------------------------------------------------------------

def _oracle_trial(payload, i, rng):
    n, p, gamma, size, samples = payload
    chan, book = (np.random.default_rng(s) for s in rng.bit_generator.seed_seq.spawn(2))
    x = BitString.random(n, chan)
    fs = shuffle(tear(x, TearConfig(n, p), chan), chan)
    _, kept = coverage(fs, gamma, n)
    frags = kept.fragments
    self_ok = tiles(x, frags)
    if size <= MAX_CODEBOOK:
        # codeword 0 is the transmitted one; the rest are fresh
        cb = Codebook([x] + Codebook.random(size - 1, n, book).codewords if size > 1 else [x])
        try:
            tiling_decode(cb, fs, gamma)
            amb, nomatch = 0.0, 0.0
        except AmbiguityError:
            amb, nomatch = 1.0, 0.0
        except NoMatchError:
            amb, nomatch = 0.0, 1.0
    else:
        # too many codewords to list: wrong codewords are i.i.d. uniform, so
        # each tiles independently with probability q
        q = tiling_probability(n, frags, samples, book)
        amb = 1.0 if q >= 1.0 else -math.expm1((size - 1) * math.log1p(-q))
        nomatch = 0.0 if self_ok else 1.0
    return {"ambiguity": amb, "no_match": nomatch, "self_tiling_failures": 0.0 if self_ok else 1.0,
            "retained": float(kept.K), "coverage": float(kept.lengths.sum()) / n}


def oracle_experiment(n: int, rate: float, alpha: float, gamma: float, trials: int,
                      seed: int = 0, workers: int = 1, samples: int = 64) -> list[RateEstimate]:
    """Random Bernoulli(1/2) codebooks of size round(2^(nR)) decoded by tiling.

    Up to ``MAX_CODEBOOK`` codewords are listed explicitly. Larger codebooks
    use the estimated per-codeword tiling probability instead, and the
    ambiguity statistic becomes the per-trial ambiguity probability.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}] for the tiling oracle")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    p = alpha / math.log2(n)
    if not 0 < p <= 1:
        raise ValueError(f"alpha={alpha} at n={n} gives p={p:.4g}, outside (0, 1]")
    size = max(1, int(round(2.0 ** (n * rate))))
    rows = run_trials(_oracle_trial, (n, p, gamma, size, samples), trials, seed, workers)
    params = {"n": n, "R": rate, "alpha": alpha, "p": p, "gamma": gamma, "M": size, "seed": seed}
    out = []
    for stat, target, tol in (("ambiguity", None, None), ("no_match", 0.0, 0.0),
                              ("self_tiling_failures", 0.0, 0.0), ("retained", None, None),
                              ("coverage", None, None)):
        mean, se = summarize([r[stat] for r in rows])
        out.append(RateEstimate("oracle", stat, dict(params), trials, mean, se, target, tol))
    return out


# -- sweeps -----------------------------------------------------------------------

def _sweep_mc_trial(payload, i, rng):
    n, p, gamma = payload
    lengths = tear_lengths(n, p, rng)
    kept = lengths[lengths >= coverage_threshold(gamma, n)]
    return float(kept.sum()) / n


def sweep(kind: str, grid, alpha: float = 1.0, L: int = 1, n: int | None = None,
          mc_trials: int = 0, gamma: float = 1.0, seed: int = 0, workers: int = 1) -> list[dict]:
    """One row of analytic values (and optional Monte Carlo) per grid point."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly ascending")
    rows = []
    for v in grid:
        if kind == "alpha":
            row = {"alpha": v, "capacity": bounds.capacity(v), "det_capacity": bounds.det_capacity(v)}
            if v > 0:
                row["interleave_rate"], row["beta_star"] = bounds.interleave_rate(v)
            else:
                row["interleave_rate"], row["beta_star"] = 1.0, 0.0
            row["converse"] = bounds.converse_bound(v, L)
            if mc_trials and n:
                p = v / math.log2(n)
                if not 0 < p <= 1:
                    raise ValueError(f"alpha={v} gives p={p:.4g} outside (0, 1]")
                vals = run_trials(_sweep_mc_trial, (n, p, gamma), mc_trials, seed, workers)
                row["coverage_expect"] = bounds.coverage_expect(v, gamma)
                row["coverage_mc"], row["coverage_mc_se"] = summarize(vals)
        elif kind == "beta":
            row = {"beta": v, "coverage_A": bounds.coverage_A(alpha, v),
                   "objective": bounds.interleave_objective(alpha, v)}
            if n:
                p = alpha / math.log2(n)
                row["finite_coverage"] = bounds.finite_coverage(n, p, 2.0 / v * math.log2(n))
        elif kind == "L":
            if int(v) != v or v < 1:
                raise ValueError("L grid must hold positive integers")
            row = {"L": int(v), "converse": bounds.converse_bound(alpha, int(v)),
                   "capacity": bounds.capacity(alpha)}
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
        rows.append(row)
    return rows


# -- output -----------------------------------------------------------------------

_COLUMNS = ["experiment", "statistic", "n", "p", "alpha", "m", "M", "R", "gamma", "seed",
            "trials", "mean", "stderr", "target", "exact", "tolerance", "passed"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(estimates: list[RateEstimate]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_COLUMNS)
    for e in estimates:
        rec = {**e.params, "experiment": e.experiment, "statistic": e.statistic,
               "trials": e.trials, "mean": e.mean, "stderr": e.stderr, "target": e.target,
               "exact": e.exact, "tolerance": e.tolerance, "passed": e.passed}
        w.writerow([_fmt(rec.get(c)) for c in _COLUMNS])
    return buf.getvalue()


def to_json(estimates: list[RateEstimate]) -> str:
    return json.dumps([{**asdict(e), "passed": e.passed} for e in estimates], indent=2)


def table_to_csv(rows: list[dict]) -> str:
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()
