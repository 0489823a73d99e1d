"""Closed-form rates and limits for the torn-paper channel.

All logarithms inside thresholds are base 2. Functions take the limiting
tearing parameter ``alpha = lim p_n log2 n`` unless they are explicitly
finite-n (``finite_coverage``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "capacity",
    "det_capacity",
    "converse_bound",
    "coverage_A",
    "finite_coverage",
    "interleave_objective",
    "interleave_rate",
    "exp_tail",
    "exp_weighted_tail",
    "coverage_expect",
    "achievability_objective",
    "BoundSet",
    "bound_set",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check_alpha(alpha: float) -> None:
    if alpha < 0 or math.isnan(alpha):
        raise ValueError(f"alpha must be non-negative, got {alpha}")


def capacity(alpha: float) -> float:
    """e^{-alpha}."""
    _check_alpha(alpha)
    return math.exp(-alpha)


def det_capacity(alpha: float) -> float:
    """Capacity with evenly spaced tears, (1 - alpha)^+."""
    return max(1.0 - alpha, 0.0)


def converse_bound(alpha: float, L: int) -> float:
    """Outer bound for bin resolution L: alpha e^{-alpha} / (L (1 - e^{-alpha/L})).

    Equals 1 at alpha = 0 by continuity.
    """
    _check_alpha(alpha)
    if L < 1 or int(L) != L:
        raise ValueError("L must be a positive integer")
    if alpha == 0:
        return 1.0
    return alpha * math.exp(-alpha) / (L * -math.expm1(-alpha / L))


def coverage_A(alpha: float, beta: float) -> float:
    """Asymptotic share of positions in fragments longer than (2/beta) log2 n."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    _check_alpha(alpha)
    g = 2.0 * alpha / beta
    return (g + 1.0) * math.exp(-g)


def finite_coverage(n: int, p: float, T: float) -> float:
    """1 - sum_{k=1}^{T-1} k (1-p)^{k-1} p^2.

    Expected fraction of positions lying in fragments of length >= T when
    lengths are i.i.d. Geometric(p). A non-integer T is rounded up.
    ``n`` is accepted for signature symmetry; the i.i.d. model does not use it.
    """
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    T = max(1, math.ceil(T))
    k = np.arange(1, T, dtype=np.float64)
    s = float(np.sum(k * (1.0 - p) ** (k - 1) * p * p))
    return max(0.0, 1.0 - s)


def interleave_objective(alpha: float, beta: float) -> float:
    """A(beta) (1 - beta): usable coverage times the non-pilot share."""
    return coverage_A(alpha, beta) * (1.0 - beta)


def interleave_rate(alpha: float, grid_step: float = 1e-4, tol: float = 1e-8) -> tuple[float, float]:
    """Maximize A(beta)(1 - beta) over beta in (0, 1); returns (rate, beta*).

    A uniform grid locates the best bracket, golden-section search refines it.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    f = lambda b: interleave_objective(alpha, b)  # noqa: E731
    n = int(round(1.0 / grid_step))
    betas = [i * grid_step for i in range(1, n)]
    vals = [f(b) for b in betas]
    i = max(range(len(vals)), key=vals.__getitem__)
    lo = betas[i - 1] if i > 0 else betas[0] / 2
    hi = betas[i + 1] if i + 1 < len(betas) else (1.0 + betas[-1]) / 2
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    best = (a + b) / 2
    # never report worse than the best grid point
    if f(best) < vals[i]:
        return vals[i], betas[i]
    return f(best), best


def exp_tail(alpha: float, beta: float) -> float:
    """Limit of Pr(N >= beta log2 n) for Geometric(p_n) lengths: e^{-alpha beta}."""
    return math.exp(-alpha * beta)


def exp_weighted_tail(alpha: float, gamma: float) -> float:
    """Limit of E[N 1{N >= gamma log2 n}] / log2 n: (gamma + 1/alpha) e^{-alpha gamma}."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return (gamma + 1.0 / alpha) * math.exp(-alpha * gamma)


def coverage_expect(alpha: float, gamma: float) -> float:
    """Limit of the coverage c_gamma: (alpha gamma + 1) e^{-alpha gamma}."""
    return (alpha * gamma + 1.0) * math.exp(-alpha * gamma)


def achievability_objective(alpha: float, gamma: float) -> float:
    """Random-coding rate reachable with threshold gamma: (1 + alpha gamma - alpha) e^{-alpha gamma}."""
    return (1.0 + alpha * gamma - alpha) * math.exp(-alpha * gamma)


@dataclass
class BoundSet:
    alpha: float
    capacity: float
    det_capacity: float
    converse: dict[int, float] = field(default_factory=dict)
    interleave_rate: float | None = None
    beta_star: float | None = None
    coverage_A: dict[float, float] = field(default_factory=dict)
    coverage_expect: dict[float, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("converse", "coverage_A", "coverage_expect"):
            d[key] = {str(k): v for k, v in d[key].items()}
        return d


def bound_set(alpha: float, Ls=(), betas=(), gammas=()) -> BoundSet:
    bs = BoundSet(alpha=alpha, capacity=capacity(alpha), det_capacity=det_capacity(alpha))
    for L in Ls:
        bs.converse[int(L)] = converse_bound(alpha, int(L))
    if alpha > 0:
        bs.interleave_rate, bs.beta_star = interleave_rate(alpha)
        for b in betas:
            bs.coverage_A[b] = coverage_A(alpha, b)
        for g in gammas:
            bs.coverage_expect[g] = coverage_expect(alpha, g)
    return bs
