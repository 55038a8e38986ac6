"""Exact finite-N distribution laws for the two-species urn.

Everything here rests on one fact about a single ball with clock rate r:
started on a given side, by time t it has been redrawn at least once with
probability 1 - exp(-r t), and conditionally on that its side is a fair coin.
So each coordinate of the chain is a sum of independent Bernoullis and its law
is a convolution of two binomials, one for the balls that started left and one
for the balls that started right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .model import CapacityError, InitialState, ModelParams, corners

FULL_SCAN_LIMIT = 100_000

_MASS_RENORM_TOL = 1e-12
_MASS_ERROR_TOL = 1e-9
_NEGATIVE_TOL = -1e-12


class Pmf:
    """Probability mass function on {0, 1, ..., K}, stored densely.

    Entries that cancellation pushed slightly negative are clamped to zero.
    Total mass is renormalised when it drifts past 1e-12 and rejected when
    it drifts further than log-space summation roundoff can explain (about
    5e-15 per entry; that much drift means a bug, not roundoff).  The
    underlying array is frozen so instances can be shared freely.
    """

    __slots__ = ("probs",)

    def __init__(self, probs) -> None:
        arr = np.array(probs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a pmf needs a non-empty 1-d array of probabilities")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pmf entries must be finite")
        low = arr.min()
        if low < _NEGATIVE_TOL:
            raise ValueError(f"pmf entry {low} is too negative to be roundoff")
        if low < 0.0:
            arr = np.maximum(arr, 0.0)
        total = float(arr.sum())
        drift = abs(total - 1.0)
        if drift > max(_MASS_ERROR_TOL, 5e-15 * arr.size):
            raise ValueError(f"pmf mass {total} is too far from 1")
        if drift > _MASS_RENORM_TOL:
            arr = arr / total
        arr.setflags(write=False)
        self.probs = arr

    def __len__(self) -> int:
        return self.probs.size

    @property
    def max_value(self) -> int:
        return self.probs.size - 1

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def variance(self) -> float:
        values = np.arange(self.probs.size)
        mu = float(values @ self.probs)
        return float(((values - mu) ** 2) @ self.probs)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


def binomial_pmf(trials: int, success_prob: float) -> Pmf:
    """Binomial(trials, success_prob) computed through log-gamma.

    The log-space route keeps entries accurate for trial counts up to about
    1e6, where direct factorial ratios would overflow.
    """
    if not isinstance(trials, (int, np.integer)) or isinstance(trials, bool):
        raise ValueError("trials must be an integer")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    p = float(success_prob)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"success probability {p} outside [0, 1]")
    if trials == 0:
        return Pmf([1.0])
    if p == 0.0:
        out = np.zeros(trials + 1)
        out[0] = 1.0
        return Pmf(out)
    if p == 1.0:
        out = np.zeros(trials + 1)
        out[-1] = 1.0
        return Pmf(out)
    k = np.arange(trials + 1, dtype=float)
    log_pmf = (
        gammaln(trials + 1.0)
        - gammaln(k + 1.0)
        - gammaln(trials - k + 1.0)
        + xlogy(k, p)
        + xlog1py(trials - k, -p)
    )
    return Pmf(np.exp(log_pmf))


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Law of the sum of independent variables with laws a and b.

    Direct convolution: O(len(a) * len(b)) multiply-adds, no FFT, so the
    result carries no spectral roundoff and tiny tail masses survive.
    """
    return Pmf(np.convolve(a.probs, b.probs))


@dataclass(frozen=True)
class SurvivalPair:
    """Per-ball survival probabilities at a fixed time.

    survival = chance the ball has not been redrawn yet; flip = chance an
    initially-right ball sits in the left urn, (1 - survival) / 2.
    """

    heavy_survival: float
    regular_survival: float
    heavy_flip: float
    regular_flip: float


def survival(params: ModelParams, t: float) -> SurvivalPair:
    if t < 0.0:
        raise ValueError("time must be non-negative")
    heavy_flip = -math.expm1(-params.heavy_rate * t) / 2.0
    regular_flip = -math.expm1(-t) / 2.0
    return SurvivalPair(
        heavy_survival=math.exp(-params.heavy_rate * t),
        regular_survival=math.exp(-t),
        heavy_flip=heavy_flip,
        regular_flip=regular_flip,
    )


def coordinate_law(count: int, ones_initial: int, rate: float, t: float) -> Pmf:
    """Law of one species' left-urn count at time t.

    count balls with clock rate `rate`, ones_initial of them starting in the
    left urn.  Each starter stays counted with probability (1 + s) / 2 and
    each non-starter joins with probability (1 - s) / 2, s = exp(-rate t).
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if not 0 <= ones_initial <= count:
        raise ValueError(f"ones_initial must lie in [0, {count}], got {ones_initial}")
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    if t < 0.0:
        raise ValueError("time must be non-negative")
    flip = -math.expm1(-rate * t) / 2.0
    keep = 1.0 - flip
    return convolve(
        binomial_pmf(ones_initial, keep),
        binomial_pmf(count - ones_initial, flip),
    )


def observed_law(params: ModelParams, init: InitialState, t: float) -> Pmf:
    """Exact law of the total left-urn count at time t from a given start."""
    init.validate(params)
    regular = coordinate_law(params.regular_count, init.regular_left, 1.0, t)
    heavy = coordinate_law(params.heavy_count, init.heavy_left, params.heavy_rate, t)
    return convolve(regular, heavy)


def chain_law(params: ModelParams, init: InitialState, t: float) -> tuple[Pmf, Pmf]:
    """Both factors of the product-form chain law (regular, heavy).

    The joint law of the pair state is the outer product of the two factors;
    it is returned factored to keep large instances cheap.
    """
    init.validate(params)
    regular = coordinate_law(params.regular_count, init.regular_left, 1.0, t)
    heavy = coordinate_law(params.heavy_count, init.heavy_left, params.heavy_rate, t)
    return regular, heavy


def stationary_observed(params: ModelParams) -> Pmf:
    """Stationary law of the observable: Binomial(N, 1/2)."""
    return binomial_pmf(params.total_balls, 0.5)


def stationary_chain(params: ModelParams) -> tuple[Pmf, Pmf]:
    """Stationary chain factors: Binomial(n, 1/2) x Binomial(m, 1/2)."""
    return (
        binomial_pmf(params.regular_count, 0.5),
        binomial_pmf(params.heavy_count, 0.5),
    )


def tv(a: Pmf, b: Pmf) -> float:
    """Total-variation distance, one half the L1 distance of the tables.

    Clamped to 1: disjoint supports plus the 1e-15-scale mass drift each
    table is allowed can push the raw half-sum a few ulp past the true
    maximum.
    """
    width = max(len(a), len(b))
    pa = np.zeros(width)
    pa[: len(a)] = a.probs
    pb = np.zeros(width)
    pb[: len(b)] = b.probs
    return min(1.0, 0.5 * float(np.abs(pa - pb).sum()))


_TV_PRODUCT_BLOCK = 512


def tv_product(x: tuple[Pmf, Pmf], y: tuple[Pmf, Pmf]) -> float:
    """Total-variation distance between two product laws given by factors.

    Streams over row blocks of the outer products so the peak memory stays
    near BLOCK * len(heavy factor) instead of the full joint table.  The
    block reduction order is fixed, so results are bit-reproducible.
    """
    xr, xh = x[0].probs, x[1].probs
    yr, yh = y[0].probs, y[1].probs
    if xr.size != yr.size or xh.size != yh.size:
        raise ValueError("product factors must be over matching state spaces")
    total = 0.0
    for start in range(0, xr.size, _TV_PRODUCT_BLOCK):
        stop = min(start + _TV_PRODUCT_BLOCK, xr.size)
        block = np.abs(
            np.outer(xr[start:stop], xh) - np.outer(yr[start:stop], yh)
        ).sum()
        total += float(block)
    # same ulp-level clamp as tv
    return min(1.0, 0.5 * total)


def _initial_states(params: ModelParams, strategy) -> list[InitialState]:
    if isinstance(strategy, InitialState):
        return [strategy.validate(params)]
    if strategy == "corners":
        return corners(params)
    if strategy == "full_scan":
        states = (params.regular_count + 1) * (params.heavy_count + 1)
        if states > FULL_SCAN_LIMIT:
            raise CapacityError(
                f"full scan over {states} initial states exceeds the "
                f"{FULL_SCAN_LIMIT} guard"
            )
        return [
            InitialState(r, h)
            for r in range(params.regular_count + 1)
            for h in range(params.heavy_count + 1)
        ]
    raise ValueError(f"unknown strategy {strategy!r}")


def observed_tv(params: ModelParams, t: float, strategy="corners") -> float:
    """Worst-case distance of the observable from stationarity at time t.

    strategy: "corners" (default) maximises over the four extreme starts,
    "full_scan" over every start (guarded), or a single InitialState.
    """
    starts = _initial_states(params, strategy)
    target = stationary_observed(params)
    return max(tv(observed_law(params, init, t), target) for init in starts)


def chain_tv(params: ModelParams, t: float, strategy="corners") -> float:
    """Worst-case distance of the full pair chain from stationarity at time t."""
    starts = _initial_states(params, strategy)
    target = stationary_chain(params)
    return max(tv_product(chain_law(params, init, t), target) for init in starts)


def observable_mean_variance(params: ModelParams, t: float) -> tuple[float, float]:
    """Mean and variance of the left-urn total started from the all-right state.

    mean = m p + n q and var = m p (1 - p) + n q (1 - q) with p, q the heavy
    and regular flip probabilities; the variance never exceeds N / 4.
    """
    pair = survival(params, t)
    m, n = params.heavy_count, params.regular_count
    p, q = pair.heavy_flip, pair.regular_flip
    mean = m * p + n * q
    var = m * p * (1.0 - p) + n * q * (1.0 - q)
    return mean, var
