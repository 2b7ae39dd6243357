"""Optimal pool sizes and the prevalence thresholds derived from them.

Two notions of optimum are kept side by side:

* the *continuous* optimum, a stationary point of the cost extended to real
  pool sizes (closed form via Lambert W for one round, bisection on the
  derivative for k >= 2);
* the *integer* optimum, found by an exhaustive scan of ``[2, cap]``.  The
  continuous value is reported next to it as a cross-check only; near the
  steps of the optimum-vs-p curve, rounding it is not reliable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .cost_model import (
    _k_cost,
    _k_cost_derivative,
    check_multiplicity,
    check_prevalence,
    individual_testing_cost,
)
from .errors import DomainError, NoInteriorOptimumError, NotAttainedError, RangeError

__all__ = [
    "SearchBounds",
    "PoolPlan",
    "lambert_w0",
    "continuous_optimum_s1",
    "continuous_optimum_sk",
    "integer_optimum",
    "savings_percent",
    "find_p_for_continuous_s1",
    "find_savings_crossover",
    "pooling_breakeven",
]

_INV_E = math.exp(-1.0)

#: Above this prevalence the one-round cost has no stationary point: the
#: Lambert W argument ``-sqrt(-ln(1-p))/2`` drops below ``-1/e``.
P_MAX_S1 = -math.expm1(-4.0 * math.exp(-2.0))


@dataclass(frozen=True)
class SearchBounds:
    """Pool-size search range.

    ``s_max`` bounds every scan; ``practical_cap`` (e.g. 64, the largest pool
    size reported workable for PCR) further restricts the integer optimum.
    """

    s_max: int = 10000
    practical_cap: int | None = None

    def __post_init__(self):
        if isinstance(self.s_max, bool) or not isinstance(self.s_max, int) or self.s_max < 2:
            raise DomainError(f"s_max must be an integer >= 2, got {self.s_max!r}")
        cap = self.practical_cap
        if cap is not None:
            if isinstance(cap, bool) or not isinstance(cap, int) or not 2 <= cap <= self.s_max:
                raise DomainError(
                    f"practical_cap must be an integer in [2, s_max={self.s_max}], got {cap!r}"
                )

    @property
    def effective_cap(self) -> int:
        return self.s_max if self.practical_cap is None else self.practical_cap


@dataclass(frozen=True)
class PoolPlan:
    """Recommended pool size for ``k`` rounds at prevalence ``p``."""

    p: float
    k: int
    s_continuous: float | None
    s_integer: int
    expected_cost: float
    cap_binding: bool = False
    baseline_cost: float = individual_testing_cost

    @property
    def beneficial(self) -> bool:
        return self.expected_cost < self.baseline_cost

    @property
    def savings_vs_individual_percent(self) -> float:
        return 100.0 * (self.baseline_cost - self.expected_cost) / self.baseline_cost

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "s_continuous": self.s_continuous,
            "s_integer": self.s_integer,
            "expected_cost": self.expected_cost,
            "baseline_cost": self.baseline_cost,
            "beneficial": self.beneficial,
            "cap_binding": self.cap_binding,
            "savings_vs_individual_percent": self.savings_vs_individual_percent,
        }


def lambert_w0(x: float, *, max_iter: int = 64) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Halley iteration from one of three starting points: the branch-point
    series ``-1 + r - r**2/3 + 11 r**3/72`` with ``r = sqrt(2(1 + e x))`` for
    ``x < -0.25``, ``log1p(x)`` up to ``x = 3`` and ``L1 - L2 + L2/L1``
    (``L1 = ln x``, ``L2 = ln ln x``) beyond.
    """
    x = float(x)
    if math.isnan(x) or x < -_INV_E:
        raise DomainError(f"lambert_w0 is real only for x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == -_INV_E:
        return -1.0
    if math.isinf(x):
        return math.inf

    if x < -0.25:
        r = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + r - r * r / 3.0 + 11.0 / 72.0 * r ** 3
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return max(w, -1.0)


def continuous_optimum_s1(p) -> float:
    """Real pool size minimising the one-round cost, ``2 W0(-sqrt(-ln q)/2) / ln q``.

    The principal branch gives the minimum (``s ~ 1/sqrt(p)`` for small p);
    the lower branch would give the local maximum of the cost far out.
    """
    p = check_prevalence(p)
    log_q = math.log1p(-p)
    x = -0.5 * math.sqrt(-log_q)
    if x < -_INV_E:
        raise NoInteriorOptimumError(
            f"single pooling has no stationary pool size for p={p} > {P_MAX_S1:.6g}"
        )
    return 2.0 * lambert_w0(x) / log_q


def _bisect_upcrossing(fn, lo, hi, tol):
    # Assumes fn(lo) < 0 <= fn(hi).
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def continuous_optimum_sk(p, k, bounds: SearchBounds | None = None, *, tol: float = 1e-12) -> float:
    """Real pool size minimising the ``k``-round cost, by bisection on its derivative.

    The derivative is negative at small s, turns positive past the minimum
    and becomes negative again near the local maximum at very large s, so the
    bracket is the *first* sign change on a geometric grid over
    ``[2, s_max]`` rather than the end points of that interval.
    """
    p = check_prevalence(p)
    k = check_multiplicity(k)
    bounds = bounds or SearchBounds()
    s_max = float(bounds.s_max)

    def deriv(s):
        return _k_cost_derivative(p, k, s)

    lo = 2.0
    if deriv(lo) >= 0.0:
        raise NoInteriorOptimumError(
            f"k={k} cost is non-decreasing from s=2 at p={p}; no interior optimum"
        )
    while lo < s_max:
        hi = min(s_max, max(lo + 1.0, lo * 1.1))
        if deriv(hi) >= 0.0:
            return _bisect_upcrossing(deriv, lo, hi, tol)
        lo = hi
    raise NoInteriorOptimumError(
        f"k={k} cost derivative does not change sign on [2, {bounds.s_max}] at p={p}"
    )


def _continuous_or_none(p: float, k: int, bounds: SearchBounds):
    try:
        if k == 1:
            return continuous_optimum_s1(p)
        return continuous_optimum_sk(p, k, bounds)
    except NoInteriorOptimumError:
        return None


def _integer_min(p: float, k: int, cap: int):
    s, _ = kernels.scan_min_cost(p, k, 2, cap)
    return s, _k_cost(p, k, float(s))


def integer_optimum(p, k, bounds: SearchBounds | None = None) -> PoolPlan:
    """Best integer pool size in ``[2, cap]`` for ``k`` rounds, found by exhaustive scan.

    Ties go to the smaller pool.  ``cap_binding`` is set when a
    ``practical_cap`` excludes a strictly better pool size below ``s_max``.
    """
    p = check_prevalence(p)
    k = check_multiplicity(k)
    bounds = bounds or SearchBounds()
    s, cost = _integer_min(p, k, bounds.effective_cap)
    binding = False
    if bounds.practical_cap is not None and bounds.practical_cap < bounds.s_max:
        s_free, _ = _integer_min(p, k, bounds.s_max)
        binding = s_free != s
    return PoolPlan(
        p=p,
        k=k,
        s_continuous=_continuous_or_none(p, k, bounds),
        s_integer=s,
        expected_cost=cost,
        cap_binding=binding,
    )


def _savings(p: float, cap: int) -> float:
    c1 = _integer_min(p, 1, cap)[1]
    c2 = _integer_min(p, 2, cap)[1]
    return 100.0 * (c1 - c2) / c1


def savings_percent(p, bounds: SearchBounds | None = None) -> float:
    """Percent saved by double pooling over single pooling, both at their integer optima."""
    p = check_prevalence(p)
    bounds = bounds or SearchBounds()
    return _savings(p, bounds.effective_cap)


def find_p_for_continuous_s1(s_target: float, *, p_lo: float = 1e-9, tol: float = 1e-15) -> float:
    """Prevalence at which the continuous one-round optimum equals ``s_target``.

    ``find_p_for_continuous_s1(10)`` is the p at which the best Dorfman pool
    is exactly 10 (about 0.01112).  Bisection relies on the optimum strictly
    decreasing in p.
    """
    s_target = float(s_target)
    if not s_target > 1.0 or math.isinf(s_target):
        raise DomainError(f"s_target must be a finite real > 1, got {s_target!r}")
    p_hi = P_MAX_S1
    s_at_lo = continuous_optimum_s1(p_lo)
    s_at_hi = continuous_optimum_s1(p_hi)
    if not s_at_hi <= s_target <= s_at_lo:
        raise RangeError(
            f"s_target={s_target} outside [{s_at_hi:.6g}, {s_at_lo:.6g}] reachable "
            f"for p in [{p_lo:g}, {p_hi:.6g}]"
        )
    lo, hi = p_lo, p_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if continuous_optimum_s1(mid) > s_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_savings_crossover(
    threshold_percent: float,
    bounds: SearchBounds | None = None,
    *,
    step: float = 1e-4,
    p_max: float = 0.5,
    tol: float = 1e-9,
) -> float:
    """Largest p up to which double pooling saves at least ``threshold_percent``.

    Walks the grid ``step, 2*step, ...`` until the savings first drop below
    the threshold, then bisects between that grid point and the previous one.
    The savings curve is continuous in p (a minimum of continuous costs), so
    the bisection converges to the crossing.
    """
    threshold_percent = float(threshold_percent)
    if not 0.0 <= threshold_percent < 100.0:
        raise DomainError(f"threshold must be in [0, 100), got {threshold_percent!r}")
    if not 0.0 < step < p_max < 1.0:
        raise DomainError(f"need 0 < step < p_max < 1, got step={step}, p_max={p_max}")
    bounds = bounds or SearchBounds()
    cap = bounds.effective_cap

    n_steps = int(math.floor(p_max / step + 1e-9))
    good = None
    for i in range(1, n_steps + 1):
        p = i * step
        if _savings(p, cap) >= threshold_percent:
            good = p
            continue
        if good is None:
            raise NotAttainedError(
                f"savings below {threshold_percent}% already at p={p:g}"
            )
        lo, hi = good, p
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _savings(mid, cap) >= threshold_percent:
                lo = mid
            else:
                hi = mid
        return lo
    raise NotAttainedError(
        f"savings stay above {threshold_percent}% on the whole grid up to p={p_max}"
    )


def pooling_breakeven(k, bounds: SearchBounds | None = None, *, tol: float = 1e-12) -> float:
    """Largest p at which the optimal ``k``-round plan still beats individual testing."""
    k = check_multiplicity(k)
    bounds = bounds or SearchBounds()
    cap = bounds.effective_cap

    def beneficial(p):
        return _integer_min(p, k, cap)[1] < individual_testing_cost

    lo, hi = 1e-9, 1.0 - 1e-9
    if not beneficial(lo):
        raise NotAttainedError(f"k={k} pooling never beats individual testing")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if beneficial(mid):
            lo = mid
        else:
            hi = mid
    return lo
