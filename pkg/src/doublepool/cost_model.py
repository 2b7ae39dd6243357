"""Expected number of tests per patient for single, double and k-round pooling.

Every cost here is a closed form in the prevalence ``p`` and the pool size
``s``.  The protocol-facing functions take an integer ``s``; the
``*_continuous`` and ``*_derivative`` variants extend the same expressions to
real ``s`` so that stationary points can be located.

Powers of ``q = 1 - p`` are evaluated as ``exp(s * log1p(-p))`` and
``1 - q**s`` as ``-expm1(s * log1p(-p))`` so that small prevalences do not
lose their relative accuracy to cancellation.
"""

from __future__ import annotations

import math
import numbers
import operator

from .errors import DomainError

__all__ = [
    "check_prevalence",
    "check_multiplicity",
    "check_pool_size",
    "single_pool_cost",
    "single_pool_cost_continuous",
    "single_pool_cost_derivative",
    "double_pool_cost",
    "double_pool_cost_continuous",
    "double_pool_cost_derivative",
    "k_pool_cost",
    "k_pool_cost_continuous",
    "k_pool_cost_derivative",
    "individual_testing_cost",
]

#: Cost of testing every patient on their own, in tests per patient.
individual_testing_cost = 1.0


def check_prevalence(p) -> float:
    """Return ``p`` as a float, raising :class:`DomainError` unless 0 < p < 1."""
    if isinstance(p, bool) or not isinstance(p, numbers.Real):
        raise DomainError(f"prevalence must be a real number, got {p!r}")
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"prevalence must satisfy 0 < p < 1, got {p!r}")
    return p


def check_multiplicity(k) -> int:
    if isinstance(k, bool):
        raise DomainError(f"number of rounds must be an integer, got {k!r}")
    try:
        k = operator.index(k)
    except TypeError:
        raise DomainError(f"number of rounds must be an integer, got {k!r}") from None
    if k < 1:
        raise DomainError(f"number of rounds must be >= 1, got {k}")
    return k


def _min_pool_size(k: int) -> int:
    # One-patient pools only make sense for a single round.
    return 1 if k == 1 else 2


def check_pool_size(s, k: int = 1, *, integer: bool = True):
    """Validate a pool size for a ``k``-round protocol.

    Integer sizes are required by the protocol-facing API; ``integer=False``
    admits the real-valued extension used for derivatives.
    """
    lo = _min_pool_size(k)
    if isinstance(s, bool):
        raise DomainError(f"pool size must be a number, got {s!r}")
    if integer:
        try:
            s = operator.index(s)
        except TypeError:
            raise DomainError(f"pool size must be an integer, got {s!r}") from None
    else:
        if not isinstance(s, numbers.Real) or not math.isfinite(s):
            raise DomainError(f"pool size must be a finite real, got {s!r}")
        s = float(s)
    if s < lo:
        raise DomainError(f"pool size must be >= {lo} for k={k}, got {s}")
    return s


def _k_cost(p: float, k: int, s: float) -> float:
    log_q = math.log1p(-p)
    # 1 - q**(s-1): probability that at least one other pool member is positive.
    busy = -math.expm1((s - 1.0) * log_q)
    return k / s + p + (1.0 - p) * math.pow(busy, k)


def _k_cost_derivative(p: float, k: int, s: float) -> float:
    log_q = math.log1p(-p)
    q_s = math.exp(s * log_q)
    busy = -math.expm1((s - 1.0) * log_q)
    return -k / (s * s) - k * q_s * math.pow(busy, k - 1) * log_q


def single_pool_cost(p, s) -> float:
    """Dorfman cost ``1/s + 1 - (1-p)**s`` for an integer pool size."""
    p = check_prevalence(p)
    s = check_pool_size(s, 1)
    return 1.0 / s - math.expm1(s * math.log1p(-p))


def single_pool_cost_continuous(p, s) -> float:
    p = check_prevalence(p)
    s = check_pool_size(s, 1, integer=False)
    return 1.0 / s - math.expm1(s * math.log1p(-p))


def single_pool_cost_derivative(p, s) -> float:
    """d/ds of the single-pooling cost: ``-(1-p)**s * ln(1-p) - 1/s**2``."""
    p = check_prevalence(p)
    s = check_pool_size(s, 1, integer=False)
    log_q = math.log1p(-p)
    return -math.exp(s * log_q) * log_q - 1.0 / (s * s)


def double_pool_cost(p, s) -> float:
    """Cost ``2/s + p + q*(1 - q**(s-1))**2`` of double pooling, integer ``s >= 2``."""
    p = check_prevalence(p)
    s = check_pool_size(s, 2)
    return _k_cost(p, 2, s)


def double_pool_cost_continuous(p, s) -> float:
    p = check_prevalence(p)
    s = check_pool_size(s, 2, integer=False)
    return _k_cost(p, 2, s)


def double_pool_cost_derivative(p, s) -> float:
    """d/ds of the double-pooling cost: ``-2/s**2 - 2 q**s (1 - q**(s-1)) ln q``."""
    p = check_prevalence(p)
    s = check_pool_size(s, 2, integer=False)
    return _k_cost_derivative(p, 2, s)


def k_pool_cost(p, k, s) -> float:
    """Expected tests per patient when every patient sits in ``k`` random pools.

    A patient is retested iff all ``k`` of their pools are positive, giving
    ``k/s + p + q*(1 - q**(s-1))**k``.

    >>> round(k_pool_cost(0.01112, 3, 36), 4)
    0.128
    """
    p = check_prevalence(p)
    k = check_multiplicity(k)
    s = check_pool_size(s, k)
    return _k_cost(p, k, s)


def k_pool_cost_continuous(p, k, s) -> float:
    p = check_prevalence(p)
    k = check_multiplicity(k)
    s = check_pool_size(s, k, integer=False)
    return _k_cost(p, k, s)


def k_pool_cost_derivative(p, k, s) -> float:
    """d/ds of :func:`k_pool_cost`: ``-k/s**2 - k q**s (1 - q**(s-1))**(k-1) ln q``."""
    p = check_prevalence(p)
    k = check_multiplicity(k)
    s = check_pool_size(s, k, integer=False)
    return _k_cost_derivative(p, k, s)
