"""Pure-Python implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them line for line
and must return identical results.
"""

import math

import numpy as np


def scan_min_cost(p, k, s_lo, s_hi):
    """Return ``(s, cost)`` minimising the k-round cost over ``s_lo..s_hi``.

    Ties go to the smaller ``s``.  The scan stops early once
    ``p + q*(1 - q**(s-1))**k`` (a lower bound on the cost of every larger
    pool, since it is non-decreasing in ``s``) reaches the best cost so far.
    """
    log_q = math.log1p(-p)
    q = 1.0 - p
    best_s = s_lo
    best = math.inf
    for s in range(s_lo, s_hi + 1):
        tail = q * math.pow(-math.expm1((s - 1.0) * log_q), k)
        cost = k / s + p + tail
        if cost < best:
            best = cost
            best_s = s
        elif p + tail >= best:
            break
    return best_s, best


def count_retests(infected, perms, pool_ok, s):
    """Apply the all-pools-positive retest rule.

    ``infected`` is a uint8 mask over patients, ``perms[r]`` the patient order
    of round ``r`` (position ``j`` belongs to pool ``j // s``) and
    ``pool_ok[r, i]`` is 0 when pool ``i`` of round ``r`` suffers a false
    negative.  Returns ``(individual_retests, detected_positives,
    suspect_negatives)``.
    """
    n = infected.shape[0]
    n_pools = pool_ok.shape[1]
    pool_of = np.arange(n) // s
    is_pos = infected.astype(bool)
    cleared = np.zeros(n, dtype=bool)
    for r in range(perms.shape[0]):
        perm = perms[r]
        has_pos = np.zeros(n_pools, dtype=bool)
        has_pos[pool_of[is_pos[perm]]] = True
        positive = has_pos & pool_ok[r].astype(bool)
        cleared[perm[~positive[pool_of]]] = True
    retest = ~cleared
    detected = int(np.count_nonzero(retest & is_pos))
    retests = int(np.count_nonzero(retest))
    return retests, detected, retests - detected
