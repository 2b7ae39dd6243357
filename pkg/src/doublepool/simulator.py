"""Monte-Carlo simulation of the k-round pooling protocol on a finite population.

One trial:

1. draw who is infected (i.i.d. Bernoulli(p), or exactly ``m`` patients
   chosen without replacement);
2. for each of the ``k`` rounds shuffle the patients and cut the order into
   consecutive pools of ``s`` (the last pool takes the remainder);
3. a pool reads positive iff it holds an infected patient and does not hit
   a false negative (i.i.d. per pool test with probability ``pool_fn_rate``);
4. retest individually every patient whose ``k`` pools all read positive.
   Individual tests are perfect.

Each trial owns a random stream seeded from ``(master_seed, trial_index)``
through :class:`numpy.random.SeedSequence` (``spawn_key=(trial_index,)``), so
any trial can be replayed alone and results do not depend on how trials are
spread over worker processes.  Within a trial the draws are consumed in a
fixed order: infection status, the ``k`` shuffles, then (only when
``pool_fn_rate > 0``) the false-negative draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Union

import numpy as np

from . import kernels
from .cost_model import _k_cost, check_multiplicity, check_pool_size, check_prevalence
from .errors import DomainError

__all__ = [
    "Bernoulli",
    "FixedCount",
    "SimConfig",
    "TrialDraw",
    "TrialOutcome",
    "SimReport",
    "PenaltyEstimate",
    "draw_trial",
    "run_trial",
    "outcome_from_draw",
    "run_simulation",
    "estimate_correlation_penalty",
    "sensitivity_report",
]


@dataclass(frozen=True)
class Bernoulli:
    """Every patient is infected independently with probability ``p``."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", check_prevalence(self.p))


@dataclass(frozen=True)
class FixedCount:
    """Exactly ``m`` patients, chosen uniformly without replacement, are infected."""

    m: int


InfectionModel = Union[Bernoulli, FixedCount]


@dataclass(frozen=True)
class SimConfig:
    n_patients: int
    infection: InfectionModel
    k: int
    s: int
    trials: int
    master_seed: int = 0
    pool_fn_rate: float = 0.0

    def __post_init__(self):
        n = self.n_patients
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError(f"n_patients must be a positive integer, got {n!r}")
        k = check_multiplicity(self.k)
        s = check_pool_size(self.s, k)
        if s > n:
            raise DomainError(f"pool size {s} exceeds population {n}")
        if not isinstance(self.infection, (Bernoulli, FixedCount)):
            raise DomainError(f"unknown infection model {self.infection!r}")
        if isinstance(self.infection, FixedCount):
            m = self.infection.m
            if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or not 0 <= m <= n:
                raise DomainError(f"fixed positive count must be in [0, {n}], got {m!r}")
        t = self.trials
        if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 1:
            raise DomainError(f"trials must be a positive integer, got {t!r}")
        seed = self.master_seed
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
            raise DomainError(f"master_seed must be a 64-bit unsigned integer, got {seed!r}")
        fn = self.pool_fn_rate
        if not isinstance(fn, (int, float)) or isinstance(fn, bool) or not 0.0 <= fn < 1.0:
            raise DomainError(f"pool_fn_rate must be in [0, 1), got {fn!r}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "n_patients", int(n))
        object.__setattr__(self, "trials", int(t))
        object.__setattr__(self, "master_seed", int(seed))
        object.__setattr__(self, "pool_fn_rate", float(fn))

    @property
    def n_pools(self) -> int:
        """Pools per round, the last one possibly short."""
        return -(-self.n_patients // self.s)

    @property
    def analytic_cost(self) -> float | None:
        if isinstance(self.infection, Bernoulli):
            return _k_cost(self.infection.p, self.k, float(self.s))
        return None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["infection"] = (
            {"model": "bernoulli", "p": self.infection.p}
            if isinstance(self.infection, Bernoulli)
            else {"model": "fixed", "m": self.infection.m}
        )
        return d


class TrialDraw(NamedTuple):
    """Random inputs of one trial."""

    infected: np.ndarray  # uint8[n]
    perms: np.ndarray  # int64[k, n]; position j of round r is in pool j // s
    pool_ok: np.ndarray  # uint8[k, n_pools]; 0 marks a false-negative pool test


@dataclass(frozen=True)
class TrialOutcome:
    pool_tests: int
    individual_retests: int
    positives: int
    detected_positives: int
    suspect_negatives: int

    @property
    def total_tests(self) -> int:
        return self.pool_tests + self.individual_retests

    @property
    def missed_positives(self) -> int:
        return self.positives - self.detected_positives

    def as_dict(self) -> dict:
        return {
            "pool_tests": self.pool_tests,
            "individual_retests": self.individual_retests,
            "total_tests": self.total_tests,
            "positives": self.positives,
            "detected_positives": self.detected_positives,
            "missed_positives": self.missed_positives,
            "suspect_negatives": self.suspect_negatives,
        }


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    mean_tests_per_patient: float
    std_error: float | None
    mean_total_tests: float
    total_positives: int
    total_detected: int
    analytic_cost: float | None
    outcomes: tuple[TrialOutcome, ...] | None = field(default=None, repr=False)

    @property
    def trials(self) -> int:
        return self.config.trials

    @property
    def empirical_sensitivity(self) -> float:
        if self.total_positives == 0:
            return 1.0
        return self.total_detected / self.total_positives

    def as_dict(self) -> dict:
        return {
            "mean_tests_per_patient": self.mean_tests_per_patient,
            "std_error": self.std_error,
            "mean_total_tests": self.mean_total_tests,
            "trials": self.trials,
            "analytic_cost": self.analytic_cost,
            "empirical_sensitivity": self.empirical_sensitivity,
            "total_positives": self.total_positives,
            "total_detected": self.total_detected,
        }


class PenaltyEstimate(NamedTuple):
    penalty: float
    std_error: float | None
    empirical: float
    analytic: float


def _trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.PCG64(ss))


def draw_trial(config: SimConfig, trial_index: int) -> TrialDraw:
    """Draw infection status, the ``k`` partitions and the pool false negatives."""
    if isinstance(trial_index, bool) or not isinstance(trial_index, (int, np.integer)) or trial_index < 0:
        raise DomainError(f"trial_index must be a non-negative integer, got {trial_index!r}")
    rng = _trial_rng(config.master_seed, int(trial_index))
    n = config.n_patients
    if isinstance(config.infection, Bernoulli):
        infected = (rng.random(n) < config.infection.p).astype(np.uint8)
    else:
        infected = np.zeros(n, dtype=np.uint8)
        infected[rng.choice(n, size=config.infection.m, replace=False)] = 1
    perms = np.empty((config.k, n), dtype=np.int64)
    for r in range(config.k):
        perms[r] = rng.permutation(n)
    if config.pool_fn_rate > 0.0:
        pool_ok = (rng.random((config.k, config.n_pools)) >= config.pool_fn_rate).astype(np.uint8)
    else:
        pool_ok = np.ones((config.k, config.n_pools), dtype=np.uint8)
    return TrialDraw(infected, perms, pool_ok)


def run_trial(config: SimConfig, trial_index: int) -> TrialOutcome:
    return outcome_from_draw(config, draw_trial(config, trial_index))


def outcome_from_draw(config: SimConfig, draw: TrialDraw) -> TrialOutcome:
    retests, detected, suspects = kernels.count_retests(
        draw.infected, draw.perms, draw.pool_ok, config.s
    )
    return TrialOutcome(
        pool_tests=config.k * config.n_pools,
        individual_retests=retests,
        positives=int(np.count_nonzero(draw.infected)),
        detected_positives=detected,
        suspect_negatives=suspects,
    )


def _run_chunk(config: SimConfig, start: int, stop: int) -> list[TrialOutcome]:
    return [run_trial(config, i) for i in range(start, stop)]


def _outcomes(config: SimConfig, workers: int) -> list[TrialOutcome]:
    if workers <= 1 or config.trials < 2:
        return _run_chunk(config, 0, config.trials)
    n_chunks = min(config.trials, 4 * workers)
    edges = np.linspace(0, config.trials, n_chunks + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_chunk, config, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:])
            if b > a
        ]
        out = []
        for fut in futures:
            out.extend(fut.result())
    return out


def run_simulation(config: SimConfig, *, workers: int = 1, keep_trials: bool = False) -> SimReport:
    """Run ``config.trials`` independent trials and aggregate them.

    Sums use :func:`math.fsum`, which is exactly rounded and therefore
    independent of the order in which trial results arrive.
    """
    outcomes = _outcomes(config, workers)
    n = config.n_patients
    per_patient = [o.total_tests / n for o in outcomes]
    trials = len(per_patient)
    mean = math.fsum(per_patient) / trials
    if trials > 1:
        var = math.fsum((x - mean) ** 2 for x in per_patient) / (trials - 1)
        std_error = math.sqrt(var / trials)
    else:
        std_error = None
    return SimReport(
        config=config,
        mean_tests_per_patient=mean,
        std_error=std_error,
        mean_total_tests=math.fsum(o.total_tests for o in outcomes) / trials,
        total_positives=sum(o.positives for o in outcomes),
        total_detected=sum(o.detected_positives for o in outcomes),
        analytic_cost=config.analytic_cost,
        outcomes=tuple(outcomes) if keep_trials else None,
    )


def estimate_correlation_penalty(p, k, s, n, trials, seed=0, *, workers: int = 1) -> PenaltyEstimate:
    """Empirical minus analytic tests per patient on a finite population.

    The analytic cost treats a patient's pools as independent draws from an
    infinite population; on ``n`` patients the rounds share members, and the
    last pool of a round may be short.  The difference is measured, not
    modelled.
    """
    config = SimConfig(
        n_patients=n, infection=Bernoulli(p), k=k, s=s, trials=trials, master_seed=seed
    )
    report = run_simulation(config, workers=workers)
    analytic = report.analytic_cost
    return PenaltyEstimate(
        penalty=report.mean_tests_per_patient - analytic,
        std_error=report.std_error,
        empirical=report.mean_tests_per_patient,
        analytic=analytic,
    )


def sensitivity_report(config: SimConfig, *, workers: int = 1) -> float:
    """Fraction of truly positive patients the protocol ends up retesting.

    When a positive patient is alone in each of their pools, every pool
    must escape a false negative, so the expected sensitivity is
    ``(1 - pool_fn_rate) ** k``; other positives sharing a pool raise it.
    """
    return run_simulation(config, workers=workers).empirical_sensitivity
