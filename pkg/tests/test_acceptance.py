"""Exit criteria for the package, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line; run with ``-s`` (or
``python tests/test_acceptance.py``) to see them.
"""

import math
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from doublepool.cost_model import (
    double_pool_cost_derivative,
    k_pool_cost_derivative,
    single_pool_cost_derivative,
)
from doublepool.optimizer import (
    SearchBounds,
    find_p_for_continuous_s1,
    find_savings_crossover,
    integer_optimum,
    lambert_w0,
    savings_percent,
)
from doublepool.simulator import (
    Bernoulli,
    FixedCount,
    SimConfig,
    draw_trial,
    outcome_from_draw,
    run_simulation,
)

P10 = 0.01112


def check(criterion, description, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{criterion:>2}: {description}"
    if detail:
        line += f" -- {detail}"
    print(line)
    assert ok, line


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - t0


def exhaustive_scan(p, k, s_hi=1000):
    q = 1.0 - p
    costs = [k / s + p + q * (1.0 - q ** (s - 1)) ** k for s in range(2, s_hi + 1)]
    return 2 + int(np.argmin(costs))


def central_difference(f, s, h=1e-5):
    return (f(s + h) - f(s - h)) / (2 * h)


def test_ac01_dorfman_optimum_at_p10():
    plan, dt = timed(integer_optimum, P10, 1)
    ok = plan.s_integer == 10 and 0.2055 <= plan.expected_cost <= 0.2065 and dt < 0.05
    check(1, "k=1 optimum at p=0.01112 is s=10, cost in [0.2055, 0.2065]", ok,
          f"s={plan.s_integer} cost={plan.expected_cost:.6f} t={dt * 1e3:.2f}ms")


def test_ac02_double_optimum_at_p10():
    plan, dt = timed(integer_optimum, P10, 2)
    ok = plan.s_integer == 23 and 0.1445 <= plan.expected_cost <= 0.1455 and dt < 0.05
    check(2, "k=2 optimum at p=0.01112 is s=23, cost in [0.1445, 0.1455]", ok,
          f"s={plan.s_integer} cost={plan.expected_cost:.6f} t={dt * 1e3:.2f}ms")


def test_ac03_k3_k4_optima_at_p10():
    p3, dt3 = timed(integer_optimum, P10, 3)
    p4, dt4 = timed(integer_optimum, P10, 4)
    ok = (
        p3.s_integer == 36
        and abs(p3.expected_cost - 0.128) <= 0.0015
        and p4.s_integer == 47
        and abs(p4.expected_cost - 0.122) <= 0.0015
        and max(dt3, dt4) < 0.05
    )
    check(3, "k=3 -> s=36 (cost 0.128+-0.0015), k=4 -> s=47 (cost 0.122+-0.0015)", ok,
          f"k=3: s={p3.s_integer} cost={p3.expected_cost:.6f}; "
          f"k=4: s={p4.s_integer} cost={p4.expected_cost:.6f}")


def test_ac04_savings_at_p10():
    sv = savings_percent(P10)
    check(4, "savings_percent(0.01112) in [28.5, 30.5]", 28.5 <= sv <= 30.5, f"{sv:.4f}%")


def test_ac05_crossover():
    p_cross, dt = timed(find_savings_crossover, 10.0)
    sv10 = savings_percent(0.10)
    ok = 0.050 <= p_cross <= 0.058 and sv10 > 0 and dt < 1.0
    check(5, "10% savings crossover in [0.050, 0.058]; savings(0.10) > 0; < 1 s", ok,
          f"crossover={p_cross:.6f} savings(0.10)={sv10:.4f}% t={dt:.3f}s")


def test_ac06_p10_inversion():
    p = find_p_for_continuous_s1(10)
    check(6, "find_p_for_continuous_s1(10) in [0.0110, 0.0113]", 0.0110 <= p <= 0.0113, f"p={p:.8f}")


def test_ac07_oracle_equivalence():
    rng = random.Random(7)
    cases = [(rng.uniform(0.001, 0.3), rng.choice((1, 2, 3))) for _ in range(100)]
    t0 = time.perf_counter()
    results = [integer_optimum(p, k, SearchBounds(s_max=1000)).s_integer for p, k in cases]
    dt = time.perf_counter() - t0
    mismatches = [
        (p, k, s) for (p, k), s in zip(cases, results) if s != exhaustive_scan(p, k)
    ]
    check(7, "integer optimum equals exhaustive scan on 100 random (p, k); < 5 s",
          not mismatches and dt < 5.0, f"mismatches={len(mismatches)} t={dt:.3f}s")


def test_ac08_derivatives_and_lambert():
    def naive(p, k, s):
        q = 1.0 - p
        return k / s + p + q * (1.0 - q ** (s - 1)) ** k

    worst = 0.0
    for p in (0.001, 0.01, 0.05, 0.1):
        for s in np.linspace(2.0, 200.0, 397):
            s = float(s)
            pairs = [
                (single_pool_cost_derivative(p, s),
                 central_difference(lambda x: 1.0 / x + 1.0 - (1.0 - p) ** x, s)),
                (double_pool_cost_derivative(p, s), central_difference(lambda x: naive(p, 2, x), s)),
                (k_pool_cost_derivative(p, 3, s), central_difference(lambda x: naive(p, 3, x), s)),
                (k_pool_cost_derivative(p, 4, s), central_difference(lambda x: naive(p, 4, x), s)),
            ]
            worst = max(worst, *(abs(a - b) for a, b in pairs))
    rng = random.Random(8)
    lo = -math.exp(-1.0)
    worst_w = 0.0
    for _ in range(1000):
        x = lo + (10.0 - lo) * rng.random()
        w = lambert_w0(x)
        worst_w = max(worst_w, abs(w * math.exp(w) - x) / max(1.0, abs(x)))
    check(8, "derivatives match central differences within 1e-6; Lambert W residual <= 1e-12",
          worst <= 1e-6 and worst_w <= 1e-12, f"max |d - fd|={worst:.2e} max W residual={worst_w:.2e}")


def test_ac09_simulator_convergence():
    details, ok = [], True
    for k, s, target in ((2, 23, 0.1451), (1, 10, 0.2058)):
        cfg = SimConfig(10_000, Bernoulli(P10), k=k, s=s, trials=200, master_seed=2020 + k)
        report, dt = timed(run_simulation, cfg)
        tol = max(0.01, 4 * report.std_error)
        err = abs(report.mean_tests_per_patient - target)
        ok &= err <= tol
        details.append(f"k={k}: mean={report.mean_tests_per_patient:.5f} |err|={err:.5f} tol={tol:.4f} t={dt:.2f}s")
    check(9, "simulated mean within max(0.01, 4 SE) of analytic at p=0.01112", ok, "; ".join(details))


def test_ac10_protocol_correctness():
    configs = [
        SimConfig(50, Bernoulli(0.05), k=1, s=5, trials=25_000, master_seed=1),
        SimConfig(60, Bernoulli(0.1), k=2, s=7, trials=25_000, master_seed=2),
        SimConfig(45, FixedCount(4), k=3, s=9, trials=25_000, master_seed=3),
        SimConfig(23, Bernoulli(0.3), k=2, s=23, trials=25_000, master_seed=4),
    ]
    trials = bad = 0
    for cfg in configs:
        expected_pools = cfg.k * math.ceil(cfg.n_patients / cfg.s)
        ident = np.arange(cfg.n_patients)
        for i in range(cfg.trials):
            draw = draw_trial(cfg, i)
            out = outcome_from_draw(cfg, draw)
            trials += 1
            partitions_ok = all(np.array_equal(np.sort(perm), ident) for perm in draw.perms)
            if not (
                partitions_ok
                and out.missed_positives == 0
                and out.detected_positives == out.positives
                and out.pool_tests == expected_pools
                and out.total_tests == out.pool_tests + out.individual_retests
                and out.individual_retests == out.suspect_negatives + out.detected_positives
            ):
                bad += 1
    check(10, "fn=0: no missed positives and partition invariants hold in 1e5 trials",
          trials == 100_000 and bad == 0, f"trials={trials} violations={bad}")


def test_ac11_intro_dominance():
    reports = {}
    for k, s in ((1, 10), (2, 23)):
        cfg = SimConfig(1012, FixedCount(11), k=k, s=s, trials=10_000, master_seed=42)
        reports[k] = run_simulation(cfg)
    single, double = reports[1], reports[2]
    se = 1012 * math.hypot(single.std_error, double.std_error)
    gap = single.mean_total_tests - double.mean_total_tests
    ok = gap >= 5 * se and double.mean_total_tests < 210
    check(11, "n=1012, 11 positives: double pooling below single at >= 5 sigma and below 210", ok,
          f"single={single.mean_total_tests:.2f} double={double.mean_total_tests:.2f} gap={gap / se:.1f} sigma")


def test_ac12_determinism():
    cmds = [
        ["simulate", "--n", "1012", "--fixed-positives", "11", "--k", "2", "--s", "23",
         "--trials", "500", "--seed", "42"],
        ["simulate", "--n", "100", "--p", "0.01", "--k", "2", "--s", "23", "--trials", "10",
         "--seed", "7", "--format", "json"],
        ["simulate", "--n", "200", "--p", "0.05", "--k", "3", "--s", "10", "--trials", "50",
         "--seed", "3", "--fn-rate", "0.1"],
    ]
    ok = True
    for cmd in cmds:
        full = [sys.executable, "-m", "doublepool", *cmd]
        a = subprocess.run(full, capture_output=True, check=True).stdout
        b = subprocess.run(full, capture_output=True, check=True).stdout
        ok &= bool(a) and a == b
    check(12, "repeated simulate runs with the same seed are byte-identical", ok, f"{len(cmds)} commands")


def _read_figure(tmp_path, which):
    path = tmp_path / f"fig{which}.csv"
    subprocess.run([sys.executable, "-m", "doublepool", "figure-data", str(which), "--out", str(path)],
                   check=True)
    rows = [ln.split(",") for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header, body = rows[0], rows[1:]
    return header, np.array([[float(v) for v in r] for r in body])


def test_ac13_figure_data(tmp_path):
    _, f1 = _read_figure(tmp_path, 1)
    _, f2 = _read_figure(tmp_path, 2)
    _, f3 = _read_figure(tmp_path, 3)
    _, f4 = _read_figure(tmp_path, 4)
    steps_ok = bool(np.all(np.diff(f1[:, 1]) <= 0) and np.all(np.diff(f2[:, 1]) <= 0))
    low = f3[:, 0] <= 0.054
    costs_ok = bool(np.all(f3[low, 2] < f3[low, 1]))
    p, sv = f4[:, 0], f4[:, 1]
    sv_p10 = float(np.interp(P10, p, sv))
    i = int(np.argmax(sv < 10.0))
    cross = float(np.interp(10.0, [sv[i], sv[i - 1]], [p[i], p[i - 1]]))
    sv_010 = float(np.interp(0.10, p, sv))
    fig4_ok = 28.5 <= sv_p10 <= 30.5 and 0.050 <= cross <= 0.058 and sv_010 > 0
    check(13, "figure data: descending steps, cost_2 < cost_1 for p <= 0.054, fig-4 landmarks",
          steps_ok and costs_ok and fig4_ok,
          f"steps={steps_ok} costs={costs_ok} savings(p10)={sv_p10:.3f}% crossover={cross:.5f} "
          f"savings(0.10)={sv_010:.3f}%")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q", "-p", "no:cacheprovider"]))
