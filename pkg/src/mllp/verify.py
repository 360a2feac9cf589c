"""Statistical checks of the distributional identities, and a config-driven suite runner.

Distribution equality is tested with Kolmogorov-Smirnov statistics against the
asymptotic Kolmogorov critical value.  Laplace transforms and moments are
tested with z-scores (estimate minus target, over the standard error).

Suite configs are TOML::

    level = 0.01          # KS significance level
    se_threshold = 3.0    # z-score band

    [[checks]]
    kind = "laplace"
    alpha = [0.3, 0.5]    # list values expand into a cartesian grid
    lam = 1.0
    u = [0.5, 1.0]
    n = 1000000

A check may set ``control = true`` to mark a negative control, which is
expected to fail.  Each grid point gets its own seed ``derive_seed(seed, i, j)``
for check ``i`` and point ``j``, so results do not depend on execution order.
"""

from __future__ import annotations

import itertools
import json
import math
import sys
from dataclasses import asdict, dataclass, replace
from importlib import resources

import numpy as np
from scipy import stats

from . import analytics, process, randvar
from .errors import ConfigError, DomainError, EmptySample, NonMonotoneCDF
from .process import ProcessParams, TemperedParams
from .randvar import RandomSource, derive_seed

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check.

    ``bound`` is ``"upper"`` when the check passes for ``statistic <= threshold``
    (KS distances, counts, relative deviations) and ``"abs"`` when it passes for
    ``|statistic| <= threshold`` (z-scores).
    """

    name: str
    statistic: float
    threshold: float
    passed: bool
    n_samples: int
    seed: int
    details: str
    control: bool = False
    bound: str = "upper"

    @property
    def as_expected(self) -> bool:
        """True when a regular check passed or a negative control failed."""
        return self.passed != self.control

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _upper(name, statistic, threshold, n, seed, details, control=False):
    statistic = float(statistic)
    return CheckReport(name, statistic, float(threshold), bool(statistic <= threshold),
                       int(n), int(seed), details, control, "upper")


def _zscore(name, estimate, se, target, threshold, n, seed, control=False):
    diff = estimate - target
    if se > 0:
        z = diff / se
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    details = f"estimate={estimate:.10g} target={target:.10g} se={se:.4g}"
    return CheckReport(name, float(z), float(threshold), bool(abs(z) <= threshold),
                       int(n), int(seed), details, control, "abs")


def _as_sample(x):
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise EmptySample("sample is empty")
    return arr


def _mean_se(values):
    n = values.size
    se = float(values.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return float(values.mean()), se


def empirical_laplace(sample, u: float) -> tuple[float, float]:
    """Mean of exp(-u x) and its standard error."""
    x = _as_sample(sample)
    if not u >= 0:
        raise DomainError(f"u must be nonnegative, got {u}")
    if u == 0:
        return 1.0, 0.0
    return _mean_se(np.exp(-u * x))


def kolmogorov_critical(level: float) -> float:
    """c with P(K > c) = level for the limiting Kolmogorov distribution."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    return float(stats.kstwobign.isf(level))


def ks_distance(a, b) -> float:
    a = np.sort(_as_sample(a))
    b = np.sort(_as_sample(b))
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b, level: float = 0.01, name: str = "ks_two_sample", seed: int = 0,
                  control: bool = False) -> CheckReport:
    a = _as_sample(a)
    b = _as_sample(b)
    n, m = a.size, b.size
    d = ks_distance(a, b)
    crit = kolmogorov_critical(level) * math.sqrt((n + m) / (n * m))
    return _upper(name, d, crit, n + m, seed, f"n={n} m={m} level={level}", control)


def ks_one_sample(sample, cdf, level: float = 0.01, name: str = "ks_one_sample", seed: int = 0,
                  control: bool = False) -> CheckReport:
    """One-sample KS against ``cdf``; array-valued handles are called once on the sorted sample."""
    x = np.sort(_as_sample(sample))
    n = x.size
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.array([float(cdf(v)) for v in x])
    if np.any(np.diff(f) < -1e-12):
        raise NonMonotoneCDF("cdf decreases on the sorted sample")
    if np.any((f < 0) | (f > 1)):
        raise NonMonotoneCDF("cdf values leave [0, 1]")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    crit = kolmogorov_critical(level) / math.sqrt(n)
    return _upper(name, d, crit, n, seed, f"n={n} level={level}", control)


# ---------------------------------------------------------------------------
# checks of the process identities

def check_self_similarity(src: RandomSource, params: ProcessParams, c: float, n: int,
                          level: float = 0.01, index: float | None = None,
                          name: str = "self_similarity", control: bool = False) -> CheckReport:
    """M(N_{1/c}(1)) against c**index M(1); ``index`` defaults to 1/alpha."""
    if index is None:
        index = 1.0 / params.alpha
    left, right = src.spawn(2)
    a = process.simulate_nb_subordinated(left, params, c, n)
    b = c ** index * process.sample_mllp(right, params, 1.0, n)
    return ks_two_sample(a, b, level, name, src.seed, control)


def check_limit_theorem(src: RandomSource, params: ProcessParams, t: float = 200.0, n: int = 100_000,
                        level: float = 0.01, name: str = "limit_theorem",
                        control: bool = False) -> CheckReport:
    """lam**(1/alpha) M(t) / t**(1/alpha) against the standard stable law."""
    left, right = src.spawn(2)
    scale = (params.lam / t) ** (1.0 / params.alpha)
    a = scale * process.sample_mllp(left, params, t, n)
    b = randvar.stable_variate(right, params.alpha, size=n)
    return ks_two_sample(a, b, level, name, src.seed, control)


def _attraction_sums(src, params, n_summands, n, chunk_draws=2_000_000):
    rows = max(1, chunk_draws // n_summands)
    out = np.empty(n)
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        x = randvar.ml_variate(src, params.alpha, params.lam, size=(stop - start, n_summands))
        out[start:stop] = x.sum(axis=1)
    return (params.lam / n_summands) ** (1.0 / params.alpha) * out


def check_stable_attraction(src: RandomSource, params: ProcessParams, n_summands: int = 500,
                            n: int = 10_000, level: float = 0.01, name: str = "stable_attraction",
                            control: bool = False) -> CheckReport:
    """Rescaled sums of iid Mittag-Leffler draws against the standard stable law."""
    left, right = src.spawn(2)
    a = _attraction_sums(left, params, int(n_summands), int(n))
    b = randvar.stable_variate(right, params.alpha, size=n)
    return ks_two_sample(a, b, level, name, src.seed, control)


def check_stable_attraction_laplace(src, params, n_summands, n, threshold=3.0, u=1.0,
                                    name="stable_attraction_laplace", control=False):
    est, se = empirical_laplace(_attraction_sums(src, params, int(n_summands), int(n)), u)
    return _zscore(name, est, se, math.exp(-u ** params.alpha), threshold, n, src.seed, control)


def check_laplace(src, params, u, n, threshold=3.0, name="laplace", control=False):
    """Empirical LT of ml_variate draws against lam / (lam + u**alpha)."""
    x = randvar.ml_variate(src, params.alpha, params.lam, size=n)
    est, se = empirical_laplace(x, u)
    return _zscore(name, est, se, analytics.mllp_laplace(u, 1.0, params), threshold, n, src.seed, control)


def check_density(src, params, t, n, level=0.01, name="density_ks", control=False):
    """One-sample KS of simulated M(t) against the analytic CDF."""
    if t == 1.0:
        x = randvar.ml_variate(src, params.alpha, params.lam, size=n)
    else:
        x = process.sample_mllp(src, params, t, n)
    return ks_one_sample(x, lambda v: analytics.mllp_cdf_array(v, t, params), level, name,
                         src.seed, control)


def check_fractional_moment(src, params, q, t, n, threshold=3.0, batches=100, tolerance=0.05,
                            name="fractional_moment", control=False):
    """Empirical E X**q against the closed form.

    For 2q < alpha the z-score of the sample mean is used.  Otherwise X**q has
    infinite variance and the median of ``batches`` batch means must lie
    within ``tolerance`` (relative) of the target.
    """
    target = analytics.fractional_moment(q, t, params)
    x = process.sample_mllp(src, params, t, n) ** q
    if 2.0 * q < params.alpha:
        est, se = _mean_se(x)
        return _zscore(name, est, se, target, threshold, n, src.seed, control)
    med = float(np.median(x[: n - n % batches].reshape(batches, -1).mean(axis=1)))
    rel = abs(med / target - 1.0)
    return _upper(name, rel, tolerance, n, src.seed,
                  f"median_of_batch_means={med:.10g} target={target:.10g} batches={batches}", control)


def check_nb_laplace(src, params, c, u, n, threshold=3.0, name="self_similarity_laplace",
                     control=False):
    """Empirical LT of M(N_{1/c}(1)) against lam / (lam + c u**alpha)."""
    x = process.simulate_nb_subordinated(src, params, c, n)
    est, se = empirical_laplace(x, u)
    target = params.lam / (params.lam + c * u ** params.alpha)
    return _zscore(name, est, se, target, threshold, n, src.seed, control)


def _variance_se(x):
    n = x.size
    d = x - x.mean()
    s2 = float(np.mean(d * d)) * n / (n - 1)
    m4 = float(np.mean(d ** 4))
    return s2, math.sqrt(max(m4 - s2 * s2, 0.0) / n)


def check_tempered_moments(src, params: TemperedParams, t, n, threshold=3.0,
                           name="tempered_moments", control=False):
    """Mean and variance of tempered endpoints (two reports, one sample)."""
    x = process.sample_tempered_mllp(src, params, t, n)
    mean, var = analytics.tempered_moments(t, params)
    m_est, m_se = _mean_se(x)
    v_est, v_se = _variance_se(x)
    return [_zscore(f"{name}.mean", m_est, m_se, mean, threshold, n, src.seed, control),
            _zscore(f"{name}.variance", v_est, v_se, var, threshold, n, src.seed, control)]


def check_tempered_laplace(src, params: TemperedParams, t, u, n, threshold=3.0,
                           name="tempered_laplace", control=False):
    x = process.sample_tempered_mllp(src, params, t, n)
    est, se = empirical_laplace(x, u)
    return _zscore(name, est, se, analytics.tempered_laplace(u, t, params), threshold, n,
                   src.seed, control)


def ks_calibration(src, n=100_000, repetitions=100, level=0.01, max_failures=5,
                   name="ks_calibration", control=False):
    """Null-hypothesis false-positive count of the two-sample KS test."""
    failures = 0
    for rep in src.spawn(repetitions):
        a = randvar.uniform01(rep, n)
        b = randvar.uniform01(rep, n)
        failures += not ks_two_sample(a, b, level).passed
    return _upper(name, failures, max_failures, 2 * n * repetitions, src.seed,
                  f"failures={failures}/{repetitions} level={level} "
                  f"expected={level * repetitions:g}", control)


# ---------------------------------------------------------------------------
# suite runner

@dataclass(frozen=True)
class _Kind:
    run: object
    required: tuple
    optional: tuple = ()


def _params(p):
    return ProcessParams(p["alpha"], p["lam"], p.get("beta", 1.0))


def _run_laplace(src, p, level, se):
    return check_laplace(src, _params(p), p["u"], p["n"], se)


def _run_density(src, p, level, se):
    return check_density(src, _params(p), p.get("t", 1.0), p["n"], level)


def _run_moment(src, p, level, se):
    params = _params(p)
    q = p["q_fraction"] * params.alpha if "q_fraction" in p else p["q"]
    return check_fractional_moment(src, params, q, p.get("t", 1.0), p["n"], se,
                                   p.get("batches", 100), p.get("tolerance", 0.05))


def _run_limit(src, p, level, se):
    return check_limit_theorem(src, _params(p), p["t"], p["n"], level)


def _run_attraction(src, p, level, se):
    return check_stable_attraction(src, _params(p), p["n_summands"], p["n"], level)


def _run_attraction_lt(src, p, level, se):
    return check_stable_attraction_laplace(src, _params(p), p["n_summands"], p["n"], se,
                                           p.get("u", 1.0))


def _run_self_similarity(src, p, level, se):
    params = _params(p)
    index = p["index_factor"] / params.alpha if "index_factor" in p else None
    return check_self_similarity(src, params, p["c"], p["n"], level, index)


def _run_nb_laplace(src, p, level, se):
    return check_nb_laplace(src, _params(p), p["c"], p["u"], p["n"], se)


def _run_tempered_moments(src, p, level, se):
    tp = TemperedParams(_params(p), p["mu"])
    return check_tempered_moments(src, tp, p.get("t", 1.0), p["n"], se)


def _run_tempered_laplace(src, p, level, se):
    tp = TemperedParams(_params(p), p["mu"])
    return check_tempered_laplace(src, tp, p.get("t", 1.0), p["u"], p["n"], se)


def _run_calibration(src, p, level, se):
    return ks_calibration(src, p["n"], p.get("repetitions", 100), level, p.get("max_failures", 5))


_BASE = ("alpha", "lam")
KINDS = {
    "laplace": _Kind(_run_laplace, _BASE + ("u", "n"), ("beta",)),
    "density_ks": _Kind(_run_density, _BASE + ("n",), ("t",)),
    "fractional_moment": _Kind(_run_moment, _BASE + ("n",),
                               ("q", "q_fraction", "t", "batches", "tolerance")),
    "limit_theorem": _Kind(_run_limit, _BASE + ("t", "n"), ("beta",)),
    "stable_attraction": _Kind(_run_attraction, _BASE + ("n_summands", "n")),
    "stable_attraction_laplace": _Kind(_run_attraction_lt, _BASE + ("n_summands", "n"), ("u",)),
    "self_similarity": _Kind(_run_self_similarity, _BASE + ("c", "n"), ("index_factor", "beta")),
    "self_similarity_laplace": _Kind(_run_nb_laplace, _BASE + ("c", "u", "n"), ("beta",)),
    "tempered_moments": _Kind(_run_tempered_moments, _BASE + ("mu", "n"), ("t",)),
    "tempered_laplace": _Kind(_run_tempered_laplace, _BASE + ("mu", "u", "n"), ("t",)),
    "ks_calibration": _Kind(_run_calibration, ("n",), ("repetitions", "max_failures")),
}
_META = ("kind", "control", "grid")
_TOP = ("level", "se_threshold", "checks")


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: TOML syntax error in {path}: {exc}") from exc
    return validate_config(cfg)


def default_config_path() -> str:
    return str(resources.files("mllp") / "data" / "default_suite.toml")


def _number(key, value, positive=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{key}: must be positive, got {value!r}")
    return value


def validate_config(cfg: dict) -> dict:
    for key in cfg:
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown top-level key")
    level = _number("level", cfg.get("level", 0.01))
    if not level < 1:
        raise ConfigError(f"level: must lie in (0, 1), got {level}")
    se = _number("se_threshold", cfg.get("se_threshold", 3.0))
    checks = cfg.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigError("checks: expected an array of tables")
    for i, chk in enumerate(checks):
        where = f"checks[{i}]"
        if not isinstance(chk, dict):
            raise ConfigError(f"{where}: expected a table")
        kind = chk.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"{where}.kind: unknown check kind {kind!r}")
        spec = KINDS[kind]
        for key in chk:
            if key not in _META and key not in spec.required and key not in spec.optional:
                raise ConfigError(f"{where}.{key}: not a parameter of {kind!r}")
        for key in spec.required:
            if key not in chk:
                raise ConfigError(f"{where}.{key}: required by {kind!r}")
        if not isinstance(chk.get("control", False), bool):
            raise ConfigError(f"{where}.control: expected true or false")
        for key, value in chk.items():
            if key in _META:
                continue
            values = value if isinstance(value, list) else [value]
            for v in values:
                _number(f"{where}.{key}", v, positive=(key != "u"))
    return {"level": level, "se_threshold": se, "checks": checks}


def expand_grid(check: dict) -> list[dict]:
    """Cartesian product over list-valued keys, in key order."""
    keys = [k for k in check if k not in _META]
    axes = [check[k] if isinstance(check[k], list) else [check[k]] for k in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


def _label(kind, point):
    inner = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in point.items()
                     if k != "n")
    return f"{kind}[{inner}]"


def run_suite(seed: int, config_path=None, progress=None) -> list[CheckReport]:
    """Run every configured check; deterministic given seed and config."""
    cfg = load_config(config_path or default_config_path())
    reports = []
    for i, chk in enumerate(cfg["checks"]):
        kind = chk["kind"]
        control = chk.get("control", False)
        for j, point in enumerate(expand_grid(chk)):
            src = RandomSource(derive_seed(seed, i, j))
            try:
                out = KINDS[kind].run(src, point, cfg["level"], cfg["se_threshold"])
            except DomainError as exc:
                raise ConfigError(f"checks[{i}]: {exc}") from exc
            for rep in out if isinstance(out, list) else [out]:
                suffix = rep.name.partition(".")[2]
                name = _label(kind, point) + (f".{suffix}" if suffix else "")
                rep = replace(rep, name=name, control=control)
                reports.append(rep)
                if progress:
                    progress(rep)
    return reports


def suite_ok(reports) -> bool:
    return all(r.as_expected for r in reports)


def summary_table(reports, level: float = 0.01) -> str:
    width = max([len(r.name) for r in reports] + [5])
    lines = [f"{'check':<{width}}  {'statistic':>12}  {'threshold':>10}  result"]
    for r in reports:
        verdict = "PASS" if r.passed else "FAIL"
        if r.control:
            verdict = f"{verdict} (control, {'ok' if r.as_expected else 'NOT DETECTED'})"
        lines.append(f"{r.name:<{width}}  {r.statistic:>12.5g}  {r.threshold:>10.4g}  {verdict}")
    regular = [r for r in reports if not r.control]
    failed = sum(not r.passed for r in regular)
    controls = [r for r in reports if r.control]
    lines.append("")
    lines.append(f"{len(regular)} checks, {failed} failed "
                 f"(about {level * len(regular):.2f} false positives expected at level {level:g}); "
                 f"{sum(r.as_expected for r in controls)}/{len(controls)} controls detected")
    return "\n".join(lines)
