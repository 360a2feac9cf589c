"""Laplace transforms, series densities, Levy densities, asymptotics and moments.

Notation: ``z = lam * x**alpha``.  With ``E^g_{a,b}`` the three-parameter
Mittag-Leffler function (:func:`mllp.specfun.prabhakar`) the MLLP marginal at
time ``t`` has

    density  f(x) = z**t * E^t_{alpha, alpha t}(-z) / x
    CDF      F(x) = z**t * E^t_{alpha, alpha t + 1}(-z)

and the tempered density is ``lam**t exp(-mu x) x**(alpha t - 1) E^t_{alpha, alpha t}(w)``
with ``w = (mu**alpha - lam) x**alpha``.

The convergent series loses digits to cancellation as ``z`` grows, so large-``x``
work uses the divergent expansion of the Laplace transform around ``u = 0``,

    f(x) ~ (1/x) sum_{k>=1} C(-t, k) z**-k / Gamma(-alpha k),
    1 - F(x) ~ -sum_{k>=1} C(-t, k) z**-k / Gamma(1 - alpha k),

truncated at the smallest term of its envelope.  Integrals over ``(0, inf)``
split at a crossover point where both routes are accurate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import DomainError, IntegrationFailure, PoleError
from .process import ProcessParams, TemperedParams
from .specfun import DEFAULT_SERIES, SeriesConfig, beta_fn, log_gamma, mittag_leffler, prabhakar, prabhakar_array

# quadrature integrands only need ~1e-10 relative accuracy
QUAD_SERIES = SeriesConfig(tolerance=1e-10, max_terms=2000)
_ASYM_MAX_TERMS = 200
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class DensityEval:
    x: float
    value: float
    terms_used: int
    truncation_bound: float


@dataclass(frozen=True)
class TailAsymptote:
    """Value of the printed large-x formula plus a validity note."""

    value: float
    advisory: str


def _require_beta_one(params):
    if params.beta != 1.0:
        raise DomainError("densities and moments are defined for beta = 1 only")


def _check_x(x):
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"x must be positive and finite, got {x}")


def _check_t(t):
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive and finite, got {t}")


def _check_alpha_closed(alpha):
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")


# ---------------------------------------------------------------------------
# untempered process

def mllp_laplace(u, t: float, params: ProcessParams):
    """E exp(-u M(t)) = (lam / (lam + u**alpha))**(beta t)."""
    _check_t(t)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise DomainError("u must be nonnegative")
    out = (params.lam / (params.lam + u_arr ** params.alpha)) ** (params.beta * t)
    return float(out) if out.ndim == 0 else out


def mllp_density(x: float, t: float, params: ProcessParams,
                 cfg: SeriesConfig = DEFAULT_SERIES) -> DensityEval:
    _check_x(x)
    _check_t(t)
    _require_beta_one(params)
    alpha, lam = params.alpha, params.lam
    log_z = math.log(lam) + alpha * math.log(x)
    res = prabhakar(alpha, alpha * t, t, -math.exp(log_z), cfg)
    pref = math.exp(t * log_z - math.log(x))
    return DensityEval(x, max(res.value * pref, 0.0), res.terms_used, res.truncation_bound * pref)


def mllp_cdf_series(x: float, t: float, params: ProcessParams,
                    cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """CDF from the term-wise integrated density series."""
    _check_x(x)
    _check_t(t)
    _require_beta_one(params)
    alpha = params.alpha
    z = params.lam * x ** alpha
    res = prabhakar(alpha, alpha * t + 1.0, t, -z, cfg)
    return min(max(res.value * z ** t, 0.0), 1.0)


def _asymptotic_sum(z, t, alpha, kind, q=0.0, n_terms=None):
    """Large-z expansion, optimally truncated unless ``n_terms`` fixes the order.

    ``kind`` selects the quantity: ``"density"`` (returns x*f), ``"survival"``
    (1-F) or ``"moment"`` (the tail integral of x**q f, divided by x**q).
    Returns ``(value, error_estimate)`` arrays.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    k = np.arange(1, _ASYM_MAX_TERMS + 1, dtype=float)
    log_coef = special.gammaln(t + k) - special.gammaln(t) - special.gammaln(k + 1.0)
    sign = np.where(k % 2 == 1, -1.0, 1.0)  # sign of C(-t, k)
    ak = alpha * k
    # 1/Gamma(s) kept as sign and log-magnitude; poles give log-magnitude -inf
    if kind == "density":
        arg = -ak
        log_env = special.gammaln(1.0 + ak) - _LOG_PI
        coef_sign = sign
    elif kind == "survival":
        arg = 1.0 - ak
        log_env = special.gammaln(ak) - _LOG_PI
        coef_sign = -sign
    elif kind == "moment":
        # int_X^inf x**q * x**(-ak-1) dx = X**(q-ak) / (ak - q)
        arg = -ak
        log_env = special.gammaln(1.0 + ak) - _LOG_PI - np.log(ak - q)
        coef_sign = sign
    else:
        raise ValueError(kind)
    log_z = np.log(z)[:, None]
    log_mag = log_coef - k * log_z
    env = log_mag + log_env
    if n_terms is None:
        stop = np.argmin(env, axis=1)  # index of the smallest envelope term
    else:
        stop = np.full(z.size, min(int(n_terms), k.size - 1))
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        log_recip = -special.gammaln(arg)
        if kind == "moment":
            log_recip = log_recip - np.log(ak - q)
        sgn = np.nan_to_num(special.gammasgn(arg))  # nan at poles
        terms = coef_sign * sgn * np.exp(log_mag + log_recip)
        mask = np.arange(k.size)[None, :] < stop[:, None]
        total = np.where(mask, terms, 0.0).sum(axis=1)
        err = np.exp(env[np.arange(z.size), stop])
    if alpha == 1.0:
        # every term vanishes; tails are exponentially small and not captured here
        err = np.full(z.size, np.inf)
    return total, err


def _optimal_order(z, t, alpha, kind):
    """Number of terms kept by optimal truncation at a single z."""
    k = np.arange(1, _ASYM_MAX_TERMS + 1, dtype=float)
    log_coef = special.gammaln(t + k) - special.gammaln(t) - special.gammaln(k + 1.0)
    shift = 1.0 if kind == "density" else 0.0
    env = log_coef - k * math.log(z) + special.gammaln(alpha * k + shift)
    return int(np.argmin(env))


def mllp_density_asymptotic(x, t: float, params: ProcessParams):
    """Large-x density expansion (leading order t alpha x**(-alpha-1) / (lam Gamma(1-alpha)))."""
    _check_t(t)
    _require_beta_one(params)
    x_arr = np.asarray(x, dtype=float)
    val, _ = _asymptotic_sum(params.lam * x_arr ** params.alpha, t, params.alpha, "density")
    val = val.reshape(x_arr.shape) / x_arr
    return float(val) if val.ndim == 0 else val


def mllp_survival_asymptotic(x, t: float, params: ProcessParams, return_error: bool = False):
    """Large-x expansion of P(M(t) > x)."""
    _check_t(t)
    _require_beta_one(params)
    x_arr = np.asarray(x, dtype=float)
    val, err = _asymptotic_sum(params.lam * x_arr ** params.alpha, t, params.alpha, "survival")
    val, err = val.reshape(x_arr.shape), err.reshape(x_arr.shape)
    if val.ndim == 0:
        val, err = float(val), float(err)
    return (val, err) if return_error else val


@lru_cache(maxsize=256)
def _crossover_z(alpha: float, t: float) -> float:
    """z at which the series CDF and the tail expansion are jointly most accurate."""
    if alpha == 1.0:
        return t + 10.0 * math.sqrt(t) + 30.0
    zs = np.geomspace(0.05, 400.0, 320)
    fs, es = prabhakar_array(alpha, alpha * t + 1.0, t, -zs, SeriesConfig(1e-14, 600))
    es = es * zs ** t
    _, ea = _asymptotic_sum(zs, t, alpha, "survival")
    worst = np.maximum(np.where(np.isfinite(es), es, np.inf), ea)
    return float(zs[int(np.argmin(worst))])


def crossover_point(t: float, params: ProcessParams) -> float:
    """x beyond which the tail expansion replaces the convergent series."""
    z = _crossover_z(float(params.alpha), float(t))
    return (z / params.lam) ** (1.0 / params.alpha)


def mllp_cdf_array(x, t: float, params: ProcessParams, cfg: SeriesConfig = DEFAULT_SERIES,
                   return_error: bool = False):
    """Vectorised CDF for large samples (KS tests).

    Points below the crossover use the integrated series, points above it the
    tail expansion.  Rounding noise of order the error estimate can make
    nearby values decrease, so the result is made monotone in x by a running
    maximum; this moves no value by more than the reported error.
    ``return_error`` also returns the per-point error estimate.
    """
    _check_t(t)
    _require_beta_one(params)
    alpha = params.alpha
    x_arr = np.asarray(x, dtype=float)
    flat = x_arr.ravel()
    order = np.argsort(flat, kind="stable")
    xs = flat[order]
    val = np.zeros(xs.size)
    err = np.zeros(xs.size)
    z = params.lam * np.where(xs > 0, xs, 0.0) ** alpha
    z_star = _crossover_z(float(alpha), float(t))
    body = (xs > 0) & (z < z_star)
    tail = z >= z_star
    if body.any():
        fs, es = prabhakar_array(alpha, alpha * t + 1.0, t, -z[body], cfg)
        zt = z[body] ** t
        val[body], err[body] = fs * zt, es * zt
    if tail.any():
        surv, ea = _asymptotic_sum(z[tail], t, alpha, "survival")
        val[tail], err[tail] = 1.0 - surv, ea
    val = np.maximum.accumulate(np.clip(val, 0.0, 1.0))
    out = np.empty_like(val)
    out[order] = val
    e = np.empty_like(err)
    e[order] = err
    out, e = out.reshape(x_arr.shape), e.reshape(x_arr.shape)
    if out.ndim == 0:
        out, e = float(out), float(e)
    return (out, e) if return_error else out


def _quad(fn, a, b, epsabs, epsrel=1e-10, limit=400):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, abserr = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit)
    if not math.isfinite(val) or abserr > max(epsabs, epsrel * abs(val)) * 10:
        raise IntegrationFailure(f"quadrature on [{a}, {b}] reached only {abserr:.2e}")
    return val, abserr


def _integrate_from_zero(fn, upper, exponent, epsabs):
    """int_0^upper fn(x) dx where fn(x) ~ x**(exponent - 1) near 0.

    For exponent < 1 the integrable singularity is removed by x = y**(1/exponent).
    """
    if exponent >= 1.0:
        return _quad(fn, 0.0, upper, epsabs)
    p = 1.0 / exponent

    def g(y):
        if y <= 0.0:
            return 0.0
        x = y ** p
        return fn(x) * p * x / y

    return _quad(g, 0.0, upper ** exponent, epsabs)


def mllp_cdf(x: float, t: float, params: ProcessParams, cfg: SeriesConfig = QUAD_SERIES) -> float:
    """Adaptive quadrature of :func:`mllp_density` over (0, x], absolute error <= 1e-8."""
    _check_x(x)
    _check_t(t)
    _require_beta_one(params)
    val, _ = _integrate_from_zero(lambda s: mllp_density(s, t, params, cfg).value,
                                  x, params.alpha * t, epsabs=1e-9)
    return min(max(val, 0.0), 1.0)


def mllp_expect(weight, t: float, params: ProcessParams, cfg: SeriesConfig = QUAD_SERIES,
                tail_power: float | None = None) -> float:
    """int_0^inf weight(x) f(x) dx.

    The body up to :func:`crossover_point` integrates the series density; the
    remainder integrates the tail expansion on a logarithmic scale.  When the
    weight is exactly ``x**q`` pass ``tail_power=q`` to use the closed-form tail.
    """
    _check_t(t)
    _require_beta_one(params)
    alpha = params.alpha
    x_star = crossover_point(t, params)
    body, _ = _integrate_from_zero(lambda s: weight(s) * mllp_density(s, t, params, cfg).value,
                                   x_star, alpha * t, epsabs=1e-10)
    if alpha == 1.0:
        return body
    z_star = params.lam * x_star ** alpha
    if tail_power is not None:
        tail, _ = _asymptotic_sum(z_star, t, alpha, "moment", q=tail_power)
        return body + float(tail[0]) * x_star ** tail_power

    # a fixed order keeps the tail integrand smooth; its error only shrinks with x
    order = _optimal_order(z_star, t, alpha, "density")

    def g(s):
        x = x_star * math.exp(s)
        dens, _ = _asymptotic_sum(params.lam * x ** alpha, t, alpha, "density", n_terms=order)
        return weight(x) * float(dens[0])  # x * f(x) ds

    # x up to 1e300 leaves a remainder of order (lam * 1e300**alpha)**-1
    tail, _ = _quad(g, 0.0, math.log(1e300 / x_star), epsabs=1e-9)
    return body + tail


def mllp_levy_density(x: float, params: ProcessParams, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """nu(x) = (alpha / x) E_{alpha,1}(-lam x**alpha)."""
    _check_x(x)
    _require_beta_one(params)
    alpha = params.alpha
    return alpha / x * mittag_leffler(alpha, 1.0, -params.lam * x ** alpha, cfg)


def density_asymptote_zero(x: float, t: float, params: ProcessParams) -> float:
    """Small-x behaviour lam**t x**(alpha t - 1) / Gamma(alpha t)."""
    _check_x(x)
    _check_t(t)
    at = params.alpha * t
    return math.exp(t * math.log(params.lam) + (at - 1.0) * math.log(x) - log_gamma(at))


def density_asymptote_inf(x: float, t: float, params: ProcessParams) -> TailAsymptote:
    """The large-x formula (lam + x**alpha)**t x**(-alpha t - 1) / Gamma(-alpha t), as printed.

    Not a usable tail density: see the advisory.  :func:`mllp_density_asymptotic`
    gives the correct expansion.
    """
    _check_x(x)
    _check_t(t)
    at = params.alpha * t
    if abs(at - round(at)) < 1e-12:
        raise PoleError(f"Gamma(-alpha t) has a pole at alpha t = {at:g}")
    g = special.gamma(-at)
    value = (params.lam + x ** params.alpha) ** t * x ** (-at - 1.0) / g
    notes = []
    if g < 0:
        notes.append(f"Gamma(-{at:g}) = {g:.6g} < 0, so the value is negative")
    notes.append("leading order is x**(-1) (not integrable at infinity); "
                 f"the true tail decays like x**(-{params.alpha:g}-1) "
                 "(see mllp_density_asymptotic)")
    return TailAsymptote(float(value), "; ".join(notes))


def fractional_moment(q: float, t: float, params: ProcessParams) -> float:
    """E M(t)**q = t B(1 - q/alpha, t + q/alpha) / (lam**(q/alpha) Gamma(1 - q)), 0 < q < alpha."""
    _check_t(t)
    _require_beta_one(params)
    alpha, lam = params.alpha, params.lam
    if not (0.0 < q < alpha):
        raise DomainError(f"q must lie in (0, alpha={alpha}), got {q}")
    r = q / alpha
    return float(t * beta_fn(1.0 - r, t + r) / (lam ** r * math.exp(log_gamma(1.0 - q))))


# ---------------------------------------------------------------------------
# tempered process

def tempered_laplace(u, t: float, params: TemperedParams):
    """(lam / (lam - mu**alpha + (mu + u)**alpha))**(beta t)."""
    _check_t(t)
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise DomainError("u must be nonnegative")
    a, lam, mu = params.alpha, params.lam, params.mu
    out = (lam / (lam - mu ** a + (mu + u_arr) ** a)) ** (params.beta * t)
    return float(out) if out.ndim == 0 else out


def tempered_density(x: float, t: float, params: TemperedParams,
                     cfg: SeriesConfig = DEFAULT_SERIES) -> DensityEval:
    _check_x(x)
    _check_t(t)
    _require_beta_one(params)
    a, lam, mu = params.alpha, params.lam, params.mu
    w = (mu ** a - lam) * x ** a
    res = prabhakar(a, a * t, t, w, cfg)
    log_pref = t * math.log(lam) - mu * x + (a * t - 1.0) * math.log(x)
    pref = math.exp(log_pref)
    return DensityEval(x, max(res.value * pref, 0.0), res.terms_used, res.truncation_bound * pref)


def tempered_levy_density(x: float, params: TemperedParams,
                          cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    _check_x(x)
    _require_beta_one(params)
    a, lam, mu = params.alpha, params.lam, params.mu
    return a * math.exp(-mu * x) / x * mittag_leffler(a, 1.0, (mu ** a - lam) * x ** a, cfg)


def tempered_moments(t: float, params: TemperedParams) -> tuple[float, float]:
    """Mean and variance of the tempered MLLP at time t.

    mean = alpha tau / (lam mu**(1-alpha)),
    var  = alpha (1-alpha) tau / (lam mu**(2-alpha)) + alpha**2 tau / (lam**2 mu**(2-2 alpha)),
    with tau = beta t.  The second variance term is (E S_{alpha,mu}(1))**2 var G(t).
    """
    _check_t(t)
    a, lam, mu = params.alpha, params.lam, params.mu
    tau = params.beta * t
    mean = a * tau / (lam * mu ** (1.0 - a))
    var = a * (1.0 - a) * tau / (lam * mu ** (2.0 - a)) + a * a * tau / (lam * lam * mu ** (2.0 - 2.0 * a))
    return mean, var


def tempered_cutoff(t: float, params: TemperedParams, mass: float = 1e-10) -> float:
    """x beyond which the tempered marginal holds less than ``mass`` (Chernoff bound)."""
    a, lam, mu = params.alpha, params.lam, params.mu
    excess = mu ** a - lam
    if excess < 0:
        s = mu
    else:
        s = 0.5 * (mu - excess ** (1.0 / a))
    log_mgf = params.beta * t * (math.log(lam) - math.log(lam - mu ** a + (mu - s) ** a))
    return (log_mgf - math.log(mass)) / s


def tempered_expect(weight, t: float, params: TemperedParams,
                    cfg: SeriesConfig = QUAD_SERIES) -> float:
    """int_0^X weight(x) f*(x) dx with X from :func:`tempered_cutoff` (bounded weights)."""
    _check_t(t)
    _require_beta_one(params)
    upper = tempered_cutoff(t, params)
    val, _ = _integrate_from_zero(lambda s: weight(s) * tempered_density(s, t, params, cfg).value,
                                  upper, params.alpha * t, epsabs=1e-11)
    return val
