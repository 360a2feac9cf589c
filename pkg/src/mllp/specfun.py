"""Mittag-Leffler series and the gamma/beta helpers behind every analytic formula.

The workhorse is :func:`prabhakar`, the three-parameter Mittag-Leffler function

    E^g_{a,b}(z) = sum_k (g)_k / k! * z^k / Gamma(a k + b),

which covers the ordinary two-parameter function (g = 1), the MLLP density and
CDF series, and the tempered density series.  Terms are formed in log space with
explicit sign tracking and accumulated with Neumaier compensation.  When the
estimated rounding error of the double-precision pass exceeds the requested
relative tolerance (heavy cancellation for large negative z), the same series is
re-summed with mpmath at a working precision derived from the largest term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import special

from .errors import DomainError, TermCapExceeded

_EPS = float(np.finfo(float).eps)
_RESCALE = 600.0  # log-magnitude headroom before the running sum is rescaled
_MAX_DPS = 4000
_MAX_DENOMINATOR = 20  # alpha = p/q with q up to this uses the Gamma recurrence


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy shared by all infinite-series evaluations."""

    tolerance: float = 1e-12
    max_terms: int = 2000

    def __post_init__(self):
        if not (0.0 < self.tolerance < 1.0):
            raise DomainError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")


DEFAULT_SERIES = SeriesConfig()


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    truncation_bound: float
    rounding_bound: float
    extended: bool = False

    @property
    def error_bound(self) -> float:
        return self.truncation_bound + self.rounding_bound


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return special.gammaln(arr)


def beta_fn(a, b):
    """Euler beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if not (np.all(a_arr > 0) and np.all(b_arr > 0)):
        raise DomainError(f"beta_fn requires positive arguments, got ({a!r}, {b!r})")
    return np.exp(log_gamma(a_arr) + log_gamma(b_arr) - log_gamma(a_arr + b_arr))


def _check_series_args(alpha, beta, gamma, z):
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if not math.isfinite(z):
        raise DomainError(f"z must be finite, got {z}")


def prabhakar(alpha: float, beta: float, gamma: float, z: float,
              cfg: SeriesConfig = DEFAULT_SERIES) -> SeriesResult:
    """Three-parameter Mittag-Leffler function by direct series summation.

    Summation stops at the first index ``K >= 1`` whose term is smaller than
    ``cfg.tolerance * |partial sum|`` and smaller than its predecessor (the
    term sequence is unimodal, so this guarantees the tail is decreasing).

    Raises
    ------
    TermCapExceeded
        If ``cfg.max_terms`` terms do not reach the stopping rule, or the
        extended-precision pass would need an unreasonable working precision.
    """
    alpha, beta, gamma, z = float(alpha), float(beta), float(gamma), float(z)
    _check_series_args(alpha, beta, gamma, z)
    if z == 0.0:
        return SeriesResult(math.exp(-math.lgamma(beta)), 1, 0.0, 0.0)

    negative = z < 0
    log_abs_z = math.log(abs(z))
    lg_g = math.lgamma(gamma)

    def log_term(k):
        return (math.lgamma(gamma + k) - lg_g - math.lgamma(k + 1.0)
                + k * log_abs_z - math.lgamma(alpha * k + beta))

    scale = log_term(0)
    s = comp = 0.0
    abs_sum = err_acc = 0.0
    prev = math.inf
    k = 0
    while True:
        lt = log_term(k)
        if lt > scale + _RESCALE:
            f = math.exp(scale - lt)
            s, comp, abs_sum, err_acc = s * f, comp * f, abs_sum * f, err_acc * f
            scale = lt
        mag = math.exp(lt - scale)
        term = -mag if (negative and k % 2) else mag
        t = s + term
        if abs(s) >= abs(term):
            comp += (s - t) + term
        else:
            comp += (term - t) + s
        s = t
        abs_sum += mag
        err_acc += mag * (abs(lt) + 2.0)
        if k >= 1 and mag < prev and mag <= cfg.tolerance * abs(s + comp):
            break
        prev = mag
        k += 1
        if k >= cfg.max_terms:
            raise TermCapExceeded(
                f"series for z={z:g} (alpha={alpha:g}) did not converge in {cfg.max_terms} terms")

    total = s + comp
    rounding = _EPS * (err_acc + abs(total))
    m1 = math.exp(log_term(k + 1) - scale)
    if negative:
        trunc = m1
    else:
        ratio = math.exp(log_term(k + 2) - log_term(k + 1))
        trunc = m1 / (1.0 - ratio) if ratio < 1.0 else math.inf

    if rounding > cfg.tolerance * abs(total):
        log10_abs_sum = (math.log(abs_sum) + scale) / math.log(10.0)
        if alpha == 1.0:
            return _prabhakar_kummer(beta, gamma, z, cfg, k + 1)
        return _prabhakar_mp(alpha, beta, gamma, z, cfg, log10_abs_sum)

    factor = math.exp(scale)
    return SeriesResult(total * factor, k + 1, trunc * factor, rounding * factor)


def _prabhakar_kummer(beta, gamma, z, cfg, terms):
    """alpha = 1: E^g_{1,b}(z) = 1F1(g; b; z) / Gamma(b); mpmath tracks the cancellation."""
    dps = int(max(20, 5 - math.log10(cfg.tolerance)))
    with mpmath.workdps(dps):
        v = mpmath.hyp1f1(gamma, beta, z) * mpmath.rgamma(beta)
        rounding = float(abs(v)) * 10.0 ** (-dps)
    return SeriesResult(float(v), terms, 0.0, rounding, extended=True)


def _prabhakar_mp(alpha, beta, gamma, z, cfg, log10_abs_sum):
    """Re-sum the series in extended precision; dps grows until cancellation is covered."""
    dps = int(max(30, math.ceil(log10_abs_sum) + 25 - math.log10(cfg.tolerance)))
    while dps <= _MAX_DPS:
        with mpmath.workdps(dps):
            a, b, g, zz = (mpmath.mpf(v) for v in (alpha, beta, gamma, z))
            rgamma = _rgamma_sequence(alpha, a, b)
            tol = mpmath.mpf(cfg.tolerance)
            coef = mpmath.mpf(1)
            zk = mpmath.mpf(1)
            s = mpmath.mpf(0)
            abs_sum = mpmath.mpf(0)
            prev = mpmath.inf
            k = 0
            while True:
                term = coef * zk * rgamma(k)
                s += term
                mag = abs(term)
                abs_sum += mag
                if k >= 1 and mag < prev and mag <= tol * abs(s):
                    break
                prev = mag
                coef *= (g + k) / (k + 1)
                zk *= zz
                k += 1
                if k >= cfg.max_terms:
                    raise TermCapExceeded(
                        f"series for z={z:g} (alpha={alpha:g}) did not converge in "
                        f"{cfg.max_terms} terms")
            if s == 0:
                dps *= 2
                continue
            rounding = abs_sum * mpmath.mpf(10) ** (-dps)
            if rounding <= tol * abs(s) * mpmath.mpf("0.01"):
                nxt = abs(coef * (g + k) / (k + 1) * zk * zz * rgamma(k + 1))
                return SeriesResult(float(s), k + 1, float(nxt), float(rounding), extended=True)
            needed = float(mpmath.log10(rounding / (tol * abs(s) * mpmath.mpf("0.01"))))
            dps += int(math.ceil(needed)) + 10
    raise TermCapExceeded(f"cancellation at z={z:g} needs more than {_MAX_DPS} digits")


def _rgamma_sequence(alpha, a, b):
    """k -> 1/Gamma(a k + b), called with k = 0, 1, 2, ... in order.

    For alpha = p/q the shift k -> k + q adds the integer p to the argument, so
    1/Gamma follows from the value q steps back by p divisions.
    """
    frac = Fraction(alpha).limit_denominator(_MAX_DENOMINATOR)
    if float(frac) != alpha:
        return lambda k: mpmath.rgamma(a * k + b)
    p, q = frac.numerator, frac.denominator
    a = mpmath.mpf(p) / q
    cache = []

    def rgamma(k):
        if k < len(cache):
            return cache[k]
        if k < q:
            val = mpmath.rgamma(a * k + b)
        else:
            x = a * (k - q) + b
            val = cache[k - q]
            for i in range(p):
                val /= x + i
        cache.append(val)
        return val

    return rgamma


def mittag_leffler(alpha: float, beta: float, z: float,
                   cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for alpha in (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return prabhakar(alpha, beta, 1.0, z, cfg).value


def prabhakar_array(alpha: float, beta: float, gamma: float, z,
                    cfg: SeriesConfig = DEFAULT_SERIES):
    """Vectorised double-precision pass of :func:`prabhakar`.

    Never raises on cancellation; instead returns ``(values, error_bounds)``
    where the bound combines the truncation remainder and the rounding
    estimate.  Elements that fail to converge get an infinite bound.
    """
    z = np.asarray(z, dtype=float)
    _check_series_args(alpha, beta, gamma, 0.0)
    shape = z.shape
    z = z.ravel()
    n = z.size
    negative = z < 0
    with np.errstate(divide="ignore"):
        log_abs_z = np.log(np.abs(z))
    lg_g = math.lgamma(gamma)

    total = np.zeros(n)
    acc = np.zeros(n)
    trunc = np.full(n, np.inf)
    # working arrays cover only the unconverged elements
    idx = np.arange(n)
    s = np.zeros(n)
    comp = np.zeros(n)
    err_acc = np.zeros(n)
    prev = np.full(n, np.inf)
    neg, laz = negative, log_abs_z

    def log_coef(k):
        return math.lgamma(gamma + k) - lg_g - math.lgamma(k + 1.0) - math.lgamma(alpha * k + beta)

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.max_terms):
            lt = log_coef(k) + (k * laz if k else 0.0)
            mag = np.exp(lt)
            term = np.where(neg, -mag, mag) if k % 2 else mag
            t = s + term
            comp += np.where(np.abs(s) >= np.abs(term), (s - t) + term, (term - t) + s)
            s = t
            err_acc += np.where(mag > 0, mag * (np.abs(lt) + 2.0), 0.0)
            stop = (k >= 1) & (mag < prev) & (mag <= cfg.tolerance * np.abs(s + comp))
            prev = mag
            if stop.any():
                # remainder: next term (alternating case) or a geometric tail
                l1 = log_coef(k + 1) + (k + 1) * laz[stop]
                l2 = log_coef(k + 2) + (k + 2) * laz[stop]
                m1 = np.exp(l1)
                ratio = np.exp(l2 - l1)
                geo = np.where(ratio < 1.0, m1 / (1.0 - ratio), np.inf)
                done = idx[stop]
                bound = np.where(neg[stop], m1, geo)
                trunc[done] = np.where(np.isneginf(laz[stop]), 0.0, bound)  # z == 0
                total[done] = s[stop] + comp[stop]
                acc[done] = err_acc[stop]
                keep = ~stop
                idx, s, comp, err_acc, prev = idx[keep], s[keep], comp[keep], err_acc[keep], prev[keep]
                neg, laz = neg[keep], laz[keep]
                if idx.size == 0:
                    break
    if idx.size:
        total[idx] = s + comp
        acc[idx] = err_acc
    err = trunc + _EPS * (acc + np.abs(total))
    err[~np.isfinite(total)] = np.inf
    return total.reshape(shape), err.reshape(shape)
